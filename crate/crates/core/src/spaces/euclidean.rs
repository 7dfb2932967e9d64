pub fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn geodesic_point(p: &[f64], q: &[f64], t: f64) -> Vec<f64> {
    if t == 0.0 {
        return p.to_vec();
    }
    if t == 1.0 {
        return q.to_vec();
    }
    p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
}
