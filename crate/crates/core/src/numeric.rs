const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search to
/// interval width `tol`. The endpoints are compared too, so a minimum at
/// the boundary is returned exactly.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_and_boundary_minima() {
        let (x, _) = golden_section_min(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
        let (x, fx) = golden_section_min(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!((x, fx), (0.0, 0.0));
        let (x, _) = golden_section_min(|x| -x, 0.0, 2.0, 1e-12);
        assert_eq!(x, 2.0);
    }
}
