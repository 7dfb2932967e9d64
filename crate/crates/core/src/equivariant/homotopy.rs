use serde::Serialize;

use super::EquivariantMap;
use crate::error::{Error, Result};

/// Samples per edge in the debug-build check of the endpoint reduction.
const DEBUG_SCAN: usize = 64;

/// The geodesic homotopy between two maps over the same graph and
/// representation: `H(s, x)` is the point at fraction `s` from `u(x)` to
/// `v(x)`.
#[derive(Clone, Debug)]
pub struct GeodesicHomotopy {
    u: EquivariantMap,
    v: EquivariantMap,
}

/// `W₂` by composite Simpson, with bounds that follow from convexity of the
/// track length `x ↦ d(u(x), v(x))` on every edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Width2 {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityRow {
    pub s: f64,
    pub length: f64,
    pub energy: f64,
    /// `(1−s)L(u) + sL(v)`.
    pub length_bound: f64,
    /// `(1−s)E^{1/2}(u) + sE^{1/2}(v)`.
    pub energy_sqrt_bound: f64,
    pub holds: bool,
}

/// `∫₀ʰ max(0, ℓ(x))² dx` for the line through `(0, y0)` and `(h, y1)`.
fn positive_square_integral(y0: f64, y1: f64, h: f64) -> f64 {
    match (y0 > 0.0, y1 > 0.0) {
        (true, true) => h * (y0 * y0 + y0 * y1 + y1 * y1) / 3.0,
        (false, false) => 0.0,
        _ => {
            // zero crossing; only the positive triangle counts
            let top = y0.max(y1);
            let width = h * top / (y0 - y1).abs();
            width * top * top / 3.0
        }
    }
}

impl GeodesicHomotopy {
    pub fn new(u: EquivariantMap, v: EquivariantMap) -> Result<Self> {
        if !u.same_domain(&v) {
            return Err(Error::GraphMismatch);
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> &EquivariantMap {
        &self.u
    }

    pub fn v(&self) -> &EquivariantMap {
        &self.v
    }

    /// The map `H_s`, interpolating vertex images along geodesics.
    pub fn at(&self, s: f64) -> Result<EquivariantMap> {
        let space = self.u.space();
        let images = self
            .u
            .images()
            .iter()
            .zip(self.v.images())
            .map(|(a, b)| space.geodesic_point(a, b, s))
            .collect::<Result<Vec<_>>>()?;
        self.u.with_images(images)
    }

    /// Track length `d(u(x), v(x))` at distance `x` along edge `k`.
    pub fn track_length(&self, k: usize, x: f64) -> Result<f64> {
        self.u.space().dist(&self.u.edge_point(k, x)?, &self.v.edge_point(k, x)?)
    }

    /// `W∞ = sup_x d(u(x), v(x))`. On each edge the track length is convex
    /// (distance between geodesics), so the maximum sits at an edge end.
    pub fn width_inf(&self) -> Result<f64> {
        let space = self.u.space();
        let mut best = 0.0f64;
        for k in 0..self.u.graph().edges().len() {
            let (ua, ub) = self.u.edge_endpoints(k)?;
            let (va, vb) = self.v.edge_endpoints(k)?;
            let edge_max = space.dist(&ua, &va)?.max(space.dist(&ub, &vb)?);
            if cfg!(debug_assertions) {
                let len = self.u.graph().edges()[k].len;
                for j in 0..=DEBUG_SCAN {
                    let x = len * j as f64 / DEBUG_SCAN as f64;
                    let d = self.track_length(k, x)?;
                    debug_assert!(
                        d <= edge_max + 1e-9 * (1.0 + edge_max),
                        "track length {d} above endpoint max {edge_max} on edge {k}"
                    );
                }
            }
            best = best.max(edge_max);
        }
        Ok(best)
    }

    /// `W₂ = (Σ_edges ∫ d²(u(x), v(x)) dx)^{1/2}` by composite Simpson with
    /// `k` (even, ≥ 2) subintervals per edge.
    ///
    /// On a subinterval the convex track length lies below its chord and
    /// above the secant lines of the neighbouring subintervals, which
    /// brackets the integral.
    pub fn width_2(&self, k: usize) -> Result<Width2> {
        if k < 2 || k % 2 == 1 {
            return Err(Error::Domain(format!(
                "Simpson's rule needs an even number ≥ 2 of subintervals, got {k}"
            )));
        }
        let (mut total, mut lower, mut upper) = (0.0, 0.0, 0.0);
        for e in 0..self.u.graph().edges().len() {
            let len = self.u.graph().edges()[e].len;
            let h = len / k as f64;
            let g = (0..=k)
                .map(|j| self.track_length(e, h * j as f64))
                .collect::<Result<Vec<_>>>()?;
            let simpson: f64 = (0..=k)
                .map(|j| {
                    let w = if j == 0 || j == k {
                        1.0
                    } else if j % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * g[j] * g[j]
                })
                .sum();
            total += simpson * h / 3.0;
            for j in 0..k {
                upper += positive_square_integral(g[j], g[j + 1], h);
                let mut lo = 0.0f64;
                if j > 0 {
                    // secant of the left neighbour, extended
                    let slope = g[j] - g[j - 1];
                    lo = lo.max(positive_square_integral(g[j], g[j] + slope, h));
                }
                if j + 2 <= k {
                    let slope = g[j + 2] - g[j + 1];
                    lo = lo.max(positive_square_integral(g[j + 1] - slope, g[j + 1], h));
                }
                lower += lo;
            }
        }
        Ok(Width2 {
            value: total.max(0.0).sqrt(),
            lower: lower.sqrt(),
            upper: upper.sqrt(),
        })
    }
}

/// Length and energy of `H_s` along a grid of `s`, checked against the
/// convexity inequalities `L(H_s) ≤ (1−s)L(u) + sL(v)` and
/// `E^{1/2}(H_s) ≤ (1−s)E^{1/2}(u) + sE^{1/2}(v)` up to `1e-9`.
pub fn convexity_report(h: &GeodesicHomotopy, s_grid: &[f64]) -> Result<Vec<ConvexityRow>> {
    if let Some(s) = s_grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Domain(format!("grid value {s} outside [0, 1]")));
    }
    let (lu, lv) = (h.u.length()?, h.v.length()?);
    let (eu, ev) = (h.u.energy()?.sqrt(), h.v.energy()?.sqrt());
    s_grid
        .iter()
        .map(|&s| {
            let hs = h.at(s)?;
            let (length, energy) = (hs.length()?, hs.energy()?);
            let length_bound = (1.0 - s) * lu + s * lv;
            let energy_sqrt_bound = (1.0 - s) * eu + s * ev;
            Ok(ConvexityRow {
                s,
                length,
                energy,
                length_bound,
                energy_sqrt_bound,
                holds: length <= length_bound + 1e-9 && energy.sqrt() <= energy_sqrt_bound + 1e-9,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::equivariant::{build_bouquet_map, FundamentalGraph, GraphEdge};
    use crate::groups::{Representation, Word};
    use crate::spaces::{HyperbolicPoint, Point};

    fn translation_rho() -> Arc<Representation> {
        Arc::new(
            Representation::from_json(
                r#"{"kind": "euclidean", "dim": 2, "generators": {"a": {"linear": [[1, 0], [0, 1]], "translation": [1, 0]}}}"#,
            )
            .unwrap(),
        )
    }

    fn p(x: f64, y: f64) -> Point {
        Point::Euclidean(vec![x, y])
    }

    #[test]
    fn widths_of_parallel_translate() {
        // one unit loop labelled a: edge image (x,y) → (x+1,y)
        let rho = translation_rho();
        let u = build_bouquet_map(rho.clone(), p(0.0, 0.0)).unwrap();
        let v = build_bouquet_map(rho, p(0.0, 3.0)).unwrap();
        let h = GeodesicHomotopy::new(u.clone(), v).unwrap();
        assert_eq!(h.width_inf().unwrap(), 3.0);
        let w = h.width_2(64).unwrap();
        assert!((w.value - 3.0).abs() < 1e-12);
        assert!(w.lower <= w.value + 1e-12 && w.value <= w.upper + 1e-12);
        let same = GeodesicHomotopy::new(u.clone(), u).unwrap();
        assert_eq!(same.width_inf().unwrap(), 0.0);
        assert_eq!(same.width_2(2).unwrap().value, 0.0);
        assert!(same.width_2(3).is_err() && same.width_2(0).is_err());
    }

    #[test]
    fn width_bounds_bracket_curved_integral() {
        let rho = Arc::new(Representation::matrices(&[[[2.0, 1.0], [1.0, 1.0]]]).unwrap());
        let u = build_bouquet_map(rho.clone(), Point::Hyperbolic(HyperbolicPoint::from_polar(0.3, 0.0))).unwrap();
        let v = build_bouquet_map(rho, Point::Hyperbolic(HyperbolicPoint::from_polar(1.2, 2.0))).unwrap();
        let h = GeodesicHomotopy::new(u, v).unwrap();
        let fine = h.width_2(512).unwrap();
        let coarse = h.width_2(8).unwrap();
        assert!(coarse.lower <= fine.value && fine.value <= coarse.upper);
        assert!(fine.value <= h.width_inf().unwrap() + 1e-9);
    }

    #[test]
    fn convexity_rows() {
        let rho = translation_rho();
        let graph = Arc::new(
            FundamentalGraph::new(
                2,
                vec![
                    GraphEdge { source: 0, target: 1, len: 1.0, label: Word::identity() },
                    GraphEdge { source: 0, target: 1, len: 2.0, label: Word::generator(1) },
                    GraphEdge { source: 1, target: 0, len: 0.5, label: Word::generator(1) },
                ],
            )
            .unwrap(),
        );
        let u = crate::equivariant::EquivariantMap::new(graph.clone(), rho.clone(), vec![p(0.0, 0.0), p(1.0, 2.0)]).unwrap();
        let v = crate::equivariant::EquivariantMap::new(graph, rho, vec![p(-1.0, 0.5), p(3.0, -1.0)]).unwrap();
        let h = GeodesicHomotopy::new(u.clone(), v).unwrap();
        let rows = convexity_report(&h, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!((rows[0].length, rows[0].energy), (u.length().unwrap(), u.energy().unwrap()));
        assert!(rows.iter().all(|r| r.holds));
        assert!(rows[1].length < rows[1].length_bound - 1e-6);
        assert!(convexity_report(&h, &[1.5]).is_err());
    }
}
