//! Concrete stand-ins for "ρ(Γ) fixes no point of the ideal boundary".

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::groups::{enumerate_ball, Isometry, RepKind, Representation};

/// Words up to this length are searched for hyperbolic elements.
const SEARCH_RADIUS: u32 = 2;
const TRACE_MARGIN: f64 = 1e-9;

/// Projective eigenvectors of a hyperbolic `SL(2, ℝ)` matrix: the two ends
/// of its axis, as unit vectors in `ℝ²` up to sign.
fn axis_endpoints(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let tr = m[0][0] + m[1][1];
    let root = (tr * tr - 4.0).max(0.0).sqrt();
    let mut out = [[0.0; 2]; 2];
    for (i, lambda) in [(tr + root) / 2.0, (tr - root) / 2.0].into_iter().enumerate() {
        // (M − λ)v = 0: take the better-conditioned row
        let v = if m[0][1].abs() + (lambda - m[0][0]).abs() >= m[1][0].abs() + (lambda - m[1][1]).abs() {
            [m[0][1], lambda - m[0][0]]
        } else {
            [lambda - m[1][1], m[1][0]]
        };
        let n = v[0].hypot(v[1]);
        out[i] = [v[0] / n, v[1] / n];
    }
    out
}

fn same_direction(a: &[f64; 2], b: &[f64; 2]) -> bool {
    (a[0] * b[1] - a[1] * b[0]).abs() < 1e-9
}

/// Fails with [`Error::Precondition`] naming the violated criterion:
///
/// * hyperbolic plane — two hyperbolic elements (`|tr| > 2`) among words of
///   length ≤ 2 with disjoint axis endpoint sets;
/// * Cayley tree — two generator images that do not commute (a free
///   subgroup of rank 2 fixes no end);
/// * Euclidean space — the linear parts have no common fixed unit vector
///   (that direction would be a fixed boundary point);
/// * finite tree — no ideal boundary, so only a trivial image is refused.
pub fn check_non_elementary(rho: &Representation) -> Result<()> {
    let gens = rho.generator_images();
    match rho.kind() {
        RepKind::MatrixOnH2 => {
            let mut axes: Vec<[[f64; 2]; 2]> = Vec::new();
            for w in enumerate_ball(rho.rank(), SEARCH_RADIUS) {
                if let Isometry::Hyperbolic(m) = rho.evaluate(&w)? {
                    if (m[0][0] + m[1][1]).abs() > 2.0 + TRACE_MARGIN {
                        axes.push(axis_endpoints(&m));
                    }
                }
            }
            let disjoint = |a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]| {
                a.iter().all(|x| b.iter().all(|y| !same_direction(x, y)))
            };
            for (i, a) in axes.iter().enumerate() {
                if axes[i + 1..].iter().any(|b| disjoint(a, b)) {
                    return Ok(());
                }
            }
            Err(Error::Precondition(format!(
                "no two hyperbolic elements with disjoint axis endpoints among words of length ≤ {SEARCH_RADIUS}; \
                 the image fixes a point or pair of points at infinity"
            )))
        }
        RepKind::FreeOnCayleyTree => {
            let words: Vec<_> = gens
                .iter()
                .filter_map(|g| match g {
                    Isometry::Cayley(w) if !w.is_identity() => Some(w),
                    _ => None,
                })
                .collect();
            for (i, a) in words.iter().enumerate() {
                if words[i + 1..].iter().any(|b| !a.commutes_with(b)) {
                    return Ok(());
                }
            }
            Err(Error::Precondition(
                "generator images commute pairwise; a cyclic image fixes the ends of its axis".into(),
            ))
        }
        RepKind::Euclidean => {
            let dim = match rho.space() {
                crate::spaces::Space::Euclidean { dim } => *dim,
                _ => unreachable!(),
            };
            let mut stacked = DMatrix::<f64>::zeros(dim * gens.len(), dim);
            for (i, g) in gens.iter().enumerate() {
                let Isometry::Euclidean { linear, .. } = g else { unreachable!() };
                let block = linear - DMatrix::<f64>::identity(dim, dim);
                stacked.view_mut((i * dim, 0), (dim, dim)).copy_from(&block);
            }
            let sv = stacked.singular_values();
            if sv.iter().any(|s| *s < 1e-9) || sv.len() < dim {
                return Err(Error::Precondition(
                    "the linear parts share a fixed unit vector, which is a fixed boundary point".into(),
                ));
            }
            Ok(())
        }
        RepKind::TreeAutomorphisms => {
            let id = rho.identity();
            if gens.iter().all(|g| g.same_as(&id)) {
                return Err(Error::Precondition("the representation is trivial".into()));
            }
            Ok(())
        }
    }
}
