//! Isometries of the model spaces.
//!
//! Composition follows function composition: `f.compose(&g)` is `f ∘ g`,
//! i.e. apply `g` first.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::groups::word::Word;
use crate::spaces::hyperbolic;
use crate::spaces::tree::{self, TreePosition};
use crate::spaces::{MetricTree, Point, Space};

/// Tolerance for matrix identities (orthogonality, determinant, equality).
pub const MATRIX_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Isometry {
    /// `x ↦ A x + t` with `A` orthogonal.
    Euclidean {
        linear: DMatrix<f64>,
        translation: DVector<f64>,
    },
    /// An element of `SL(2, ℝ)` acting through `SO(2, 1)`.
    Hyperbolic([[f64; 2]; 2]),
    /// Left multiplication on the Cayley tree.
    Cayley(Word),
    /// Vertex permutation of a finite metric tree, extended linearly on edges.
    Tree(Vec<usize>),
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn is_integral(m: &[[f64; 2]; 2]) -> bool {
    m.iter()
        .flatten()
        .all(|x| x.fract() == 0.0 && x.abs() < 9.0e15)
}

impl Isometry {
    pub fn identity(space: &Space) -> Self {
        match space {
            Space::Euclidean { dim } => Isometry::Euclidean {
                linear: DMatrix::identity(*dim, *dim),
                translation: DVector::zeros(*dim),
            },
            Space::Hyperbolic => Isometry::Hyperbolic([[1.0, 0.0], [0.0, 1.0]]),
            Space::Cayley(_) => Isometry::Cayley(Word::identity()),
            Space::Tree(t) => Isometry::Tree((0..t.vertex_count()).collect()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Isometry::Euclidean { .. } => "euclidean",
            Isometry::Hyperbolic(_) => "hyperbolic",
            Isometry::Cayley(_) => "cayley",
            Isometry::Tree(_) => "tree",
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        Ok(match (self, other) {
            (
                Isometry::Euclidean { linear: a, translation: s },
                Isometry::Euclidean { linear: b, translation: t },
            ) if a.ncols() == b.nrows() => Isometry::Euclidean {
                linear: a * b,
                translation: a * t + s,
            },
            (Isometry::Hyperbolic(a), Isometry::Hyperbolic(b)) => {
                Isometry::Hyperbolic(mat_mul(a, b))
            }
            (Isometry::Cayley(g), Isometry::Cayley(h)) => Isometry::Cayley(g.multiply(h)),
            (Isometry::Tree(p), Isometry::Tree(q)) if p.len() == q.len() => {
                Isometry::Tree(q.iter().map(|&v| p[v]).collect())
            }
            _ => {
                return Err(Error::InvalidIsometry(format!(
                    "cannot compose {} with {}",
                    self.kind(),
                    other.kind()
                )))
            }
        })
    }

    pub fn inverse(&self) -> Isometry {
        match self {
            Isometry::Euclidean { linear, translation } => {
                let t = linear.transpose();
                let shift = -(&t * translation);
                Isometry::Euclidean {
                    linear: t,
                    translation: shift,
                }
            }
            Isometry::Hyperbolic(m) => {
                let d = det2(m);
                Isometry::Hyperbolic([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
            }
            Isometry::Cayley(g) => Isometry::Cayley(g.inverse()),
            Isometry::Tree(p) => {
                let mut inv = vec![0; p.len()];
                for (v, &w) in p.iter().enumerate() {
                    inv[w] = v;
                }
                Isometry::Tree(inv)
            }
        }
    }

    pub fn apply(&self, space: &Space, p: &Point) -> Result<Point> {
        Ok(match (self, space, p) {
            (Isometry::Euclidean { linear, translation }, Space::Euclidean { dim }, Point::Euclidean(x))
                if x.len() == *dim && linear.ncols() == *dim =>
            {
                let y = linear * DVector::from_column_slice(x) + translation;
                Point::Euclidean(y.iter().copied().collect())
            }
            (Isometry::Hyperbolic(m), Space::Hyperbolic, Point::Hyperbolic(h)) => {
                Point::Hyperbolic(hyperbolic::apply_sl2(m, h))
            }
            (Isometry::Cayley(g), Space::Cayley(c), Point::Cayley(q)) => {
                Point::Cayley(c.translate(g, q))
            }
            (Isometry::Tree(perm), Space::Tree(t), Point::Tree(q)) => {
                Point::Tree(apply_tree_perm(t, perm, q)?)
            }
            _ => {
                return Err(Error::InvalidIsometry(format!(
                    "{} isometry cannot act on a {} point in {}",
                    self.kind(),
                    p.kind(),
                    space.describe()
                )))
            }
        })
    }

    /// Equality as isometries. Matrices are compared modulo `±I`, exactly
    /// when both are integral and entrywise within [`MATRIX_TOLERANCE`]
    /// otherwise.
    pub fn same_as(&self, other: &Isometry) -> bool {
        match (self, other) {
            (Isometry::Hyperbolic(a), Isometry::Hyperbolic(b)) => {
                if is_integral(a) && is_integral(b) {
                    return a == b || a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| *x == -*y);
                }
                let close = |s: f64| {
                    a.iter()
                        .flatten()
                        .zip(b.iter().flatten())
                        .all(|(x, y)| (x - s * y).abs() <= MATRIX_TOLERANCE)
                };
                close(1.0) || close(-1.0)
            }
            (
                Isometry::Euclidean { linear: a, translation: s },
                Isometry::Euclidean { linear: b, translation: t },
            ) => {
                a.shape() == b.shape()
                    && (a - b).amax() <= MATRIX_TOLERANCE
                    && s.len() == t.len()
                    && (s - t).amax() <= MATRIX_TOLERANCE
            }
            _ => self == other,
        }
    }

    /// `|trace|` of a hyperbolic-plane isometry.
    pub fn abs_trace(&self) -> Option<f64> {
        match self {
            Isometry::Hyperbolic(m) => Some((m[0][0] + m[1][1]).abs()),
            _ => None,
        }
    }

    /// Translation length `2 arccosh(|tr|/2)` of a hyperbolic matrix; zero for
    /// elliptic and parabolic ones.
    pub fn hyperbolic_translation_length(&self) -> Option<f64> {
        self.abs_trace().map(|t| 2.0 * (t / 2.0).max(1.0).acosh())
    }
}

fn apply_tree_perm(t: &MetricTree, perm: &[usize], q: &tree::TreePoint) -> Result<tree::TreePoint> {
    match q {
        TreePosition::Vertex(v) => perm
            .get(*v)
            .map(|&w| TreePosition::Vertex(w))
            .ok_or_else(|| Error::InvalidPoint(format!("unknown tree vertex {v}"))),
        TreePosition::OnEdge { edge, offset } => {
            let e = t
                .edges()
                .get(*edge)
                .ok_or_else(|| Error::InvalidPoint(format!("unknown tree edge {edge}")))?;
            let (a, b) = (perm[e.a], perm[e.b]);
            let k = t.edge_between(a, b).ok_or_else(|| {
                Error::InvalidIsometry("vertex permutation does not preserve edges".into())
            })?;
            let image = &t.edges()[k];
            let off = if image.a == a { *offset } else { image.len - offset };
            Ok(tree::canonical(t, k, off))
        }
    }
}

/// Structural validation of a single generator against its target space.
pub(crate) fn validate(space: &Space, g: &Isometry) -> Result<()> {
    match (space, g) {
        (Space::Euclidean { dim }, Isometry::Euclidean { linear, translation }) => {
            if linear.shape() != (*dim, *dim) || translation.len() != *dim {
                return Err(Error::InvalidIsometry(format!(
                    "expected a {dim}×{dim} linear part and {dim}-vector translation"
                )));
            }
            if linear.iter().chain(translation.iter()).any(|x| !x.is_finite()) {
                return Err(Error::InvalidIsometry("non-finite entry".into()));
            }
            let defect = (linear.transpose() * linear - DMatrix::<f64>::identity(*dim, *dim)).amax();
            if defect > MATRIX_TOLERANCE {
                return Err(Error::InvalidIsometry(format!(
                    "linear part is not orthogonal (|AᵀA − I| = {defect:e})"
                )));
            }
        }
        (Space::Hyperbolic, Isometry::Hyperbolic(m)) => {
            if m.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidIsometry("non-finite matrix entry".into()));
            }
            let d = det2(m);
            if (d - 1.0).abs() > MATRIX_TOLERANCE {
                return Err(Error::InvalidIsometry(format!("determinant {d} is not 1")));
            }
        }
        (Space::Cayley(c), Isometry::Cayley(w)) => {
            if w.max_generator() > c.rank {
                return Err(Error::InvalidIsometry(format!(
                    "word {w} is not in the free group of rank {}",
                    c.rank
                )));
            }
        }
        (Space::Tree(t), Isometry::Tree(perm)) => {
            let n = t.vertex_count();
            if perm.len() != n {
                return Err(Error::InvalidIsometry(format!(
                    "permutation has {} entries, tree has {n} vertices",
                    perm.len()
                )));
            }
            let mut seen = vec![false; n];
            for &w in perm {
                if w >= n || std::mem::replace(&mut seen[w], true) {
                    return Err(Error::InvalidIsometry("not a permutation of the vertices".into()));
                }
            }
            for e in t.edges() {
                match t.edge_between(perm[e.a], perm[e.b]) {
                    Some(k) if t.edges()[k].len == e.len => {}
                    Some(_) => {
                        return Err(Error::InvalidIsometry(
                            "permutation maps an edge to one of different length".into(),
                        ))
                    }
                    None => {
                        return Err(Error::InvalidIsometry(
                            "permutation does not map edges to edges".into(),
                        ))
                    }
                }
            }
        }
        _ => {
            return Err(Error::InvalidIsometry(format!(
                "{} isometry does not act on {}",
                g.kind(),
                space.describe()
            )))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_inverse_and_composition() {
        let a = Isometry::Hyperbolic([[2.0, 1.0], [1.0, 1.0]]);
        let id = a.compose(&a.inverse()).unwrap();
        assert!(id.same_as(&Isometry::identity(&Space::Hyperbolic)));
        let minus = Isometry::Hyperbolic([[-1.0, 0.0], [0.0, -1.0]]);
        assert!(minus.same_as(&Isometry::identity(&Space::Hyperbolic)));
    }

    #[test]
    fn diagonal_translation_length() {
        let e = 1f64.exp();
        let a = Isometry::Hyperbolic([[e, 0.0], [0.0, 1.0 / e]]);
        assert!((a.hyperbolic_translation_length().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_rotation_roundtrip() {
        let s = Space::euclidean(2);
        let (c, si) = (0.3f64.cos(), 0.3f64.sin());
        let g = Isometry::Euclidean {
            linear: DMatrix::from_row_slice(2, 2, &[c, -si, si, c]),
            translation: DVector::from_vec(vec![1.0, -2.0]),
        };
        validate(&s, &g).unwrap();
        let p = Point::Euclidean(vec![0.4, 0.9]);
        let back = g.inverse().apply(&s, &g.apply(&s, &p).unwrap()).unwrap();
        assert!(s.dist(&p, &back).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_non_isometries() {
        assert!(validate(&Space::Hyperbolic, &Isometry::Hyperbolic([[2.0, 0.0], [0.0, 1.0]])).is_err());
        let shear = Isometry::Euclidean {
            linear: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            translation: DVector::zeros(2),
        };
        assert!(validate(&Space::euclidean(2), &shear).is_err());
    }
}
