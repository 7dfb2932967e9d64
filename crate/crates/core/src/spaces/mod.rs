//! Concrete Hadamard spaces and the comparison inequalities they satisfy.
//!
//! Three model families are supported: Euclidean space `ℝⁿ`, the hyperbolic
//! plane (hyperboloid model) and metric trees. Trees come in two flavours: a
//! finite tree read from a file, and the Cayley tree of a free group which is
//! the natural target for free groups acting by left translation.

pub mod euclidean;
pub mod hyperbolic;
pub mod tree;

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::word::{letter_from_rank, Word};
use crate::numeric::golden_section_min;

pub use hyperbolic::HyperbolicPoint;
pub use tree::{CayleyEdge, CayleyPoint, CayleyTree, MetricTree, TreeEdge, TreeFile, TreePoint, TreePosition};

/// Hyperbolic sample radii are capped here.
pub const MAX_HYPERBOLIC_RADIUS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Euclidean { dim: usize },
    Hyperbolic,
    Tree(Arc<MetricTree>),
    Cayley(CayleyTree),
}

/// A point tagged with its model. JSON form:
/// `{"euclidean": [x, y]}`, `{"hyperbolic": [x0, x1, x2]}`,
/// `{"tree": {"vertex": 3}}`, `{"tree": {"edge": 1, "offset": 0.5}}`,
/// `{"cayley": {"vertex": "ab"}}`,
/// `{"cayley": {"edge": {"parent": "ab", "letter": "a"}, "offset": 0.5}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Point {
    Euclidean(Vec<f64>),
    Hyperbolic(HyperbolicPoint),
    Tree(TreePoint),
    Cayley(CayleyPoint),
}

impl Point {
    pub fn kind(&self) -> &'static str {
        match self {
            Point::Euclidean(_) => "euclidean",
            Point::Hyperbolic(_) => "hyperbolic",
            Point::Tree(_) => "tree",
            Point::Cayley(_) => "cayley",
        }
    }
}

fn mismatch(space: &Space, p: &Point) -> Error {
    Error::ModelMismatch {
        expected: space.kind(),
        found: p.kind(),
    }
}

impl Space {
    pub fn euclidean(dim: usize) -> Self {
        Space::Euclidean { dim }
    }

    pub fn tree(tree: MetricTree) -> Self {
        Space::Tree(Arc::new(tree))
    }

    pub fn cayley(rank: u32) -> Self {
        Space::Cayley(CayleyTree { rank })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Space::Euclidean { .. } => "euclidean",
            Space::Hyperbolic => "hyperbolic",
            Space::Tree(_) => "tree",
            Space::Cayley(_) => "cayley",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Space::Euclidean { dim } => format!("euclidean({dim})"),
            Space::Hyperbolic => "hyperbolic-plane".into(),
            Space::Tree(t) => format!("metric-tree({} vertices)", t.vertex_count()),
            Space::Cayley(c) => format!("cayley-tree(rank {})", c.rank),
        }
    }

    /// Validates membership and returns the canonical form of `p`.
    pub fn check_point(&self, p: &Point) -> Result<Point> {
        match (self, p) {
            (Space::Euclidean { dim }, Point::Euclidean(x)) => {
                if x.len() != *dim {
                    return Err(Error::InvalidPoint(format!(
                        "expected {dim} coordinates, got {}",
                        x.len()
                    )));
                }
                if x.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(p.clone())
            }
            (Space::Hyperbolic, Point::Hyperbolic(h)) => {
                let [x0, x1, x2] = h.coords();
                Ok(Point::Hyperbolic(HyperbolicPoint::new(x0, x1, x2)?))
            }
            (Space::Tree(t), Point::Tree(q)) => Ok(Point::Tree(t.check_point(q)?)),
            (Space::Cayley(c), Point::Cayley(q)) => Ok(Point::Cayley(c.check_point(q)?)),
            _ => Err(mismatch(self, p)),
        }
    }

    /// Index-level validation cheap enough for every distance evaluation.
    fn quick_check(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean { dim }, Point::Euclidean(x)) if x.len() == *dim => Ok(()),
            (Space::Euclidean { dim }, Point::Euclidean(x)) => Err(Error::InvalidPoint(format!(
                "expected {dim} coordinates, got {}",
                x.len()
            ))),
            (Space::Hyperbolic, Point::Hyperbolic(_)) => Ok(()),
            (Space::Tree(t), Point::Tree(q)) => match q {
                TreePosition::Vertex(v) if *v < t.vertex_count() => Ok(()),
                TreePosition::OnEdge { edge, .. } if *edge < t.edges().len() => Ok(()),
                _ => Err(Error::InvalidPoint("tree point references an unknown vertex or edge".into())),
            },
            (Space::Cayley(_), Point::Cayley(_)) => Ok(()),
            _ => Err(mismatch(self, p)),
        }
    }

    pub fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        self.quick_check(p)?;
        self.quick_check(q)?;
        Ok(match (self, p, q) {
            (Space::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                euclidean::dist(a, b)
            }
            (Space::Hyperbolic, Point::Hyperbolic(a), Point::Hyperbolic(b)) => {
                hyperbolic::dist(a, b)
            }
            (Space::Tree(t), Point::Tree(a), Point::Tree(b)) => tree::dist(t.as_ref(), a, b),
            (Space::Cayley(c), Point::Cayley(a), Point::Cayley(b)) => tree::dist(c, a, b),
            _ => unreachable!("quick_check guarantees matching models"),
        })
    }

    /// The point at fraction `t` of the way from `p` to `q`.
    pub fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("geodesic parameter {t} outside [0, 1]")));
        }
        self.quick_check(p)?;
        self.quick_check(q)?;
        Ok(match (self, p, q) {
            (Space::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                Point::Euclidean(euclidean::geodesic_point(a, b, t))
            }
            (Space::Hyperbolic, Point::Hyperbolic(a), Point::Hyperbolic(b)) => {
                Point::Hyperbolic(hyperbolic::geodesic_point(a, b, t))
            }
            (Space::Tree(tr), Point::Tree(a), Point::Tree(b)) => {
                Point::Tree(tree::geodesic_point(tr.as_ref(), a, b, t))
            }
            (Space::Cayley(c), Point::Cayley(a), Point::Cayley(b)) => {
                Point::Cayley(tree::geodesic_point(c, a, b, t))
            }
            _ => unreachable!("quick_check guarantees matching models"),
        })
    }

    /// A base point: the origin, the first tree vertex, or the identity.
    pub fn base_point(&self) -> Point {
        match self {
            Space::Euclidean { dim } => Point::Euclidean(vec![0.0; *dim]),
            Space::Hyperbolic => Point::Hyperbolic(HyperbolicPoint::origin()),
            Space::Tree(_) => Point::Tree(TreePosition::Vertex(0)),
            Space::Cayley(_) => Point::Cayley(TreePosition::Vertex(Word::identity())),
        }
    }

    /// Seeded model-specific sampler. `scale` is the Gaussian standard
    /// deviation (Euclidean), the mean of the exponential radius (hyperbolic,
    /// capped at [`MAX_HYPERBOLIC_RADIUS`]) or the maximal word length of the
    /// nearest vertex (Cayley tree). Finite trees pick a uniform edge and then
    /// a uniform offset.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Point {
        match self {
            Space::Euclidean { dim } => {
                let normal = Normal::new(0.0, scale).expect("positive scale");
                Point::Euclidean((0..*dim).map(|_| normal.sample(rng)).collect())
            }
            Space::Hyperbolic => {
                let angle = rng.random::<f64>() * TAU;
                let radius = Exp::new(1.0 / scale)
                    .expect("positive scale")
                    .sample(rng)
                    .min(MAX_HYPERBOLIC_RADIUS);
                Point::Hyperbolic(HyperbolicPoint::from_polar(radius, angle))
            }
            Space::Tree(t) => {
                let m = t.edges().len();
                if m == 0 {
                    return Point::Tree(TreePosition::Vertex(0));
                }
                let e = rng.random_range(0..m);
                let offset = rng.random::<f64>() * t.edges()[e].len;
                Point::Tree(tree::canonical(t.as_ref(), e, offset))
            }
            Space::Cayley(c) => {
                let max_len = scale.max(0.0).round() as usize;
                let len = rng.random_range(0..=max_len);
                let mut letters = Vec::with_capacity(len);
                while letters.len() < len {
                    let l = letter_from_rank(rng.random_range(0..2 * c.rank));
                    if letters.last() != Some(&-l) {
                        letters.push(l);
                    }
                }
                let v = Word::from_reduced(letters);
                let l = letter_from_rank(rng.random_range(0..2 * c.rank));
                let edge = CayleyEdge::between(&v, l);
                Point::Cayley(tree::along(c, &v, &edge, rng.random::<f64>()))
            }
        }
    }

    /// Points at distance `step` from `p` in (up to) `count` directions; on
    /// trees every incident edge direction is used.
    pub fn probe_points(&self, p: &Point, count: usize, step: f64) -> Result<Vec<Point>> {
        self.quick_check(p)?;
        Ok(match (self, p) {
            (Space::Euclidean { dim }, Point::Euclidean(x)) => {
                let mut dirs: Vec<Vec<f64>> = Vec::new();
                for i in 0..*dim {
                    for s in [1.0, -1.0] {
                        let mut d = vec![0.0; *dim];
                        d[i] = s;
                        dirs.push(d);
                    }
                }
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e37_79b9);
                let normal = Normal::new(0.0, 1.0).unwrap();
                while dirs.len() < count {
                    let d: Vec<f64> = (0..*dim).map(|_| normal.sample(&mut rng)).collect();
                    let n = euclidean::dist(&d, &vec![0.0; *dim]);
                    if n > 1e-6 {
                        dirs.push(d.into_iter().map(|c| c / n).collect());
                    }
                }
                dirs.truncate(count.max(1));
                dirs.into_iter()
                    .map(|d| Point::Euclidean(x.iter().zip(d).map(|(a, b)| a + step * b).collect()))
                    .collect()
            }
            (Space::Hyperbolic, Point::Hyperbolic(h)) => {
                let [e1, e2] = hyperbolic::tangent_basis(h);
                (0..count)
                    .map(|k| {
                        let a = TAU * k as f64 / count as f64;
                        let v = [
                            step * (a.cos() * e1[0] + a.sin() * e2[0]),
                            step * (a.cos() * e1[1] + a.sin() * e2[1]),
                            step * (a.cos() * e1[2] + a.sin() * e2[2]),
                        ];
                        Point::Hyperbolic(hyperbolic::exp(h, &v))
                    })
                    .collect()
            }
            (Space::Tree(t), Point::Tree(q)) => tree_probes(t.as_ref(), q, step)
                .into_iter()
                .map(Point::Tree)
                .collect(),
            (Space::Cayley(c), Point::Cayley(q)) => tree_probes(c, q, step)
                .into_iter()
                .map(Point::Cayley)
                .collect(),
            _ => unreachable!(),
        })
    }
}

fn tree_probes<G: tree::TreeGeometry>(
    geo: &G,
    p: &tree::Position<G>,
    step: f64,
) -> Vec<tree::Position<G>> {
    match p {
        TreePosition::Vertex(v) => geo
            .incident(v)
            .into_iter()
            .map(|e| {
                let s = step.min(geo.edge_length(&e));
                tree::along(geo, v, &e, s)
            })
            .collect(),
        TreePosition::OnEdge { edge, offset } => {
            let len = geo.edge_length(edge);
            vec![
                tree::canonical(geo, edge.clone(), (offset + step).min(len)),
                tree::canonical(geo, edge.clone(), (offset - step).max(0.0)),
            ]
        }
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} outside [0, 1]")))
    }
}

/// Right-hand side minus left-hand side of the triangle comparison
/// `d²(P, Q_λ) ≤ (1−λ)d²(P,Q) + λd²(P,R) − λ(1−λ)d²(Q,R)`, where `Q_λ` is the
/// point a fraction `λ` of the way from `Q` to `R`. Non-negative in every
/// CAT(0) space, zero in flat space.
pub fn triangle_defect(space: &Space, p: &Point, q: &Point, r: &Point, lambda: f64) -> Result<f64> {
    check_unit("lambda", lambda)?;
    let q_lambda = space.geodesic_point(q, r, lambda)?;
    let d_pq = space.dist(p, q)?;
    let d_pr = space.dist(p, r)?;
    let d_qr = space.dist(q, r)?;
    let lhs = space.dist(p, &q_lambda)?.powi(2);
    let rhs = (1.0 - lambda) * d_pq * d_pq + lambda * d_pr * d_pr
        - lambda * (1.0 - lambda) * d_qr * d_qr;
    Ok(rhs - lhs)
}

/// Right-hand side minus left-hand side of the quadrilateral comparison
/// `d²(P_t, Q_t) ≤ (1−t)d²_PQ + t d²_RS − t(1−t)[α(d_PS − d_QR)² + (1−α)(d_RS − d_PQ)²]`
/// with `P_t` on `P→S` and `Q_t` on `Q→R`.
pub fn quadrilateral_defect(
    space: &Space,
    p: &Point,
    q: &Point,
    r: &Point,
    s: &Point,
    t: f64,
    alpha: f64,
) -> Result<f64> {
    check_unit("t", t)?;
    check_unit("alpha", alpha)?;
    let pt = space.geodesic_point(p, s, t)?;
    let qt = space.geodesic_point(q, r, t)?;
    let d_pq = space.dist(p, q)?;
    let d_rs = space.dist(r, s)?;
    let d_ps = space.dist(p, s)?;
    let d_qr = space.dist(q, r)?;
    let lhs = space.dist(&pt, &qt)?.powi(2);
    let bracket = alpha * (d_ps - d_qr).powi(2) + (1.0 - alpha) * (d_rs - d_pq).powi(2);
    let rhs = (1.0 - t) * d_pq * d_pq + t * d_rs * d_rs - t * (1.0 - t) * bracket;
    Ok(rhs - lhs)
}

/// `(1−t)d(P,Q) + t d(R,S) − d(P_t, Q_t)`: slack in the convexity of the
/// distance between the geodesics `P→S` and `Q→R`.
pub fn distance_convexity_gap(
    space: &Space,
    p: &Point,
    q: &Point,
    r: &Point,
    s: &Point,
    t: f64,
) -> Result<f64> {
    check_unit("t", t)?;
    let pt = space.geodesic_point(p, s, t)?;
    let qt = space.geodesic_point(q, r, t)?;
    Ok((1.0 - t) * space.dist(p, q)? + t * space.dist(r, s)? - space.dist(&pt, &qt)?)
}

/// Nearest-point projection of `y` onto the geodesic segment `[a, b]`.
///
/// `s ↦ d(y, γ(s))` is convex along the segment, so a golden-section search
/// (tolerance `1e-10` in the parameter) finds the unique minimizer.
pub fn project_to_segment(space: &Space, a: &Point, b: &Point, y: &Point) -> Result<(Point, f64)> {
    space.quick_check(y)?;
    let objective = |s: f64| {
        space
            .geodesic_point(a, b, s)
            .and_then(|p| space.dist(y, &p))
            .unwrap_or(f64::INFINITY)
    };
    // propagate errors before searching
    space.dist(a, b)?;
    let (s, _) = golden_section_min(objective, 0.0, 1.0, 1e-10);
    Ok((space.geodesic_point(a, b, s)?, s))
}
