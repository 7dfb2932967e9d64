//! The hyperbolic plane in the hyperboloid model
//! `{x : x0² − x1² − x2² = 1, x0 > 0}` with Minkowski pairing
//! `⟨x, y⟩ = x0 y0 − x1 y1 − x2 y2`.
//!
//! Points are stored by their three ambient coordinates; `x0` is always
//! recomputed from the spatial part so the sheet constraint holds to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `x0² − x1² − x2² − 1` accepted from external input.
pub const SHEET_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct HyperbolicPoint([f64; 3]);

impl TryFrom<[f64; 3]> for HyperbolicPoint {
    type Error = Error;

    fn try_from(x: [f64; 3]) -> Result<Self> {
        Self::new(x[0], x[1], x[2])
    }
}

impl From<HyperbolicPoint> for [f64; 3] {
    fn from(p: HyperbolicPoint) -> Self {
        p.0
    }
}

impl HyperbolicPoint {
    /// Validates the sheet constraint (relative to the coordinate scale) and
    /// renormalizes.
    pub fn new(x0: f64, x1: f64, x2: f64) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite() && x2.is_finite()) {
            return Err(Error::InvalidPoint("non-finite hyperboloid coordinate".into()));
        }
        if x0 <= 0.0 {
            return Err(Error::InvalidPoint(format!("x0 = {x0} is not on the upper sheet")));
        }
        let residual = x0 * x0 - x1 * x1 - x2 * x2 - 1.0;
        if residual.abs() > SHEET_TOLERANCE * x0 * x0 {
            return Err(Error::InvalidPoint(format!(
                "({x0}, {x1}, {x2}) is off the hyperboloid (residual {residual:e})"
            )));
        }
        Ok(Self::from_spatial(x1, x2))
    }

    /// The point with spatial coordinates `(x1, x2)`.
    pub fn from_spatial(x1: f64, x2: f64) -> Self {
        Self([(1.0 + x1 * x1 + x2 * x2).sqrt(), x1, x2])
    }

    /// Geodesic polar coordinates about the origin `(1, 0, 0)`.
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let s = radius.sinh();
        Self::from_spatial(s * angle.cos(), s * angle.sin())
    }

    pub fn origin() -> Self {
        Self([1.0, 0.0, 0.0])
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    pub fn sheet_residual(&self) -> f64 {
        let [x0, x1, x2] = self.0;
        x0 * x0 - x1 * x1 - x2 * x2 - 1.0
    }

    fn spatial_norm(&self) -> f64 {
        self.0[1].hypot(self.0[2])
    }
}

pub fn minkowski(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2]
}

/// Distance via `sinh²(d/2) = sinh²((r₁−r₂)/2) + sinh r₁ sinh r₂ sin²(Δθ/2)`,
/// a sum of non-negative terms. Equal to `arccosh⟨p, q⟩` but without the
/// cancellation that formula suffers for nearby points far from the origin.
pub fn dist(p: &HyperbolicPoint, q: &HyperbolicPoint) -> f64 {
    let rho_p = p.spatial_norm();
    let rho_q = q.spatial_norm();
    let radial = ((rho_p.asinh() - rho_q.asinh()) / 2.0).sinh();
    let mut s2 = radial * radial;
    if rho_p > 0.0 && rho_q > 0.0 {
        let du1 = p.0[1] / rho_p - q.0[1] / rho_q;
        let du2 = p.0[2] / rho_p - q.0[2] / rho_q;
        s2 += rho_p * rho_q * (du1 * du1 + du2 * du2) / 4.0;
    }
    2.0 * s2.sqrt().asinh()
}

/// `arccosh` of the Minkowski pairing, clamped at 1. Kept as an independent
/// route for tests.
pub fn dist_by_pairing(p: &HyperbolicPoint, q: &HyperbolicPoint) -> f64 {
    minkowski(&p.0, &q.0).max(1.0).acosh()
}

pub fn geodesic_point(p: &HyperbolicPoint, q: &HyperbolicPoint, t: f64) -> HyperbolicPoint {
    if t == 0.0 {
        return *p;
    }
    if t == 1.0 {
        return *q;
    }
    let d = dist(p, q);
    let (a, b) = if d < 1e-8 {
        (1.0 - t, t)
    } else {
        let s = d.sinh();
        (((1.0 - t) * d).sinh() / s, (t * d).sinh() / s)
    };
    HyperbolicPoint::from_spatial(a * p.0[1] + b * q.0[1], a * p.0[2] + b * q.0[2])
}

/// Riemannian norm of a tangent vector (`−⟨v, v⟩ ≥ 0`).
pub fn tangent_norm(v: &[f64; 3]) -> f64 {
    (-minkowski(v, v)).max(0.0).sqrt()
}

/// Inner product of tangent vectors at a common base point.
pub fn tangent_dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    -minkowski(a, b)
}

/// Logarithm map: the tangent vector at `p` pointing to `q` with norm
/// `d(p, q)`.
pub fn log(p: &HyperbolicPoint, q: &HyperbolicPoint) -> [f64; 3] {
    let d = dist(p, q);
    if d == 0.0 {
        return [0.0; 3];
    }
    let b = minkowski(&p.0, &q.0);
    let w = [q.0[0] - b * p.0[0], q.0[1] - b * p.0[1], q.0[2] - b * p.0[2]];
    let n = tangent_norm(&w);
    if n < 1e-300 {
        return [0.0; 3];
    }
    let scale = d / n;
    [w[0] * scale, w[1] * scale, w[2] * scale]
}

pub fn exp(p: &HyperbolicPoint, v: &[f64; 3]) -> HyperbolicPoint {
    let n = tangent_norm(v);
    if n == 0.0 {
        return *p;
    }
    let (c, s) = (n.cosh(), n.sinh() / n);
    HyperbolicPoint::from_spatial(c * p.0[1] + s * v[1], c * p.0[2] + s * v[2])
}

/// Projects an ambient vector onto the tangent plane at `p`.
pub fn to_tangent(p: &HyperbolicPoint, w: &[f64; 3]) -> [f64; 3] {
    let k = minkowski(&p.0, w);
    [w[0] - k * p.0[0], w[1] - k * p.0[1], w[2] - k * p.0[2]]
}

/// Orthonormal basis of the tangent plane at `p`.
pub fn tangent_basis(p: &HyperbolicPoint) -> [[f64; 3]; 2] {
    let mut e1 = to_tangent(p, &[0.0, 1.0, 0.0]);
    let n1 = tangent_norm(&e1);
    e1.iter_mut().for_each(|x| *x /= n1);
    let mut e2 = to_tangent(p, &[0.0, 0.0, 1.0]);
    let k = tangent_dot(&e1, &e2);
    for i in 0..3 {
        e2[i] -= k * e1[i];
    }
    let n2 = tangent_norm(&e2);
    e2.iter_mut().for_each(|x| *x /= n2);
    [e1, e2]
}

/// `PSL(2, ℝ)` acting on symmetric matrices `X = [[x0+x1, x2], [x2, x0−x1]]`
/// by `X ↦ M X Mᵀ`; `det X = 1` is the sheet equation.
pub fn apply_sl2(m: &[[f64; 2]; 2], p: &HyperbolicPoint) -> HyperbolicPoint {
    let [x0, x1, x2] = p.0;
    let x = [[x0 + x1, x2], [x2, x0 - x1]];
    let mx = [
        [m[0][0] * x[0][0] + m[0][1] * x[1][0], m[0][0] * x[0][1] + m[0][1] * x[1][1]],
        [m[1][0] * x[0][0] + m[1][1] * x[1][0], m[1][0] * x[0][1] + m[1][1] * x[1][1]],
    ];
    let y00 = mx[0][0] * m[0][0] + mx[0][1] * m[0][1];
    let y01 = mx[0][0] * m[1][0] + mx[0][1] * m[1][1];
    let y11 = mx[1][0] * m[1][0] + mx[1][1] * m[1][1];
    HyperbolicPoint::from_spatial((y00 - y11) / 2.0, y01)
}
