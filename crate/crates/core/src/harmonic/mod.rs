//! Equivariant harmonic maps of graphs: energy minimization by cyclic
//! coordinate descent over vertex images, and the constants built on it.

mod estimate;
mod precondition;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::equivariant::{EquivariantMap, GeodesicHomotopy};
use crate::error::{Error, Result};
use crate::groups::Isometry;
use crate::numeric::golden_section_min;
use crate::spaces::hyperbolic::{self, HyperbolicPoint};
use crate::spaces::tree::{self, Position, TreeGeometry, TreePosition};
use crate::spaces::{Point, Space};

pub use estimate::{
    estimate_from_pairs, estimate_width_constant, main_lemma_ratio, main_lemma_ratio_refined,
    SamplerConfig, WidthEstimate, WidthSample,
};
pub use precondition::check_non_elementary;

/// Upper bound on vertex-to-vertex moves in one tree update.
const MAX_TREE_MOVES: usize = 100_000;
/// Upper bound on gradient steps in one hyperbolic update.
const MAX_GRADIENT_STEPS: usize = 1_000;
const ARMIJO_SLOPE: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelaxationConfig {
    pub max_iterations: usize,
    /// Stop once no vertex moves farther than this in a sweep.
    pub displacement_tolerance: f64,
    /// Tolerance of the one-dimensional and gradient inner solves.
    pub inner_tolerance: f64,
}

impl Default for RelaxationConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            displacement_tolerance: 1e-10,
            inner_tolerance: 1e-12,
        }
    }
}

impl RelaxationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.displacement_tolerance > 0.0 && self.inner_tolerance > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct HarmonicResult {
    pub map: EquivariantMap,
    /// `E⋆`, the energy reached.
    pub energy: f64,
    /// `L⋆`, the length of the final map.
    pub length: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy before the first sweep and after each sweep.
    pub energy_trace: Vec<f64>,
    pub displacement_tolerance: f64,
}

/// The part of the energy that depends on one vertex image: weighted
/// squared distances to fixed points, plus `d²(y, g·y)` for loops.
struct LocalObjective {
    targets: Vec<(Point, f64)>,
    loops: Vec<(Isometry, Isometry, f64)>,
}

impl LocalObjective {
    fn new(map: &EquivariantMap, v: usize) -> Result<Self> {
        let space = map.space();
        let (mut targets, mut loops) = (Vec::new(), Vec::new());
        for (k, e) in map.graph().edges().iter().enumerate() {
            let w = 1.0 / e.len;
            let g = map.label_isometry(k);
            match (e.source == v, e.target == v) {
                (true, true) => loops.push((g.clone(), g.inverse(), w)),
                (true, false) => targets.push((g.apply(space, &map.images()[e.target])?, w)),
                (false, true) => targets.push((g.inverse().apply(space, &map.images()[e.source])?, w)),
                (false, false) => {}
            }
        }
        Ok(Self { targets, loops })
    }

    fn value(&self, space: &Space, y: &Point) -> f64 {
        let mut f = 0.0;
        for (a, w) in &self.targets {
            f += w * space.dist(y, a).map_or(f64::INFINITY, |d| d * d);
        }
        for (g, _, w) in &self.loops {
            let d = g
                .apply(space, y)
                .and_then(|gy| space.dist(y, &gy))
                .map_or(f64::INFINITY, |d| d);
            f += w * d * d;
        }
        f
    }

    fn euclidean_minimizer(&self, dim: usize, y: &[f64]) -> Result<Vec<f64>> {
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for (a, w) in &self.targets {
            let Point::Euclidean(a) = a else { unreachable!() };
            for i in 0..dim {
                m[(i, i)] += w;
                rhs[i] += w * a[i];
            }
        }
        for (g, _, w) in &self.loops {
            // |y − (Ay + t)|² = |(I − A)y − t|²
            let Isometry::Euclidean { linear, translation } = g else { unreachable!() };
            let b = DMatrix::<f64>::identity(dim, dim) - linear;
            m += (b.transpose() * &b) * *w;
            rhs += (b.transpose() * translation) * *w;
        }
        let y0 = DVector::from_column_slice(y);
        let residual = rhs - &m * &y0;
        // minimal-norm step, so flat directions leave the image in place
        let step = m
            .svd(true, true)
            .solve(&residual, 1e-12)
            .map_err(|e| Error::Capability(format!("normal equations: {e}")))?;
        Ok((y0 + step).iter().copied().collect())
    }

    fn hyperbolic_gradient(&self, space: &Space, y: &HyperbolicPoint) -> [f64; 3] {
        let mut g = [0.0; 3];
        let mut add = |v: [f64; 3], w: f64| {
            for i in 0..3 {
                g[i] -= 2.0 * w * v[i];
            }
        };
        for (a, w) in &self.targets {
            let Point::Hyperbolic(a) = a else { unreachable!() };
            add(hyperbolic::log(y, a), *w);
        }
        let p = Point::Hyperbolic(*y);
        for (g_fwd, g_back, w) in &self.loops {
            // d²(y, g·y) moves in both slots: −2(log_y(g·y) + log_y(g⁻¹·y))
            for iso in [g_fwd, g_back] {
                if let Ok(Point::Hyperbolic(q)) = iso.apply(space, &p) {
                    add(hyperbolic::log(y, &q), *w);
                }
            }
        }
        g
    }

    /// Riemannian gradient descent with Armijo backtracking.
    fn hyperbolic_minimizer(&self, space: &Space, y0: &HyperbolicPoint, tol: f64) -> HyperbolicPoint {
        let phi = |y: &HyperbolicPoint| self.value(space, &Point::Hyperbolic(*y));
        let weight: f64 = self.targets.iter().map(|t| t.1).sum::<f64>()
            + 4.0 * self.loops.iter().map(|l| l.2).sum::<f64>();
        if weight == 0.0 {
            return *y0;
        }
        let mut alpha = 0.5 / weight;
        let mut y = *y0;
        let mut f = phi(&y);
        for _ in 0..MAX_GRADIENT_STEPS {
            let g = self.hyperbolic_gradient(space, &y);
            let g2 = hyperbolic::tangent_dot(&g, &g);
            if !(g2 > 0.0) {
                break;
            }
            let mut a = 2.0 * alpha;
            let mut accepted = None;
            while a > 1e-30 {
                let cand = hyperbolic::exp(&y, &[-a * g[0], -a * g[1], -a * g[2]]);
                let fc = phi(&cand);
                if fc <= f - ARMIJO_SLOPE * a * g2 {
                    accepted = Some((cand, fc));
                    break;
                }
                a *= BACKTRACK;
            }
            let Some((cand, fc)) = accepted else { break };
            let moved = hyperbolic::dist(&y, &cand);
            alpha = a;
            y = cand;
            f = fc;
            if moved < tol {
                break;
            }
        }
        y
    }
}

/// Descent over a tree: golden-section along every edge at the current
/// vertex, walking to a neighbour while that improves; stops on an edge
/// interior or at a vertex no incident edge improves.
fn tree_descent<G, F>(geo: &G, start: Position<G>, phi: F, tol: f64) -> Position<G>
where
    G: TreeGeometry,
    F: Fn(&Position<G>) -> f64,
{
    let mut cur = start;
    let mut f_cur = phi(&cur);
    if let TreePosition::OnEdge { edge, .. } = &cur {
        let (a, _) = geo.ends(edge);
        let len = geo.edge_length(edge);
        let (x, fx) = golden_section_min(|x| phi(&tree::along(geo, &a, edge, x)), 0.0, len, tol * len);
        if fx < f_cur {
            cur = tree::along(geo, &a, edge, x);
            f_cur = fx;
        }
        if matches!(cur, TreePosition::OnEdge { .. }) {
            return cur;
        }
    }
    for _ in 0..MAX_TREE_MOVES {
        let TreePosition::Vertex(v) = cur.clone() else { break };
        let mut best: Option<(f64, Position<G>)> = None;
        for e in geo.incident(&v) {
            let len = geo.edge_length(&e);
            let (x, fx) = golden_section_min(|x| phi(&tree::along(geo, &v, &e, x)), 0.0, len, tol * len);
            if fx < f_cur && best.as_ref().is_none_or(|b| fx < b.0) {
                best = Some((fx, tree::along(geo, &v, &e, x)));
            }
        }
        match best {
            None => break,
            Some((fx, p)) => {
                cur = p;
                f_cur = fx;
            }
        }
    }
    cur
}

fn propose(map: &EquivariantMap, v: usize, cfg: &RelaxationConfig) -> Result<Point> {
    let local = LocalObjective::new(map, v)?;
    let space = map.space();
    let y = &map.images()[v];
    Ok(match (space, y) {
        (Space::Euclidean { dim }, Point::Euclidean(x)) => {
            Point::Euclidean(local.euclidean_minimizer(*dim, x)?)
        }
        (Space::Hyperbolic, Point::Hyperbolic(h)) => {
            Point::Hyperbolic(local.hyperbolic_minimizer(space, h, cfg.inner_tolerance))
        }
        (Space::Tree(t), Point::Tree(p)) => Point::Tree(tree_descent(
            t.as_ref(),
            p.clone(),
            |q| local.value(space, &Point::Tree(q.clone())),
            cfg.inner_tolerance,
        )),
        (Space::Cayley(c), Point::Cayley(p)) => Point::Cayley(tree_descent(
            c,
            p.clone(),
            |q| local.value(space, &Point::Cayley(q.clone())),
            cfg.inner_tolerance,
        )),
        _ => {
            return Err(Error::Capability(format!(
                "no vertex solver for {} images in {}",
                y.kind(),
                space.describe()
            )))
        }
    })
}

/// Minimizes `F = Σ_edges d²(y_s, ρ(w)·y_t)/len` by deterministic cyclic
/// coordinate descent. A vertex update is kept only if it lowers `F`, so the
/// energy trace never increases. Hitting `max_iterations` is reported through
/// `converged = false`, not as an error.
pub fn relax(u0: &EquivariantMap, cfg: &RelaxationConfig) -> Result<HarmonicResult> {
    cfg.validate()?;
    let space = u0.space().clone();
    let mut map = u0.clone();
    let mut energy = map.energy()?;
    let mut trace = vec![energy];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut max_move = 0.0f64;
        for v in 0..map.graph().vertex_count() {
            let proposal = propose(&map, v, cfg)?;
            let mut images = map.images().to_vec();
            images[v] = proposal;
            let candidate = map.with_images(images)?;
            let e = candidate.energy()?;
            if e < energy {
                max_move = max_move.max(space.dist(&map.images()[v], &candidate.images()[v])?);
                map = candidate;
                energy = e;
            }
        }
        trace.push(energy);
        if max_move < cfg.displacement_tolerance {
            converged = true;
            break;
        }
    }
    Ok(HarmonicResult {
        length: map.length()?,
        map,
        energy,
        iterations,
        converged,
        energy_trace: trace,
        displacement_tolerance: cfg.displacement_tolerance,
    })
}

/// Largest decrease of `F` found by moving one vertex image a distance
/// `step` in `directions` directions (all incident edges on trees). A
/// minimizer gives a value near zero.
pub fn stationarity_probe(map: &EquivariantMap, directions: usize, step: f64) -> Result<f64> {
    let base = map.energy()?;
    let mut worst = 0.0f64;
    for v in 0..map.graph().vertex_count() {
        for p in map.space().probe_points(&map.images()[v], directions, step)? {
            let mut images = map.images().to_vec();
            images[v] = p;
            worst = worst.max(base - map.with_images(images)?.energy()?);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyEnergyRow {
    pub s: f64,
    pub energy: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyEnergyReport {
    pub e_star: f64,
    pub tolerance: f64,
    pub rows: Vec<HomotopyEnergyRow>,
    pub holds: bool,
}

/// Energy along the geodesic homotopy between two minimizers; constant by
/// the convexity of energy, up to `ε_h = max(1e-6, 10·tol·E⋆)`.
pub fn verify_harmonic_homotopy(
    r1: &HarmonicResult,
    r2: &HarmonicResult,
    s_grid: &[f64],
) -> Result<HomotopyEnergyReport> {
    if !(r1.converged && r2.converged) {
        return Err(Error::Unconverged);
    }
    let h = GeodesicHomotopy::new(r1.map.clone(), r2.map.clone())?;
    let e_star = r1.energy;
    let tol = r1.displacement_tolerance.max(r2.displacement_tolerance);
    let tolerance = 1e-6f64.max(10.0 * tol * e_star);
    let rows = s_grid
        .iter()
        .map(|&s| {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Domain(format!("grid value {s} outside [0, 1]")));
            }
            let energy = h.at(s)?.energy()?;
            Ok(HomotopyEnergyRow {
                s,
                energy,
                deviation: (energy - e_star).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = rows.iter().all(|r| r.deviation <= tolerance);
    Ok(HomotopyEnergyReport {
        e_star,
        tolerance,
        rows,
        holds,
    })
}
