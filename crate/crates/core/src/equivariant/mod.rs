//! Piecewise-geodesic ρ-equivariant maps from the universal covering tree of
//! a finite graph.
//!
//! The covering tree is never built. A map is stored by one image per vertex
//! of the fundamental graph; the edge `s → t` with label `w` is sent to the
//! constant-speed geodesic from `y_s` to `ρ(w)·y_t`.

mod homotopy;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{Isometry, Representation, RepresentationSpec, Word};
use crate::spaces::{Point, Space};

pub use homotopy::{convexity_report, ConvexityRow, GeodesicHomotopy, Width2};

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub source: usize,
    pub target: usize,
    pub len: f64,
    pub label: Word,
}

/// A finite connected graph without terminal vertices, with positive edge
/// lengths and group-labelled directed edges.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalGraph {
    vertices: usize,
    edges: Vec<GraphEdge>,
}

impl FundamentalGraph {
    pub fn new(vertices: usize, edges: Vec<GraphEdge>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if edges.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        let mut degree = vec![0usize; vertices];
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (k, e) in edges.iter().enumerate() {
            if e.source >= vertices || e.target >= vertices {
                return Err(Error::InvalidGraph(format!("edge {k} references a missing vertex")));
            }
            if !(e.len.is_finite() && e.len > 0.0) {
                return Err(Error::InvalidGraph(format!("edge {k} has non-positive length {}", e.len)));
            }
            degree[e.source] += 1;
            degree[e.target] += 1;
            let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if (1..vertices).any(|v| find(&mut parent, v) != root) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        if let Some(v) = degree.iter().position(|&d| d == 1) {
            return Err(Error::InvalidGraph(format!("vertex {v} is terminal (degree 1)")));
        }
        Ok(Self { vertices, edges })
    }

    /// One vertex with a unit loop per generator `a_1, …, a_N`.
    pub fn bouquet(rank: u32) -> Result<Self> {
        Self::new(
            1,
            (1..=rank)
                .map(|k| GraphEdge {
                    source: 0,
                    target: 0,
                    len: 1.0,
                    label: Word::generator(k),
                })
                .collect(),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.len).sum()
    }
}

/// A ρ-equivariant piecewise-geodesic map, determined by its vertex images.
#[derive(Clone, Debug)]
pub struct EquivariantMap {
    graph: Arc<FundamentalGraph>,
    rho: Arc<Representation>,
    labels: Arc<Vec<Isometry>>,
    images: Vec<Point>,
}

impl EquivariantMap {
    pub fn new(graph: Arc<FundamentalGraph>, rho: Arc<Representation>, images: Vec<Point>) -> Result<Self> {
        let labels = graph
            .edges()
            .iter()
            .map(|e| rho.evaluate(&e.label))
            .collect::<Result<Vec<_>>>()?;
        let mut map = Self {
            graph,
            rho,
            labels: Arc::new(labels),
            images: Vec::new(),
        };
        map.images = map.checked_images(images)?;
        Ok(map)
    }

    fn checked_images(&self, images: Vec<Point>) -> Result<Vec<Point>> {
        if images.len() != self.graph.vertex_count() {
            return Err(Error::InvalidGraph(format!(
                "{} images for {} vertices",
                images.len(),
                self.graph.vertex_count()
            )));
        }
        images.iter().map(|p| self.space().check_point(p)).collect()
    }

    /// The same graph and representation with new vertex images.
    pub fn with_images(&self, images: Vec<Point>) -> Result<Self> {
        Ok(Self {
            graph: self.graph.clone(),
            rho: self.rho.clone(),
            labels: self.labels.clone(),
            images: self.checked_images(images)?,
        })
    }

    pub fn graph(&self) -> &FundamentalGraph {
        &self.graph
    }

    pub fn rho(&self) -> &Representation {
        &self.rho
    }

    pub fn shared_rho(&self) -> Arc<Representation> {
        self.rho.clone()
    }

    pub fn space(&self) -> &Space {
        self.rho.space()
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    /// `ρ(label_k)`.
    pub fn label_isometry(&self, k: usize) -> &Isometry {
        &self.labels[k]
    }

    pub fn same_domain(&self, other: &EquivariantMap) -> bool {
        (Arc::ptr_eq(&self.graph, &other.graph) || self.graph == other.graph)
            && (Arc::ptr_eq(&self.rho, &other.rho) || self.rho == other.rho)
    }

    /// The images of the two ends of edge `k` in the fundamental domain:
    /// `(y_source, ρ(label)·y_target)`.
    pub fn edge_endpoints(&self, k: usize) -> Result<(Point, Point)> {
        let e = &self.graph.edges()[k];
        let far = self.labels[k].apply(self.space(), &self.images[e.target])?;
        Ok((self.images[e.source].clone(), far))
    }

    /// Image of the point at distance `x ∈ [0, len]` from the source along
    /// edge `k`.
    pub fn edge_point(&self, k: usize, x: f64) -> Result<Point> {
        let len = self.graph.edges()[k].len;
        let (a, b) = self.edge_endpoints(k)?;
        self.space().geodesic_point(&a, &b, (x / len).clamp(0.0, 1.0))
    }

    /// Geodesic length of every edge image.
    pub fn edge_lengths(&self) -> Result<Vec<f64>> {
        (0..self.graph.edges().len())
            .map(|k| {
                let (a, b) = self.edge_endpoints(k)?;
                self.space().dist(&a, &b)
            })
            .collect()
    }

    /// Per-edge energies `d²/len` of the constant-speed edge images.
    pub fn edge_energies(&self) -> Result<Vec<f64>> {
        Ok(self
            .edge_lengths()?
            .into_iter()
            .zip(self.graph.edges())
            .map(|(d, e)| d * d / e.len)
            .collect())
    }

    pub fn length(&self) -> Result<f64> {
        Ok(self.edge_lengths()?.into_iter().sum())
    }

    pub fn energy(&self) -> Result<f64> {
        Ok(self.edge_energies()?.into_iter().sum())
    }

    pub fn to_file(&self) -> MapFile {
        let alphabet = self.rho.alphabet();
        MapFile {
            representation: self.rho.spec().clone(),
            graph: GraphFile {
                vertices: self.graph.vertex_count(),
                edges: self
                    .graph
                    .edges()
                    .iter()
                    .map(|e| GraphFileEdge {
                        source: e.source,
                        target: e.target,
                        len: e.len,
                        label: alphabet.format(&e.label),
                    })
                    .collect(),
            },
            images: self.images.clone(),
        }
    }

    pub fn from_file(file: MapFile) -> Result<Self> {
        let rho = Representation::from_spec(file.representation)?;
        let graph = file.graph.build(rho.alphabet())?;
        Self::new(Arc::new(graph), Arc::new(rho), file.images)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }
}

/// `{"vertices": n, "edges": [{"source": 0, "target": 0, "len": 1.0, "label": "a"}]}`.
/// Labels use the representation's generator names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<GraphFileEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFileEdge {
    pub source: usize,
    pub target: usize,
    pub len: f64,
    #[serde(default)]
    pub label: String,
}

impl GraphFile {
    pub fn build(&self, alphabet: &crate::groups::Alphabet) -> Result<FundamentalGraph> {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(GraphEdge {
                    source: e.source,
                    target: e.target,
                    len: e.len,
                    label: alphabet.parse(&e.label)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FundamentalGraph::new(self.vertices, edges)
    }
}

/// Map file: representation, fundamental graph and vertex images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub representation: RepresentationSpec,
    pub graph: GraphFile,
    pub images: Vec<Point>,
}

/// The bouquet of `N` unit circles labelled by the generators, with its
/// single vertex sent to `y`. Its length is `Σ_i d(a_i·y, y)`.
pub fn build_bouquet_map(rho: Arc<Representation>, y: Point) -> Result<EquivariantMap> {
    let graph = FundamentalGraph::bouquet(rho.rank())?;
    EquivariantMap::new(Arc::new(graph), rho, vec![y])
}

/// Approximate length density `l_ε(t)/2` of a curve on `[a, b]`, evaluated
/// at the grid points `a + k·step` with `t ± ε` inside the interval.
///
/// The paper's `l_ε = (d(u(t), u(t+ε)) + d(u(t), u(t−ε)))/ε` tends to twice
/// the speed; halving it makes `∫ l = L`.
pub fn approx_length_density<F>(
    space: &Space,
    curve: F,
    a: f64,
    b: f64,
    eps: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<Point>,
{
    if !(b > a) {
        return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    if eps > (b - a) / 2.0 {
        return Err(Error::Domain(format!(
            "eps = {eps} exceeds half the interval length {}",
            (b - a) / 2.0
        )));
    }
    if !(step > 0.0 && step <= eps / 4.0) {
        return Err(Error::Domain(format!("sample step {step} must lie in (0, eps/4]")));
    }
    let n = ((b - a) / step).floor() as usize;
    let mut out = Vec::new();
    for k in 0..=n {
        let t = a + k as f64 * step;
        if t - eps < a - 1e-12 || t + eps > b + 1e-12 {
            continue;
        }
        let here = curve(t)?;
        let fwd = space.dist(&here, &curve((t + eps).min(b))?)?;
        let back = space.dist(&here, &curve((t - eps).max(a))?)?;
        out.push((t, (fwd + back) / (2.0 * eps)));
    }
    Ok(out)
}
