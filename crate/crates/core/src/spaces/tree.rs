//! Metric trees: finite simplicial trees with positive edge lengths, and the
//! (infinite, unit-edge) Cayley tree of a free group.
//!
//! Both share one generic geometry. A point is either a vertex or an
//! `(edge, offset)` pair with the offset measured from the edge's first end
//! and strictly inside `(0, len)`; offsets at either end canonicalize to the
//! vertex form so equality is testable.

use std::collections::{HashMap, VecDeque};
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::word::{letter_from_rank, Letter, Word};

/// Offsets closer than this to an edge end snap to the vertex.
const SNAP: f64 = 1e-12;

pub trait TreeGeometry {
    type Vertex: Clone + PartialEq + Debug;
    type Edge: Clone + PartialEq + Debug;

    fn ends(&self, e: &Self::Edge) -> (Self::Vertex, Self::Vertex);
    fn edge_length(&self, e: &Self::Edge) -> f64;
    /// Edges on the unique path, in walking order.
    fn vertex_path(&self, from: &Self::Vertex, to: &Self::Vertex) -> Vec<Self::Edge>;
    fn vertex_distance(&self, a: &Self::Vertex, b: &Self::Vertex) -> f64;
    fn incident(&self, v: &Self::Vertex) -> Vec<Self::Edge>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawPosition<V, E>",
    into = "RawPosition<V, E>",
    bound(
        serialize = "V: Serialize + Clone, E: Serialize + Clone",
        deserialize = "V: Deserialize<'de>, E: Deserialize<'de>"
    )
)]
pub enum TreePosition<V, E> {
    Vertex(V),
    OnEdge { edge: E, offset: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPosition<V, E> {
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<V>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<E>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
}

impl<V, E> TryFrom<RawPosition<V, E>> for TreePosition<V, E> {
    type Error = String;

    fn try_from(raw: RawPosition<V, E>) -> std::result::Result<Self, String> {
        match (raw.vertex, raw.edge, raw.offset) {
            (Some(v), None, None) => Ok(TreePosition::Vertex(v)),
            (None, Some(edge), Some(offset)) => Ok(TreePosition::OnEdge { edge, offset }),
            _ => Err("tree point needs either `vertex` or both `edge` and `offset`".into()),
        }
    }
}

impl<V, E> From<TreePosition<V, E>> for RawPosition<V, E> {
    fn from(p: TreePosition<V, E>) -> Self {
        match p {
            TreePosition::Vertex(v) => RawPosition {
                vertex: Some(v),
                edge: None,
                offset: None,
            },
            TreePosition::OnEdge { edge, offset } => RawPosition {
                vertex: None,
                edge: Some(edge),
                offset: Some(offset),
            },
        }
    }
}

pub type Position<G> = TreePosition<<G as TreeGeometry>::Vertex, <G as TreeGeometry>::Edge>;

pub fn canonical<G: TreeGeometry>(geo: &G, edge: G::Edge, offset: f64) -> Position<G> {
    let len = geo.edge_length(&edge);
    if offset <= SNAP {
        TreePosition::Vertex(geo.ends(&edge).0)
    } else if offset >= len - SNAP {
        TreePosition::Vertex(geo.ends(&edge).1)
    } else {
        TreePosition::OnEdge { edge, offset }
    }
}

/// The point at distance `t` from vertex `v` along incident edge `e`.
pub fn along<G: TreeGeometry>(geo: &G, v: &G::Vertex, e: &G::Edge, t: f64) -> Position<G> {
    let len = geo.edge_length(e);
    if geo.ends(e).0 == *v {
        canonical(geo, e.clone(), t)
    } else {
        canonical(geo, e.clone(), len - t)
    }
}

/// Vertices a geodesic from `p` may leave through, with the distance to each.
fn anchors<G: TreeGeometry>(geo: &G, p: &Position<G>) -> Vec<(G::Vertex, f64)> {
    match p {
        TreePosition::Vertex(v) => vec![(v.clone(), 0.0)],
        TreePosition::OnEdge { edge, offset } => {
            let (a, b) = geo.ends(edge);
            vec![(a, *offset), (b, geo.edge_length(edge) - offset)]
        }
    }
}

fn best_route<G: TreeGeometry>(
    geo: &G,
    x: &Position<G>,
    y: &Position<G>,
) -> (f64, G::Vertex, G::Vertex) {
    let mut best: Option<(f64, G::Vertex, G::Vertex)> = None;
    for (a, da) in anchors(geo, x) {
        for (b, db) in anchors(geo, y) {
            let d = da + geo.vertex_distance(&a, &b) + db;
            if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                best = Some((d, a.clone(), b));
            }
        }
    }
    best.expect("every position has an anchor")
}

pub fn dist<G: TreeGeometry>(geo: &G, x: &Position<G>, y: &Position<G>) -> f64 {
    if let (
        TreePosition::OnEdge { edge: e1, offset: o1 },
        TreePosition::OnEdge { edge: e2, offset: o2 },
    ) = (x, y)
    {
        if e1 == e2 {
            return (o1 - o2).abs();
        }
    }
    best_route(geo, x, y).0
}

/// Walks the unique geodesic from `x` to `y` and stops at fraction `t`.
pub fn geodesic_point<G: TreeGeometry>(
    geo: &G,
    x: &Position<G>,
    y: &Position<G>,
    t: f64,
) -> Position<G> {
    if t == 0.0 {
        return x.clone();
    }
    if t == 1.0 {
        return y.clone();
    }
    if let (
        TreePosition::OnEdge { edge: e1, offset: o1 },
        TreePosition::OnEdge { edge: e2, offset: o2 },
    ) = (x, y)
    {
        if e1 == e2 {
            return canonical(geo, e1.clone(), o1 + t * (o2 - o1));
        }
    }
    let (total, ax, ay) = best_route(geo, x, y);
    // legs in edge coordinates: (edge, start offset, end offset)
    let mut legs: Vec<(G::Edge, f64, f64)> = Vec::new();
    if let TreePosition::OnEdge { edge, offset } = x {
        let end = if geo.ends(edge).0 == ax { 0.0 } else { geo.edge_length(edge) };
        legs.push((edge.clone(), *offset, end));
    }
    let mut cur = ax.clone();
    for e in geo.vertex_path(&ax, &ay) {
        let (a, b) = geo.ends(&e);
        let len = geo.edge_length(&e);
        if a == cur {
            legs.push((e, 0.0, len));
            cur = b;
        } else {
            legs.push((e, len, 0.0));
            cur = a;
        }
    }
    if let TreePosition::OnEdge { edge, offset } = y {
        let start = if geo.ends(edge).0 == ay { 0.0 } else { geo.edge_length(edge) };
        legs.push((edge.clone(), start, *offset));
    }
    let target = t * total;
    let mut acc = 0.0;
    for (e, s, f) in legs {
        let len = (f - s).abs();
        if len > 0.0 && acc + len >= target {
            let frac = (target - acc) / len;
            return canonical(geo, e, s + (f - s) * frac);
        }
        acc += len;
    }
    y.clone()
}

// ---------------------------------------------------------------------------
// Finite metric trees

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub len: f64,
}

#[derive(Clone, Debug)]
pub struct MetricTree {
    ids: Vec<String>,
    edges: Vec<TreeEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    root_dist: Vec<f64>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl PartialEq for MetricTree {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.edges == other.edges
    }
}

/// On-disk tree description:
/// `{"vertices": [ids], "edges": [{"a": id, "b": id, "len": float}]}`.
/// Ids may be strings or integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub vertices: Vec<serde_json::Value>,
    pub edges: Vec<TreeFileEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFileEdge {
    pub a: serde_json::Value,
    pub b: serde_json::Value,
    pub len: f64,
}

pub(crate) fn id_string(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::InvalidTree(format!(
            "vertex id must be a string or number, got {other}"
        ))),
    }
}

impl MetricTree {
    /// Validates connectivity, acyclicity and edge lengths.
    pub fn new(ids: Vec<String>, edges: Vec<TreeEdge>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::InvalidTree("tree has no vertices".into()));
        }
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(Error::InvalidTree(format!("duplicate vertex id {id:?}")));
            }
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} vertices need exactly {} edges, found {}",
                n,
                n - 1,
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_index = HashMap::new();
        for (k, e) in edges.iter().enumerate() {
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidTree(format!("edge {k} references a missing vertex")));
            }
            if e.a == e.b {
                return Err(Error::InvalidTree(format!("edge {k} is a loop")));
            }
            if !(e.len.is_finite() && e.len > 0.0) {
                return Err(Error::InvalidTree(format!(
                    "edge {k} has non-positive length {}",
                    e.len
                )));
            }
            if edge_index.insert((e.a.min(e.b), e.a.max(e.b)), k).is_some() {
                return Err(Error::InvalidTree(format!("edge {k} duplicates another edge")));
            }
            adjacency[e.a].push((e.b, k));
            adjacency[e.b].push((e.a, k));
        }
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut root_dist = vec![0.0; n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &(w, k) in &adjacency[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some((v, k));
                    root_dist[w] = root_dist[v] + edges[k].len;
                    queue.push_back(w);
                }
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(Error::InvalidTree("tree is not connected".into()));
        }
        Ok(Self {
            ids,
            edges,
            adjacency,
            parent,
            depth,
            root_dist,
            edge_index,
        })
    }

    pub fn from_file(file: &TreeFile) -> Result<Self> {
        let ids = file
            .vertices
            .iter()
            .map(id_string)
            .collect::<Result<Vec<_>>>()?;
        let lookup = |v: &serde_json::Value| -> Result<usize> {
            let s = id_string(v)?;
            ids.iter()
                .position(|x| *x == s)
                .ok_or_else(|| Error::InvalidTree(format!("unknown vertex id {s:?}")))
        };
        let edges = file
            .edges
            .iter()
            .map(|e| {
                Ok(TreeEdge {
                    a: lookup(&e.a)?,
                    b: lookup(&e.b)?,
                    len: e.len,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ids, edges)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: TreeFile = serde_json::from_str(s)?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> TreeFile {
        TreeFile {
            vertices: self.ids.iter().cloned().map(serde_json::Value::String).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| TreeFileEdge {
                    a: serde_json::Value::String(self.ids[e.a].clone()),
                    b: serde_json::Value::String(self.ids[e.b].clone()),
                    len: e.len,
                })
                .collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vertex_by_id(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.len).sum()
    }

    pub fn check_point(&self, p: &TreePoint) -> Result<TreePoint> {
        match p {
            TreePosition::Vertex(v) if *v < self.vertex_count() => Ok(p.clone()),
            TreePosition::Vertex(v) => Err(Error::InvalidPoint(format!("unknown tree vertex {v}"))),
            TreePosition::OnEdge { edge, offset } => {
                let e = self
                    .edges
                    .get(*edge)
                    .ok_or_else(|| Error::InvalidPoint(format!("unknown tree edge {edge}")))?;
                if !(offset.is_finite() && *offset >= 0.0 && *offset <= e.len) {
                    return Err(Error::InvalidPoint(format!(
                        "offset {offset} outside [0, {}] on edge {edge}",
                        e.len
                    )));
                }
                Ok(canonical(self, *edge, *offset))
            }
        }
    }
}

impl TreeGeometry for MetricTree {
    type Vertex = usize;
    type Edge = usize;

    fn ends(&self, e: &usize) -> (usize, usize) {
        (self.edges[*e].a, self.edges[*e].b)
    }

    fn edge_length(&self, e: &usize) -> f64 {
        self.edges[*e].len
    }

    fn vertex_path(&self, from: &usize, to: &usize) -> Vec<usize> {
        let (mut a, mut b) = (*from, *to);
        let mut left = Vec::new();
        let mut right = Vec::new();
        while self.depth[a] > self.depth[b] {
            let (p, e) = self.parent[a].unwrap();
            left.push(e);
            a = p;
        }
        while self.depth[b] > self.depth[a] {
            let (p, e) = self.parent[b].unwrap();
            right.push(e);
            b = p;
        }
        while a != b {
            let (pa, ea) = self.parent[a].unwrap();
            let (pb, eb) = self.parent[b].unwrap();
            left.push(ea);
            right.push(eb);
            a = pa;
            b = pb;
        }
        left.extend(right.into_iter().rev());
        left
    }

    fn vertex_distance(&self, a: &usize, b: &usize) -> f64 {
        let (mut x, mut y) = (*a, *b);
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].unwrap().0;
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].unwrap().0;
        }
        while x != y {
            x = self.parent[x].unwrap().0;
            y = self.parent[y].unwrap().0;
        }
        self.root_dist[*a] + self.root_dist[*b] - 2.0 * self.root_dist[x]
    }

    fn incident(&self, v: &usize) -> Vec<usize> {
        self.adjacency[*v].iter().map(|&(_, e)| e).collect()
    }
}

pub type TreePoint = TreePosition<usize, usize>;

// ---------------------------------------------------------------------------
// Cayley tree of the free group

/// The Cayley graph of the free group of the given rank with respect to its
/// free basis: a `2·rank`-regular tree with unit edges. Vertices are reduced
/// words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CayleyTree {
    pub rank: u32,
}

/// The edge `{parent, parent·letter}` with `|parent·letter| = |parent| + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CayleyEdge {
    pub parent: Word,
    #[serde(with = "letter_serde")]
    pub letter: Letter,
}

mod letter_serde {
    use super::{Letter, Word};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(l: &Letter, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&Word::new([*l]).map_err(serde::ser::Error::custom)?.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Letter, D::Error> {
        let w = Word::deserialize(d)?;
        match w.letters() {
            [l] => Ok(*l),
            _ => Err(serde::de::Error::custom("expected a single letter")),
        }
    }
}

impl CayleyEdge {
    /// The canonical name of the edge joining `v` and `v·letter`.
    pub fn between(v: &Word, letter: Letter) -> Self {
        if v.last() == Some(-letter) {
            let mut parent = v.letters().to_vec();
            parent.pop();
            CayleyEdge {
                parent: Word::from_reduced(parent),
                letter: -letter,
            }
        } else {
            CayleyEdge {
                parent: v.clone(),
                letter,
            }
        }
    }

    pub fn child(&self) -> Word {
        let mut v = self.parent.letters().to_vec();
        v.push(self.letter);
        Word::from_reduced(v)
    }
}

pub type CayleyPoint = TreePosition<Word, CayleyEdge>;

impl CayleyTree {
    pub fn check_point(&self, p: &CayleyPoint) -> Result<CayleyPoint> {
        let check_word = |w: &Word| {
            if w.max_generator() > self.rank {
                Err(Error::InvalidPoint(format!(
                    "word {w} uses generators beyond rank {}",
                    self.rank
                )))
            } else {
                Ok(())
            }
        };
        match p {
            TreePosition::Vertex(w) => {
                check_word(w)?;
                Ok(p.clone())
            }
            TreePosition::OnEdge { edge, offset } => {
                check_word(&edge.parent)?;
                if edge.letter == 0 || edge.letter.unsigned_abs() > self.rank {
                    return Err(Error::InvalidPoint("edge letter outside the alphabet".into()));
                }
                if edge.parent.last() == Some(-edge.letter) {
                    return Err(Error::InvalidPoint(
                        "edge must point away from the identity".into(),
                    ));
                }
                if !(offset.is_finite() && (0.0..=1.0).contains(offset)) {
                    return Err(Error::InvalidPoint(format!("offset {offset} outside [0, 1]")));
                }
                Ok(canonical(self, edge.clone(), *offset))
            }
        }
    }

    /// Left translation by `g`.
    pub fn translate(&self, g: &Word, p: &CayleyPoint) -> CayleyPoint {
        match p {
            TreePosition::Vertex(v) => TreePosition::Vertex(g.multiply(v)),
            TreePosition::OnEdge { edge, offset } => {
                let start = g.multiply(&edge.parent);
                let e = CayleyEdge::between(&start, edge.letter);
                if e.parent == start {
                    TreePosition::OnEdge { edge: e, offset: *offset }
                } else {
                    TreePosition::OnEdge {
                        edge: e,
                        offset: 1.0 - offset,
                    }
                }
            }
        }
    }
}

impl TreeGeometry for CayleyTree {
    type Vertex = Word;
    type Edge = CayleyEdge;

    fn ends(&self, e: &CayleyEdge) -> (Word, Word) {
        (e.parent.clone(), e.child())
    }

    fn edge_length(&self, _e: &CayleyEdge) -> f64 {
        1.0
    }

    fn vertex_path(&self, from: &Word, to: &Word) -> Vec<CayleyEdge> {
        let step = from.inverse().multiply(to);
        let mut cur = from.clone();
        let mut out = Vec::with_capacity(step.len());
        for &l in step.letters() {
            let e = CayleyEdge::between(&cur, l);
            cur = cur.multiply(&Word::from_reduced(vec![l]));
            out.push(e);
        }
        out
    }

    fn vertex_distance(&self, a: &Word, b: &Word) -> f64 {
        let lcp = a
            .letters()
            .iter()
            .zip(b.letters())
            .take_while(|(x, y)| x == y)
            .count();
        (a.len() + b.len() - 2 * lcp) as f64
    }

    fn incident(&self, v: &Word) -> Vec<CayleyEdge> {
        (0..2 * self.rank)
            .map(|r| CayleyEdge::between(v, letter_from_rank(r)))
            .collect()
    }
}
