//! Representations `ρ: Γ → Isom(Y)` of free groups, given by the images of
//! the generators, and the orbit pseudo-metric `d_y(g, h) = d(g·y, h·y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::isometry::{validate, Isometry};
use crate::groups::word::{Alphabet, Word};
use crate::spaces::tree::{id_string, TreeFile};
use crate::spaces::{CayleyTree, MetricTree, Point, Space};

/// Samples used to confirm each generator preserves distance.
pub const ISOMETRY_SAMPLES: usize = 1000;
const ISOMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepKind {
    #[serde(rename = "free-on-cayley-tree")]
    FreeOnCayleyTree,
    #[serde(rename = "matrix-on-H2")]
    MatrixOnH2,
    #[serde(rename = "tree-automorphisms")]
    TreeAutomorphisms,
    #[serde(rename = "euclidean")]
    Euclidean,
}

impl fmt::Display for RepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepKind::FreeOnCayleyTree => "free-on-cayley-tree",
            RepKind::MatrixOnH2 => "matrix-on-H2",
            RepKind::TreeAutomorphisms => "tree-automorphisms",
            RepKind::Euclidean => "euclidean",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclideanGenerator {
    /// Rows of the orthogonal linear part.
    pub linear: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

/// On-disk representation description. Generator names are single lowercase
/// letters; their sorted order fixes the alphabet.
///
/// ```json
/// {"kind": "matrix-on-H2", "generators": {"a": [[2, 1], [1, 1]], "b": [[1, 1], [1, 2]]}}
/// {"kind": "free-on-cayley-tree", "rank": 2}
/// {"kind": "tree-automorphisms", "tree": {...}, "generators": {"a": ["v2", "v1", "v0"]}}
/// {"kind": "euclidean", "dim": 2, "generators": {"a": {"linear": [[1, 0], [0, 1]], "translation": [1, 0]}}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum RepresentationSpec {
    /// Left translation on the Cayley tree. Without `generators` the free
    /// group acts on its own Cayley tree; otherwise each generator maps to
    /// the given word of the rank-`rank` free group.
    #[serde(rename = "free-on-cayley-tree")]
    FreeOnCayleyTree {
        rank: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<BTreeMap<String, Word>>,
    },
    #[serde(rename = "matrix-on-H2")]
    MatrixOnH2 {
        generators: BTreeMap<String, [[f64; 2]; 2]>,
    },
    /// Each generator lists the image id of every vertex, in vertex order.
    #[serde(rename = "tree-automorphisms")]
    TreeAutomorphisms {
        tree: TreeFile,
        generators: BTreeMap<String, Vec<serde_json::Value>>,
    },
    #[serde(rename = "euclidean")]
    Euclidean {
        dim: usize,
        generators: BTreeMap<String, EuclideanGenerator>,
    },
}

#[derive(Clone, Debug)]
pub struct Representation {
    kind: RepKind,
    space: Space,
    alphabet: Alphabet,
    generators: Vec<Isometry>,
    inverses: Vec<Isometry>,
    spec: RepresentationSpec,
}

impl PartialEq for Representation {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn alphabet_from_keys<'a>(keys: impl Iterator<Item = &'a String>) -> Result<Alphabet> {
    let mut names = String::new();
    for k in keys {
        let mut chars = k.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_lowercase() => names.push(c),
            _ => {
                return Err(Error::InvalidRepresentation(format!(
                    "generator name {k:?} must be a single lowercase letter"
                )))
            }
        }
    }
    if names.is_empty() {
        return Err(Error::InvalidRepresentation("no generators".into()));
    }
    Alphabet::named(&names).map_err(|e| Error::InvalidRepresentation(e.to_string()))
}

impl Representation {
    pub fn from_spec(spec: RepresentationSpec) -> Result<Self> {
        let (kind, space, alphabet, generators) = match &spec {
            RepresentationSpec::FreeOnCayleyTree { rank, generators } => {
                if *rank == 0 || *rank > 26 {
                    return Err(Error::InvalidRepresentation(format!("rank {rank} out of range")));
                }
                let (alphabet, gens) = match generators {
                    None => (
                        Alphabet::standard(*rank),
                        (1..=*rank).map(|k| Isometry::Cayley(Word::generator(k))).collect(),
                    ),
                    Some(map) => (
                        alphabet_from_keys(map.keys())?,
                        map.values().map(|w| Isometry::Cayley(w.clone())).collect(),
                    ),
                };
                (RepKind::FreeOnCayleyTree, Space::cayley(*rank), alphabet, gens)
            }
            RepresentationSpec::MatrixOnH2 { generators } => (
                RepKind::MatrixOnH2,
                Space::Hyperbolic,
                alphabet_from_keys(generators.keys())?,
                generators.values().map(|m| Isometry::Hyperbolic(*m)).collect(),
            ),
            RepresentationSpec::TreeAutomorphisms { tree, generators } => {
                let t = MetricTree::from_file(tree)?;
                let mut gens = Vec::new();
                for (name, images) in generators {
                    let perm = images
                        .iter()
                        .map(|v| {
                            let id = id_string(v)?;
                            t.vertex_by_id(&id).ok_or_else(|| {
                                Error::InvalidRepresentation(format!(
                                    "generator {name}: unknown vertex {id:?}"
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    gens.push(Isometry::Tree(perm));
                }
                (
                    RepKind::TreeAutomorphisms,
                    Space::tree(t),
                    alphabet_from_keys(generators.keys())?,
                    gens,
                )
            }
            RepresentationSpec::Euclidean { dim, generators } => {
                if *dim == 0 {
                    return Err(Error::InvalidRepresentation("dimension must be positive".into()));
                }
                let mut gens = Vec::new();
                for (name, g) in generators {
                    if g.linear.len() != *dim || g.linear.iter().any(|r| r.len() != *dim) {
                        return Err(Error::InvalidRepresentation(format!(
                            "generator {name}: linear part must be {dim}×{dim}"
                        )));
                    }
                    let flat: Vec<f64> = g.linear.iter().flatten().copied().collect();
                    gens.push(Isometry::Euclidean {
                        linear: DMatrix::from_row_slice(*dim, *dim, &flat),
                        translation: DVector::from_vec(g.translation.clone()),
                    });
                }
                (
                    RepKind::Euclidean,
                    Space::euclidean(*dim),
                    alphabet_from_keys(generators.keys())?,
                    gens,
                )
            }
        };
        for (i, g) in generators.iter().enumerate() {
            validate(&space, g).map_err(|e| {
                Error::InvalidRepresentation(format!("generator {}: {e}", alphabet_name(&alphabet, i)))
            })?;
        }
        let inverses = generators.iter().map(Isometry::inverse).collect();
        let rep = Self {
            kind,
            space,
            alphabet,
            generators,
            inverses,
            spec,
        };
        rep.check_isometries()?;
        Ok(rep)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(s)?)
    }

    /// The free group of the given rank acting on its own Cayley tree.
    pub fn free_on_cayley_tree(rank: u32) -> Result<Self> {
        Self::from_spec(RepresentationSpec::FreeOnCayleyTree {
            rank,
            generators: None,
        })
    }

    /// Matrices named `a, b, c, ...` in order.
    pub fn matrices(mats: &[[[f64; 2]; 2]]) -> Result<Self> {
        let generators = mats
            .iter()
            .enumerate()
            .map(|(i, m)| (((b'a' + i as u8) as char).to_string(), *m))
            .collect();
        Self::from_spec(RepresentationSpec::MatrixOnH2 { generators })
    }

    /// Distance preservation on [`ISOMETRY_SAMPLES`] seeded point pairs.
    fn check_isometries(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x150_3e7);
        for (i, g) in self.generators.iter().enumerate() {
            for _ in 0..ISOMETRY_SAMPLES {
                let p = self.space.random_point(&mut rng, 1.0);
                let q = self.space.random_point(&mut rng, 1.0);
                let d = self.space.dist(&p, &q)?;
                let gd = self.space.dist(&g.apply(&self.space, &p)?, &g.apply(&self.space, &q)?)?;
                if (gd - d).abs() > ISOMETRY_TOLERANCE * (1.0 + d) {
                    return Err(Error::InvalidRepresentation(format!(
                        "generator {} changes a distance {d} to {gd}",
                        alphabet_name(&self.alphabet, i)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> u32 {
        self.alphabet.rank()
    }

    pub fn spec(&self) -> &RepresentationSpec {
        &self.spec
    }

    pub fn generator_images(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn identity(&self) -> Isometry {
        Isometry::identity(&self.space)
    }

    /// `ρ(g)`, composed left to right so that `ρ(gh) = ρ(g) ∘ ρ(h)`.
    pub fn evaluate(&self, g: &Word) -> Result<Isometry> {
        self.alphabet.check(g)?;
        let mut acc = self.identity();
        for &l in g.letters() {
            let k = (l.unsigned_abs() - 1) as usize;
            let s = if l > 0 { &self.generators[k] } else { &self.inverses[k] };
            acc = acc.compose(s)?;
        }
        Ok(acc)
    }

    pub fn act(&self, g: &Word, p: &Point) -> Result<Point> {
        self.evaluate(g)?.apply(&self.space, p)
    }

    /// Whether `ρ(g) = ρ(h)` (exact for free groups; see
    /// [`Isometry::same_as`] for matrices).
    pub fn same_element(&self, g: &Word, h: &Word) -> Result<bool> {
        if self.kind == RepKind::FreeOnCayleyTree {
            if let Isometry::Cayley(a) = self.evaluate(g)? {
                if let Isometry::Cayley(b) = self.evaluate(h)? {
                    return Ok(a == b);
                }
            }
        }
        Ok(self.evaluate(g)?.same_as(&self.evaluate(h)?))
    }
}

fn alphabet_name(alphabet: &Alphabet, i: usize) -> char {
    alphabet.names().chars().nth(i).unwrap_or('?')
}

/// `d(ρ(g)·y, ρ(h)·y)`.
pub fn orbit_distance(rho: &Representation, y: &Point, g: &Word, h: &Word) -> Result<f64> {
    let space = rho.space();
    space.dist(&rho.act(g, y)?, &rho.act(h, y)?)
}

/// Convenience alias used where representations are shared between maps.
pub type SharedRepresentation = Arc<Representation>;

/// The Cayley tree a free-group representation acts on, if any.
pub fn cayley_target(rho: &Representation) -> Option<CayleyTree> {
    match rho.space() {
        Space::Cayley(c) => Some(*c),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::word::enumerate_ball;
    use crate::spaces::HyperbolicPoint;
    use rand::Rng;

    fn diag_e() -> Representation {
        let e = 1f64.exp();
        Representation::matrices(&[[[e, 0.0], [0.0, 1.0 / e]]]).unwrap()
    }

    #[test]
    fn evaluate_identity_and_cancellation() {
        let rho = Representation::matrices(&[[[2.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]]]).unwrap();
        assert!(rho.evaluate(&Word::identity()).unwrap().same_as(&rho.identity()));
        let w = rho.alphabet().parse("aAb").unwrap();
        assert_eq!(rho.evaluate(&w).unwrap(), Isometry::Hyperbolic([[1.0, 1.0], [1.0, 2.0]]));
        let w3 = Word::generator(3);
        assert!(matches!(rho.evaluate(&w3), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn homomorphism_on_sample_points() {
        let rho = Representation::matrices(&[[[2.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let words: Vec<Word> = enumerate_ball(2, 2).collect();
        for _ in 0..20 {
            let g = &words[rng.random_range(0..words.len())];
            let h = &words[rng.random_range(0..words.len())];
            let gh = rho.evaluate(&g.multiply(h)).unwrap();
            for _ in 0..100 {
                let p = rho.space().random_point(&mut rng, 0.5);
                let direct = gh.apply(rho.space(), &p).unwrap();
                let composed = rho.act(g, &rho.act(h, &p).unwrap()).unwrap();
                let d = rho.space().dist(&direct, &composed).unwrap();
                assert!(d < 1e-9, "{g} {h}: {d}");
            }
        }
    }

    #[test]
    fn orbit_distance_examples() {
        let rho = diag_e();
        let y = Point::Hyperbolic(HyperbolicPoint::origin());
        let a = Word::generator(1);
        assert!((orbit_distance(&rho, &y, &a, &Word::identity()).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(orbit_distance(&rho, &y, &a, &a).unwrap(), 0.0);

        let free = Representation::free_on_cayley_tree(2).unwrap();
        let base = free.space().base_point();
        for g in enumerate_ball(2, 4) {
            let d = orbit_distance(&free, &base, &g, &Word::identity()).unwrap();
            assert_eq!(d, g.word_length() as f64);
        }
    }

    #[test]
    fn spec_json_forms() {
        let rho = Representation::from_json(
            r#"{"kind": "matrix-on-H2", "generators": {"x": [[2, 1], [1, 1]], "y": [[1, 1], [1, 2]]}}"#,
        )
        .unwrap();
        assert_eq!(rho.alphabet().names(), "xy");
        assert_eq!(rho.kind(), RepKind::MatrixOnH2);

        let bad = Representation::from_json(r#"{"kind": "matrix-on-H2", "generators": {"a": [[2, 0], [0, 1]]}}"#);
        assert!(matches!(bad, Err(Error::InvalidRepresentation(_))));

        let tree = r#"{"kind": "tree-automorphisms",
            "tree": {"vertices": ["l", "c", "r"], "edges": [{"a": "l", "b": "c", "len": 1}, {"a": "c", "b": "r", "len": 1}]},
            "generators": {"a": ["r", "c", "l"]}}"#;
        let rho = Representation::from_json(tree).unwrap();
        let p = Point::Tree(crate::spaces::TreePosition::OnEdge { edge: 0, offset: 0.25 });
        let q = rho.act(&Word::generator(1), &p).unwrap();
        assert_eq!(q, Point::Tree(crate::spaces::TreePosition::OnEdge { edge: 1, offset: 0.75 }));

        let uneven = r#"{"kind": "tree-automorphisms",
            "tree": {"vertices": ["l", "c", "r"], "edges": [{"a": "l", "b": "c", "len": 1}, {"a": "c", "b": "r", "len": 2}]},
            "generators": {"a": ["r", "c", "l"]}}"#;
        assert!(Representation::from_json(uneven).is_err());

        let free = Representation::from_json(
            r#"{"kind": "free-on-cayley-tree", "rank": 2, "generators": {"a": "ab", "b": "bA"}}"#,
        )
        .unwrap();
        let y = free.space().base_point();
        let d = orbit_distance(&free, &y, &Word::generator(1), &Word::identity()).unwrap();
        assert_eq!(d, 2.0);
    }
}
