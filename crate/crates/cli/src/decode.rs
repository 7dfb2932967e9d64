//! Byte-level entry points for every parser and decoder, shared by the fuzz
//! targets and the decoder robustness tests. Each accepts arbitrary bytes,
//! must not panic, and discards the result.

use hadamard::conjugacy::{solve, ConjugacyInstance, GroupContext, SearchConfig};
use hadamard::equivariant::EquivariantMap;
use hadamard::groups::{Alphabet, Representation};
use hadamard::spaces::{MetricTree, Point, Space};

use crate::resolve_alphabet;

/// Inputs longer than this are truncated so one case stays fast.
pub const MAX_INPUT: usize = 4096;

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(&data[..data.len().min(MAX_INPUT)]).ok()
}

/// First line: alphabet spec; rest: a comma-separated word list.
pub fn word_list(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let (spec, words) = s.split_once('\n').unwrap_or(("2", s));
    if let Ok(al) = Alphabet::from_spec(spec) {
        if let Ok(list) = al.parse_list(words) {
            for w in &list {
                // formatting must round-trip
                assert_eq!(al.parse(&al.format(w)).ok().as_ref(), Some(w));
            }
        }
    }
}

pub fn tree_json(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(t) = MetricTree::from_json(s) {
        let again = MetricTree::from_file(&t.to_file()).expect("re-encoded tree is valid");
        assert_eq!(again, t);
    }
}

/// A point checked against a Euclidean plane, the hyperbolic plane and the
/// rank-2 Cayley tree.
pub fn point_json(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(p) = serde_json::from_str::<Point>(s) {
        for space in [Space::euclidean(2), Space::Hyperbolic, Space::cayley(2)] {
            if let Ok(q) = space.check_point(&p) {
                let _ = space.dist(&q, &space.base_point());
            }
        }
    }
}

pub fn representation_json(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(rho) = Representation::from_json(s) {
        let _ = rho.act(&hadamard::groups::Word::generator(1), &rho.space().base_point());
    }
}

pub fn map_json(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(u) = EquivariantMap::from_json(s) {
        let _ = u.energy();
        let _ = EquivariantMap::from_file(u.to_file());
    }
}

/// Three lines: alphabet spec, list a, list b. Solved within radius 2.
pub fn conjugacy_lists(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let mut lines = s.splitn(3, '\n');
    let (Some(spec), Some(a), Some(b)) = (lines.next(), lines.next(), lines.next()) else { return };
    let Ok(al) = resolve_alphabet(spec, &[a, b]) else { return };
    let (Ok(a), Ok(b)) = (al.parse_list(a), al.parse_list(b)) else { return };
    let Ok(inst) = ConjugacyInstance::new(al, GroupContext::Free, a, b) else { return };
    let cfg = SearchConfig {
        max_radius: 2,
        budget: 10_000,
        ..Default::default()
    };
    if let Ok(cert) = solve(&inst, &cfg) {
        if let Some(g) = cert.conjugator() {
            assert!(hadamard::conjugacy::verify(g, &inst).unwrap().holds);
        }
    }
}
