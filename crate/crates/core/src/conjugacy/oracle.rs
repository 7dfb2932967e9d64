//! Exact list conjugacy in a free group.
//!
//! Solutions of `g⁻¹ a g = b` form a coset `g₀ · C(b)`, and the centralizer
//! `C(b)` is cyclic, generated by the primitive root `z` of `b`. So one
//! nontrivial pair fixes `g` up to a power of `z`, and the other pairs
//! allow only finitely many powers.

use serde::Serialize;

use super::{certificate, ConjugacyCertificate, ConjugacyInstance, Verdict};
use crate::error::{Error, Result};
use crate::groups::Word;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleAnalysis {
    /// Index of the pair that fixes the coset.
    pub k: usize,
    /// A particular solution of `g⁻¹ a_k g = b_k`.
    pub g0: Word,
    /// Primitive root of `b_k`; solutions for pair `k` are `g0 · z^m`.
    pub z: Word,
    /// Only `|m| ≤ m_max` can satisfy every pair or be shortlex-least.
    pub m_max: u64,
}

/// The coset data for a free-group instance, or `Err(reason)` when a
/// conjugacy invariant already rules it out.
pub fn free_group_analysis(inst: &ConjugacyInstance) -> Result<std::result::Result<OracleAnalysis, String>> {
    if !inst.is_free() {
        return Err(Error::Capability("the exact oracle needs a free-group instance".into()));
    }
    for (i, (a, b)) in inst.a().iter().zip(inst.b()).enumerate() {
        if a.is_identity() != b.is_identity() {
            return Ok(Err(format!("exactly one of a_{i}, b_{i} is trivial")));
        }
    }
    let Some(k) = inst.a().iter().position(|a| !a.is_identity()) else {
        return Ok(Ok(OracleAnalysis {
            k: 0,
            g0: Word::identity(),
            z: Word::identity(),
            m_max: 0,
        }));
    };
    let (p, c) = inst.a()[k].cyclic_decomposition();
    let (q, d) = inst.b()[k].cyclic_decomposition();
    if c.len() != d.len() {
        return Ok(Err(format!("cyclically reduced lengths of a_{k} and b_{k} differ")));
    }
    // d = x⁻¹ c x for the prefix x = c[..j] with d a rotation of c
    let Some(j) = (0..c.len()).find(|&j| c.rotate_left(j) == d) else {
        return Ok(Err(format!("cyclic reductions of a_{k} and b_{k} are not rotations of each other")));
    };
    let x = Word::new(c.letters()[..j].iter().copied())?;
    let g0 = p.multiply(&x).multiply(&q.inverse());
    // work in the frame conjugated by q, where the root r is cyclically reduced
    let (r, _) = d.primitive_root();
    let z = r.conjugate_by(&q.inverse());
    let g1 = g0.multiply(&q);
    let rl = r.len() as f64;
    let mut bound = ((2 * g1.len() + 2 * q.len()) as f64 / rl).ceil();
    for (a, b) in inst.a().iter().zip(inst.b()) {
        let ci = a.conjugate_by(&g1).len();
        let bi = b.conjugate_by(&q).len();
        bound = bound.max(((2 * ci + bi) as f64 / (2.0 * rl)).ceil());
    }
    Ok(Ok(OracleAnalysis {
        k,
        g0,
        z,
        m_max: bound as u64 + 2,
    }))
}

/// Decides a free-group instance exactly: the shortlex-least conjugator
/// among `g0 · z^m`, `|m| ≤ m_max`, or `NotConjugate`.
pub fn free_group_oracle(inst: &ConjugacyInstance) -> Result<ConjugacyCertificate> {
    let analysis = match free_group_analysis(inst)? {
        Ok(a) => a,
        Err(proof) => return certificate(inst, Verdict::NotConjugate { proof }, 0, 0, "oracle"),
    };
    let mut best: Option<Word> = None;
    let mut tried = 0u64;
    // walk g0·z^m outwards in both directions, one multiplication per step
    let z_inv = analysis.z.inverse();
    for (start, step, steps) in [
        (analysis.g0.clone(), &analysis.z, analysis.m_max + 1),
        (analysis.g0.multiply(&z_inv), &z_inv, analysis.m_max),
    ] {
        let mut g = start;
        for _ in 0..steps {
            tried += 1;
            if best.as_ref().is_none_or(|b| g < *b) && inst.conjugates_all(&g)? {
                best = Some(g.clone());
            }
            g = g.multiply(step);
        }
    }
    match best {
        Some(g) => certificate(inst, Verdict::Conjugate { g }, 0, tried, "oracle"),
        None => {
            let proof = format!(
                "no g0·z^m with |m| ≤ {} conjugates every pair (pair {} fixes the coset)",
                analysis.m_max, analysis.k
            );
            certificate(inst, Verdict::NotConjugate { proof }, 0, tried, "oracle")
        }
    }
}
