//! Simultaneous conjugacy of finite lists: find `g` with `b_i = g⁻¹ a_i g`
//! for every `i`, by shortlex search over a ball whose radius is linear in
//! `Σ(|a_i| + |b_i|)`.
//!
//! Free groups also have an exact oracle (cyclic words and centralizers), so
//! only there can "not conjugate" be certified outright.

mod oracle;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::word::{ball_size, letter_from_rank, shortlex_cmp, ShortlexBall};
use crate::groups::{orbit_distance, Alphabet, Representation, Word};
use crate::spaces::Point;

pub use oracle::{free_group_analysis, free_group_oracle, OracleAnalysis};

/// How conjugacy of the group elements themselves is decided.
#[derive(Clone, Debug)]
pub enum GroupContext {
    /// The free group on the alphabet: free reduction is exact.
    Free,
    /// The image of a representation; equality of isometries decides.
    Image(Arc<Representation>),
}

#[derive(Clone, Debug)]
pub struct ConjugacyInstance {
    alphabet: Alphabet,
    context: GroupContext,
    a: Vec<Word>,
    b: Vec<Word>,
}

impl ConjugacyInstance {
    pub fn new(alphabet: Alphabet, context: GroupContext, a: Vec<Word>, b: Vec<Word>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::Config(format!(
                "lists must be non-empty and of equal length (got {} and {})",
                a.len(),
                b.len()
            )));
        }
        for w in a.iter().chain(&b) {
            alphabet.check(w)?;
        }
        if let GroupContext::Image(rho) = &context {
            if rho.rank() != alphabet.rank() {
                return Err(Error::AlphabetMismatch {
                    left: alphabet.rank(),
                    right: rho.rank(),
                });
            }
        }
        Ok(Self { alphabet, context, a, b })
    }

    /// Free-group instance over the standard alphabet of the given rank.
    pub fn free(rank: u32, a: Vec<Word>, b: Vec<Word>) -> Result<Self> {
        Self::new(Alphabet::standard(rank), GroupContext::Free, a, b)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn context(&self) -> &GroupContext {
        &self.context
    }

    pub fn a(&self) -> &[Word] {
        &self.a
    }

    pub fn b(&self) -> &[Word] {
        &self.b
    }

    pub fn is_free(&self) -> bool {
        matches!(self.context, GroupContext::Free)
    }

    /// `Σ_i (|a_i| + |b_i|)`.
    pub fn word_sum(&self) -> usize {
        self.a.iter().chain(&self.b).map(Word::word_length).sum()
    }

    fn equal(&self, x: &Word, y: &Word) -> Result<bool> {
        match &self.context {
            GroupContext::Free => Ok(x == y),
            GroupContext::Image(rho) => rho.same_element(x, y),
        }
    }

    fn conjugates_all(&self, g: &Word) -> Result<bool> {
        let gi = g.inverse();
        for (a, b) in self.a.iter().zip(&self.b) {
            if !self.equal(&gi.multiply(a).multiply(g), b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub index: usize,
    /// Reduced `g⁻¹ a_i g`.
    pub conjugate: String,
    pub expected: String,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub holds: bool,
    pub transcript: Vec<TranscriptEntry>,
}

/// Checks `g⁻¹ a_i g = b_i` for every `i` and records each reduced conjugate.
pub fn verify(g: &Word, inst: &ConjugacyInstance) -> Result<Verification> {
    inst.alphabet.check(g)?;
    let gi = g.inverse();
    let mut transcript = Vec::with_capacity(inst.a.len());
    for (i, (a, b)) in inst.a.iter().zip(&inst.b).enumerate() {
        let c = gi.multiply(a).multiply(g);
        transcript.push(TranscriptEntry {
            index: i,
            conjugate: inst.alphabet.format(&c),
            expected: inst.alphabet.format(b),
            equal: inst.equal(&c, b)?,
        });
    }
    Ok(Verification {
        holds: transcript.iter().all(|t| t.equal),
        transcript,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum RadiusPolicy {
    /// Radii 0, 1, 2, 4, 8, … up to the maximum.
    Incremental,
    /// `⌈C⋆·Σ(|a_i| + |b_i|) + C⌉` with user-supplied constants.
    Bound { cstar: Option<f64>, c: Option<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub policy: RadiusPolicy,
    pub max_radius: u32,
    /// Maximum number of candidates enumerated.
    pub budget: u64,
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            policy: RadiusPolicy::Incremental,
            max_radius: 10,
            budget: 100_000_000,
            threads: 1,
        }
    }
}

/// The radius the search will reach: the linear bound capped at
/// `max_radius`, or `max_radius` itself under the incremental policy.
pub fn search_radius(inst: &ConjugacyInstance, cfg: &SearchConfig) -> Result<u32> {
    match cfg.policy {
        RadiusPolicy::Incremental => Ok(cfg.max_radius),
        RadiusPolicy::Bound { cstar, c } => {
            let (Some(cstar), Some(c)) = (cstar, c) else {
                return Err(Error::Config("policy `bound` needs both --cstar and --c".into()));
            };
            if !(cstar.is_finite() && c.is_finite()) || cstar < 0.0 {
                return Err(Error::Config(format!("invalid constants C⋆ = {cstar}, C = {c}")));
            }
            let r = (cstar * inst.word_sum() as f64 + c).ceil().max(0.0);
            Ok((r as u32).min(cfg.max_radius))
        }
    }
}

/// Next radius of the doubling schedule `0, 1, 2, 4, …`, capped at `max`.
pub fn next_radius(previous: Option<u32>, max: u32) -> Option<u32> {
    match previous {
        None => Some(0),
        Some(r) if r >= max => None,
        Some(0) => Some(1.min(max)),
        Some(r) => Some(r.saturating_mul(2).min(max)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Conjugate { g: Word },
    NotConjugateUpTo { radius: u32 },
    NotConjugate { proof: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchStats {
    pub enumerated: u64,
    /// Wall-clock time, filled in by callers that measure it.
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyCertificate {
    pub verdict: Verdict,
    pub radius_searched: u32,
    pub transcript: Vec<TranscriptEntry>,
    pub stats: SearchStats,
    /// `"search"` for the shortlex scan, `"oracle"` for the free-group oracle.
    pub source: &'static str,
}

/// Certificate in its published JSON form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    pub verdict: &'static str,
    pub g: Option<String>,
    pub proof: Option<String>,
    pub radius_searched: u32,
    pub source: &'static str,
    pub transcript: Vec<TranscriptEntry>,
    pub stats: SearchStats,
}

impl ConjugacyCertificate {
    pub fn conjugator(&self) -> Option<&Word> {
        match &self.verdict {
            Verdict::Conjugate { g } => Some(g),
            _ => None,
        }
    }

    pub fn verdict_name(&self) -> &'static str {
        match self.verdict {
            Verdict::Conjugate { .. } => "Conjugate",
            Verdict::NotConjugateUpTo { .. } => "NotConjugateUpTo",
            Verdict::NotConjugate { .. } => "NotConjugate",
        }
    }

    pub fn report(&self, alphabet: &Alphabet) -> CertificateReport {
        CertificateReport {
            verdict: self.verdict_name(),
            g: self.conjugator().map(|g| alphabet.format(g)),
            proof: match &self.verdict {
                Verdict::NotConjugate { proof } => Some(proof.clone()),
                _ => None,
            },
            radius_searched: self.radius_searched,
            source: self.source,
            transcript: self.transcript.clone(),
            stats: self.stats,
        }
    }
}

/// Shortlex-least verifier among the words of exactly `len` letters, and
/// the number of candidates examined.
fn scan_layer(inst: &ConjugacyInstance, len: u32, threads: usize) -> Result<(Option<Word>, u64)> {
    let rank = inst.alphabet.rank();
    if len == 0 {
        let e = Word::identity();
        return Ok((inst.conjugates_all(&e)?.then_some(e), 1));
    }
    // one partition per first letter; each is itself in shortlex order
    let scan_prefix = |r: u32| -> Result<(Option<Word>, u64)> {
        let mut count = 0;
        for g in ShortlexBall::layer_with_prefix(rank, len, letter_from_rank(r)) {
            count += 1;
            if inst.conjugates_all(&g)? {
                return Ok((Some(g), count));
            }
        }
        Ok((None, count))
    };
    let letters = 2 * rank;
    let results: Vec<Result<(Option<Word>, u64)>> = if threads <= 1 {
        let mut out = Vec::new();
        for r in 0..letters {
            let res = scan_prefix(r);
            let stop = matches!(res, Ok((Some(_), _)) | Err(_));
            out.push(res);
            if stop {
                break;
            }
        }
        out
    } else {
        let threads = threads.min(letters as usize);
        let mut slots: Vec<Option<Result<(Option<Word>, u64)>>> = (0..letters).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let scan_prefix = &scan_prefix;
                    scope.spawn(move || {
                        (t as u32..letters)
                            .step_by(threads)
                            .map(|r| (r, scan_prefix(r)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (r, res) in h.join().expect("search thread panicked") {
                    slots[r as usize] = Some(res);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("every partition scanned")).collect()
    };
    let mut best: Option<Word> = None;
    let mut count = 0;
    for res in results {
        let (found, n) = res?;
        count += n;
        if let Some(g) = found {
            if best.as_ref().is_none_or(|b| shortlex_cmp(g.letters(), b.letters()).is_lt()) {
                best = Some(g);
            }
        }
    }
    Ok((best, count))
}

fn certificate(
    inst: &ConjugacyInstance,
    verdict: Verdict,
    radius: u32,
    enumerated: u64,
    source: &'static str,
) -> Result<ConjugacyCertificate> {
    let transcript = match &verdict {
        Verdict::Conjugate { g } => {
            let v = verify(g, inst)?;
            if !v.holds {
                return Err(Error::Capability(format!("conjugator {g} failed re-verification")));
            }
            v.transcript
        }
        _ => Vec::new(),
    };
    Ok(ConjugacyCertificate {
        verdict,
        radius_searched: radius,
        transcript,
        stats: SearchStats {
            enumerated,
            seconds: None,
        },
        source,
    })
}

/// Shortlex search for the least conjugator up to [`search_radius`].
///
/// Free-group instances that fail a conjugacy invariant, or that the search
/// does not settle, are passed to the exact oracle, which certifies
/// `NotConjugate` (or supplies a conjugator beyond the radius). Other
/// contexts end with `NotConjugateUpTo(radius)`.
pub fn solve(inst: &ConjugacyInstance, cfg: &SearchConfig) -> Result<ConjugacyCertificate> {
    let radius = search_radius(inst, cfg)?;
    if inst.is_free() {
        if let Some(i) = (0..inst.a.len()).find(|&i| {
            inst.a[i].cyclic_decomposition().1.len() != inst.b[i].cyclic_decomposition().1.len()
        }) {
            let proof = format!("cyclically reduced lengths of a_{i} and b_{i} differ");
            return certificate(inst, Verdict::NotConjugate { proof }, 0, 0, "oracle");
        }
    }
    let rank = inst.alphabet.rank();
    let mut enumerated = 0u64;
    let mut completed: Option<u32> = None;
    let mut checkpoint = next_radius(None, radius);
    let mut len = 0u32;
    while len <= radius {
        let layer = ball_size(rank, len) - if len == 0 { 0 } else { ball_size(rank, len - 1) };
        if u128::from(enumerated) + layer > u128::from(cfg.budget) {
            return Err(Error::BudgetExceeded {
                enumerated,
                radius_completed: completed.unwrap_or(0),
            });
        }
        let (found, n) = scan_layer(inst, len, cfg.threads)?;
        enumerated += n;
        if let Some(g) = found {
            return certificate(inst, Verdict::Conjugate { g }, len, enumerated, "search");
        }
        if cfg.policy == RadiusPolicy::Incremental && checkpoint == Some(len) {
            completed = Some(len);
            checkpoint = next_radius(checkpoint, radius);
        } else if cfg.policy != RadiusPolicy::Incremental {
            completed = Some(len);
        }
        len += 1;
    }
    if inst.is_free() {
        let mut cert = free_group_oracle(inst)?;
        cert.radius_searched = radius;
        cert.stats.enumerated = enumerated;
        return Ok(cert);
    }
    certificate(inst, Verdict::NotConjugateUpTo { radius }, radius, enumerated, "search")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitBoundReport {
    /// `Σ_i (d_y(a_i, e) + d_y(b_i, e))`.
    pub orbit_sum: f64,
    /// `Σ_i (|a_i| + |b_i|)`.
    pub word_sum: usize,
    /// `d_y(g, e)` for the known conjugator, if any.
    pub conjugator_orbit: Option<f64>,
    /// `d_y(g, e)/orbit_sum`: an empirical sample of the orbit-metric constant.
    pub ratio: Option<f64>,
}

/// Orbit-metric side of the linear bound at basepoint `y`.
pub fn orbit_bound_report(
    inst: &ConjugacyInstance,
    rho: &Representation,
    y: &Point,
    g: Option<&Word>,
) -> Result<OrbitBoundReport> {
    if rho.rank() != inst.alphabet.rank() {
        return Err(Error::AlphabetMismatch {
            left: inst.alphabet.rank(),
            right: rho.rank(),
        });
    }
    let y = rho.space().check_point(y)?;
    let e = Word::identity();
    let mut orbit_sum = 0.0;
    for w in inst.a.iter().chain(&inst.b) {
        orbit_sum += orbit_distance(rho, &y, w, &e)?;
    }
    let conjugator_orbit = g.map(|g| orbit_distance(rho, &y, g, &e)).transpose()?;
    let ratio = conjugator_orbit.and_then(|d| (orbit_sum > 0.0).then(|| d / orbit_sum));
    Ok(OrbitBoundReport {
        orbit_sum,
        word_sum: inst.word_sum(),
        conjugator_orbit,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::enumerate_ball;

    fn inst(a: &str, b: &str) -> ConjugacyInstance {
        let al = Alphabet::named("xy").unwrap();
        ConjugacyInstance::new(al.clone(), GroupContext::Free, al.parse_list(a).unwrap(), al.parse_list(b).unwrap())
            .unwrap()
    }

    #[test]
    fn verify_examples() {
        assert!(verify(&Word::identity(), &inst("x,yx", "x,yx")).unwrap().holds);
        let i = inst("x", "Yxy");
        let v = verify(&i.alphabet().parse("y").unwrap(), &i).unwrap();
        assert!(v.holds);
        assert_eq!(v.transcript[0].conjugate, "Yxy");
        let never = inst("x", "y");
        for g in enumerate_ball(2, 6) {
            assert!(!verify(&g, &never).unwrap().holds);
        }
        assert!(verify(&Word::generator(3), &never).is_err());
    }

    #[test]
    fn search_radius_examples() {
        let bound = |cstar, c| SearchConfig {
            policy: RadiusPolicy::Bound { cstar: Some(cstar), c: Some(c) },
            max_radius: 100,
            ..Default::default()
        };
        assert_eq!(search_radius(&inst("x", "x"), &bound(1.0, 0.0)).unwrap(), 2);
        // Σ = 10
        assert_eq!(search_radius(&inst("xyx,yy", "xyxy,x"), &bound(0.5, 3.0)).unwrap(), 8);
        assert_eq!(search_radius(&inst("", ""), &bound(7.0, 0.0)).unwrap(), 0);
        let missing = SearchConfig {
            policy: RadiusPolicy::Bound { cstar: Some(1.0), c: None },
            ..Default::default()
        };
        assert!(matches!(search_radius(&inst("x", "x"), &missing), Err(Error::Config(_))));
        assert_eq!(search_radius(&inst("x", "x"), &bound(1e6, 0.0)).unwrap(), 100);
    }

    #[test]
    fn doubling_schedule() {
        let mut r = None;
        let mut seen = Vec::new();
        while let Some(x) = next_radius(r, 10) {
            seen.push(x);
            r = Some(x);
        }
        assert_eq!(seen, vec![0, 1, 2, 4, 8, 10]);
    }

    #[test]
    fn solve_examples() {
        let cfg = SearchConfig::default();
        let c = solve(&inst("xy,x", "xy,x"), &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Conjugate { g: Word::identity() });
        let c = solve(&inst("x", "Yxy"), &cfg).unwrap();
        assert_eq!(c.conjugator().unwrap().letters(), &[2]);
        let c = solve(&inst("x", "y"), &cfg).unwrap();
        assert!(matches!(c.verdict, Verdict::NotConjugate { .. }));
        // centralizers of x and y meet trivially: e is the only conjugator
        let i = inst("x,y", "x,y");
        let all: Vec<Word> = enumerate_ball(2, 6).filter(|g| verify(g, &i).unwrap().holds).collect();
        assert_eq!(all, vec![Word::identity()]);
    }

    #[test]
    fn parallel_search_matches_sequential() {
        let i = inst("xyX,yyx", "YxyXy,yxXyy");
        let seq = solve(&i, &SearchConfig::default()).unwrap();
        let par = solve(&i, &SearchConfig { threads: 4, ..Default::default() }).unwrap();
        assert_eq!(seq.verdict, par.verdict);
        assert_eq!(seq.radius_searched, par.radius_searched);
    }

    #[test]
    fn budget_is_enforced() {
        let i = ConjugacyInstance::free(2, vec![Word::generator(1)], vec![Word::generator(1).conjugate_by(&Word::new([2, 2, 2, 1]).unwrap())]).unwrap();
        let cfg = SearchConfig { budget: 100, ..Default::default() };
        match solve(&i, &cfg) {
            Err(Error::BudgetExceeded { enumerated, radius_completed }) => {
                assert_eq!(enumerated, 53);
                assert_eq!(radius_completed, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matrix_context_is_up_to() {
        let rho = Arc::new(Representation::matrices(&[[[1.0, 2.0], [0.0, 1.0]], [[1.0, 0.0], [2.0, 1.0]]]).unwrap());
        let al = Alphabet::standard(2);
        let a = al.parse_list("a").unwrap();
        let yes = ConjugacyInstance::new(al.clone(), GroupContext::Image(rho.clone()), a.clone(), al.parse_list("Bab").unwrap()).unwrap();
        let cert = solve(&yes, &SearchConfig { max_radius: 3, ..Default::default() }).unwrap();
        assert_eq!(cert.conjugator().unwrap().letters(), &[2]);
        let no = ConjugacyInstance::new(al.clone(), GroupContext::Image(rho), a, al.parse_list("b").unwrap()).unwrap();
        let cert = solve(&no, &SearchConfig { max_radius: 3, ..Default::default() }).unwrap();
        assert_eq!(cert.verdict, Verdict::NotConjugateUpTo { radius: 3 });
    }

    #[test]
    fn orbit_report_examples() {
        let rho = Representation::free_on_cayley_tree(2).unwrap();
        let i = inst("xyX,yy", "xyy,yXy");
        let y = rho.space().base_point();
        let r = orbit_bound_report(&i, &rho, &y, Some(&Word::generator(2))).unwrap();
        assert_eq!(r.orbit_sum, r.word_sum as f64);
        assert_eq!(r.ratio, Some(1.0 / r.orbit_sum));
        let trivial = orbit_bound_report(&inst("", ""), &rho, &y, None).unwrap();
        assert_eq!((trivial.orbit_sum, trivial.word_sum, trivial.ratio), (0.0, 0, None));
    }
}
