//! Empirical constants: the Main Lemma ratio `d∞(u, ū)/(L(u) − L⋆)` and the
//! width ratio `W∞(H)/(L(u) + L(v))`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{check_non_elementary, relax, HarmonicResult, RelaxationConfig};
use crate::equivariant::{build_bouquet_map, EquivariantMap, GeodesicHomotopy};
use crate::error::{Error, Result};
use crate::groups::Representation;
use crate::spaces::Space;

/// Gaps `L(u) − L⋆` at or below this leave the ratio undefined.
const GAP_FLOOR: f64 = 1e-12;

fn ensure_converged(r: &HarmonicResult) -> Result<()> {
    if r.converged {
        Ok(())
    } else {
        Err(Error::Unconverged)
    }
}

/// `d∞(u, ū)/(L(u) − L⋆)` against the given minimizer, or `None` when the
/// length gap is ≤ 1e-12.
pub fn main_lemma_ratio(u: &EquivariantMap, r: &HarmonicResult) -> Result<Option<f64>> {
    ensure_converged(r)?;
    let d_inf = GeodesicHomotopy::new(u.clone(), r.map.clone())?.width_inf()?;
    let gap = u.length()? - r.length;
    Ok((gap > GAP_FLOOR).then(|| d_inf / gap))
}

/// As [`main_lemma_ratio`], but compares against the minimizer reached by
/// relaxing from `u` itself, a heuristic for the nearest minimizer when
/// minimizers are not unique. `L⋆` is the smaller of the two minima.
pub fn main_lemma_ratio_refined(
    u: &EquivariantMap,
    r: &HarmonicResult,
    cfg: &RelaxationConfig,
) -> Result<Option<f64>> {
    ensure_converged(r)?;
    let near = relax(u, cfg)?;
    ensure_converged(&near)?;
    let l_star = near.length.min(r.length);
    let d_inf = GeodesicHomotopy::new(u.clone(), near.map)?.width_inf()?;
    let gap = u.length()? - l_star;
    Ok((gap > GAP_FLOOR).then(|| d_inf / gap))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub trials: usize,
    /// Model-specific spread of the random basepoints; see
    /// [`Space::random_point`].
    pub scale: f64,
    pub threads: usize,
}

impl SamplerConfig {
    /// 4 letters on Cayley trees, unit scale elsewhere.
    pub fn default_scale(space: &Space) -> f64 {
        match space {
            Space::Cayley(_) => 4.0,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthSample {
    pub trial: usize,
    pub length_u: f64,
    pub length_v: f64,
    pub width_inf: f64,
    /// `None` when `L(u) + L(v) = 0`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthEstimate {
    /// Largest observed ratio: a lower bound for the optimal constant.
    pub c_hat: f64,
    pub samples: Vec<WidthSample>,
}

fn sample(trial: usize, u: &EquivariantMap, v: &EquivariantMap) -> Result<WidthSample> {
    let h = GeodesicHomotopy::new(u.clone(), v.clone())?;
    let (length_u, length_v) = (u.length()?, v.length()?);
    let width_inf = h.width_inf()?;
    let denom = length_u + length_v;
    Ok(WidthSample {
        trial,
        length_u,
        length_v,
        width_inf,
        ratio: (denom > 0.0).then(|| width_inf / denom),
    })
}

fn summarize(samples: Vec<WidthSample>) -> WidthEstimate {
    let c_hat = samples
        .iter()
        .filter_map(|s| s.ratio)
        .fold(0.0, f64::max);
    WidthEstimate { c_hat, samples }
}

/// Ratios `W∞/(L(u) + L(v))` for explicit map pairs.
pub fn estimate_from_pairs(pairs: &[(EquivariantMap, EquivariantMap)]) -> Result<WidthEstimate> {
    let samples = pairs
        .iter()
        .enumerate()
        .map(|(i, (u, v))| sample(i, u, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(samples))
}

fn run_trial(rho: &Arc<Representation>, cfg: &SamplerConfig, trial: usize) -> Result<WidthSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let space = rho.space();
    let u = build_bouquet_map(rho.clone(), space.random_point(&mut rng, cfg.scale))?;
    let v = build_bouquet_map(rho.clone(), space.random_point(&mut rng, cfg.scale))?;
    sample(trial, &u, &v)
}

/// Samples random pairs of bouquet maps (basepoints drawn independently)
/// and returns the largest width ratio. Trial `i` draws from ChaCha8 stream
/// `i` of the seed, so the table does not depend on the thread count.
pub fn estimate_width_constant(rho: Arc<Representation>, cfg: &SamplerConfig) -> Result<WidthEstimate> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
        return Err(Error::Config(format!("sampler scale {} must be positive", cfg.scale)));
    }
    check_non_elementary(&rho)?;
    let threads = cfg.threads.clamp(1, cfg.trials);
    let samples = if threads == 1 {
        (0..cfg.trials)
            .map(|i| run_trial(&rho, cfg, i))
            .collect::<Result<Vec<_>>>()?
    } else {
        let chunks: Vec<Result<Vec<WidthSample>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let rho = &rho;
                    scope.spawn(move || {
                        (t..cfg.trials)
                            .step_by(threads)
                            .map(|i| run_trial(rho, cfg, i))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("trial thread panicked")).collect()
        });
        let mut all = Vec::with_capacity(cfg.trials);
        for c in chunks {
            all.extend(c?);
        }
        all.sort_by_key(|s| s.trial);
        all
    };
    Ok(summarize(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{HyperbolicPoint, Point};

    fn config(trials: usize, threads: usize) -> SamplerConfig {
        SamplerConfig {
            seed: 7,
            trials,
            scale: 1.0,
            threads,
        }
    }

    #[test]
    fn identical_pair_gives_zero() {
        let rho = Arc::new(Representation::free_on_cayley_tree(2).unwrap());
        let u = build_bouquet_map(rho.clone(), rho.space().base_point()).unwrap();
        let est = estimate_from_pairs(&[(u.clone(), u)]).unwrap();
        assert_eq!(est.c_hat, 0.0);
        assert_eq!(est.samples[0].ratio, Some(0.0));
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let rho = Arc::new(Representation::matrices(&[[[2.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]]]).unwrap());
        let a = estimate_width_constant(rho.clone(), &config(50, 1)).unwrap();
        let b = estimate_width_constant(rho.clone(), &config(50, 1)).unwrap();
        let c = estimate_width_constant(rho, &config(50, 4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(a.c_hat.is_finite() && a.c_hat > 0.0);
    }

    #[test]
    fn cyclic_hyperbolic_refused() {
        let e = 1f64.exp();
        let rho = Arc::new(Representation::matrices(&[[[e, 0.0], [0.0, 1.0 / e]]]).unwrap());
        assert!(matches!(
            estimate_width_constant(rho, &config(1, 1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn main_lemma_undefined_cases() {
        let e = 1f64.exp();
        let rho = Arc::new(Representation::matrices(&[[[e, 0.0], [0.0, 1.0 / e]]]).unwrap());
        let u = build_bouquet_map(rho, Point::Hyperbolic(HyperbolicPoint::origin())).unwrap();
        let r = relax(&u, &RelaxationConfig::default()).unwrap();
        assert_eq!(main_lemma_ratio(&r.map, &r).unwrap(), None);
        let off = u.with_images(vec![Point::Hyperbolic(HyperbolicPoint::from_spatial(0.0, 0.5))]).unwrap();
        let ratio = main_lemma_ratio(&off, &r).unwrap().unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
        let refined = main_lemma_ratio_refined(&off, &r, &RelaxationConfig::default()).unwrap().unwrap();
        assert!(refined.is_finite() && refined > 0.0);
    }
}
