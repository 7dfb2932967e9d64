//! Acceptance criteria AC1–AC10. Runs without the libtest harness so that
//! every criterion prints exactly one `ACn PASS|FAIL` line.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hadamard::conjugacy::{free_group_oracle, solve, verify, ConjugacyInstance, SearchConfig, Verdict};
use hadamard::equivariant::{convexity_report, EquivariantMap, FundamentalGraph, GeodesicHomotopy, GraphEdge};
use hadamard::groups::{enumerate_ball, orbit_distance, Representation, Word};
use hadamard::harmonic::{
    estimate_width_constant, main_lemma_ratio_refined, relax, stationarity_probe, verify_harmonic_homotopy,
    RelaxationConfig, SamplerConfig,
};
use hadamard::spaces::{HyperbolicPoint, Point, Space};
use hadamard_cli::{cat0_suite, preset_tree, random_reduced_word, TreePreset};

const SEED: u64 = 0xCA70;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn rep(name: &str) -> Arc<Representation> {
    Arc::new(Representation::from_json(&std::fs::read_to_string(data(name)).unwrap()).unwrap())
}

/// The theta graph: two vertices joined by three unit edges labelled e, a, b.
fn theta() -> Arc<FundamentalGraph> {
    let edge = |label: Word| GraphEdge { source: 0, target: 1, len: 1.0, label };
    Arc::new(
        FundamentalGraph::new(2, vec![edge(Word::identity()), edge(Word::generator(1)), edge(Word::generator(2))])
            .unwrap(),
    )
}

/// One rank-2 representation per model.
fn model_reps() -> Vec<(&'static str, Arc<Representation>)> {
    vec![
        ("euclidean", rep("rep_euclidean.json")),
        ("hyperbolic", rep("rep_h2.json")),
        ("finite tree", rep("rep_tree.json")),
        ("cayley tree", rep("rep_free.json")),
    ]
}

fn random_map(graph: &Arc<FundamentalGraph>, rho: &Arc<Representation>, rng: &mut ChaCha8Rng) -> EquivariantMap {
    let space = rho.space();
    let scale = SamplerConfig::default_scale(space);
    let images = (0..graph.vertex_count()).map(|_| space.random_point(rng, scale)).collect();
    EquivariantMap::new(graph.clone(), rho.clone(), images).unwrap()
}

fn cat0_models() -> Vec<(&'static str, Space)> {
    vec![
        ("euclidean-2", Space::euclidean(2)),
        ("euclidean-5", Space::euclidean(5)),
        ("hyperbolic", Space::Hyperbolic),
        ("caterpillar", Space::tree(preset_tree(TreePreset::Caterpillar))),
        ("spider", Space::tree(preset_tree(TreePreset::Spider))),
    ]
}

/// AC1 and AC2 share one sample: each trial evaluates both comparisons.
fn ac1_ac2() -> (Outcome, Outcome) {
    let mut tri_ok = true;
    let mut quad_ok = true;
    let mut tri_detail = Vec::new();
    let mut quad_detail = Vec::new();
    let mut tri_secs = 0.0;
    let mut quad_secs = 0.0;
    for (name, space) in cat0_models() {
        let scale = SamplerConfig::default_scale(&space);
        let start = Instant::now();
        let s = cat0_suite(&space, 10_000, SEED, scale).unwrap();
        let secs = start.elapsed().as_secs_f64();
        // the suite runs both criteria; charge the full time to each
        tri_secs += secs;
        quad_secs += secs;
        let flat_ok = !s.flat || s.triangle.max_abs <= 1e-9;
        tri_ok &= s.triangle.violations == 0 && flat_ok;
        quad_ok &= s.quadrilateral.violations == 0 && s.convexity.violations == 0;
        tri_detail.push(format!("{name} min {:.2e}", s.triangle.min));
        quad_detail.push(format!("{name} min {:.2e}/{:.2e}", s.quadrilateral.min, s.convexity.min));
    }
    tri_ok &= tri_secs < 10.0;
    quad_ok &= quad_secs < 60.0;
    (
        outcome(tri_ok, format!("10^4 triangles x 5 lambdas per model in {tri_secs:.1}s; {}", tri_detail.join(", "))),
        outcome(quad_ok, format!("10^4 quadruples x 25 (t,alpha) per model in {quad_secs:.1}s; {}", quad_detail.join(", "))),
    )
}

fn ac3() -> Outcome {
    let graph = theta();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut failures = 0;
    let mut rows = 0;
    for (m, (_, rho)) in model_reps().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + m as u64);
        for _ in 0..1000 {
            let u = random_map(&graph, &rho, &mut rng);
            let v = random_map(&graph, &rho, &mut rng);
            let h = GeodesicHomotopy::new(u, v).unwrap();
            for r in convexity_report(&h, &grid).unwrap() {
                rows += 1;
                failures += usize::from(!r.holds);
            }
        }
    }
    outcome(failures == 0, format!("{rows} rows over 4 models x 10^3 theta-graph pairs, {failures} violations"))
}

fn ac4() -> Outcome {
    let graph = theta();
    let cfg = RelaxationConfig::default();
    let (mut runs, mut worst_identity, mut worst_probe, mut monotone, mut converged) = (0, 0.0f64, 0.0f64, true, true);
    for (m, (_, rho)) in model_reps().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ ((m as u64 + 1) << 8));
        for _ in 0..10 {
            let r = relax(&random_map(&graph, &rho, &mut rng), &cfg).unwrap();
            runs += 1;
            converged &= r.converged;
            monotone &= r.energy_trace.windows(2).all(|w| w[1] <= w[0]);
            let lengths = r.map.edge_lengths().unwrap();
            let energies = r.map.edge_energies().unwrap();
            for ((l, e), edge) in lengths.iter().zip(&energies).zip(r.map.graph().edges()) {
                let rel = (l * l - e * edge.len).abs() / (l * l).max(f64::MIN_POSITIVE);
                worst_identity = worst_identity.max(rel);
            }
            worst_probe = worst_probe.max(stationarity_probe(&r.map, 16, 1e-6).unwrap());
        }
    }
    let pass = converged && monotone && worst_identity <= 1e-12 && worst_probe <= 1e-10;
    outcome(
        pass,
        format!(
            "{runs} relax runs: converged {converged}, traces monotone {monotone}, max |L^2-E len|/L^2 {worst_identity:.1e}, max probe gain {worst_probe:.1e}"
        ),
    )
}

fn axis_rep() -> Arc<Representation> {
    let e = 1f64.exp();
    Arc::new(Representation::matrices(&[[[e, 0.0], [0.0, 1.0 / e]]]).unwrap())
}

fn bouquet_at(rho: &Arc<Representation>, p: HyperbolicPoint) -> EquivariantMap {
    hadamard::equivariant::build_bouquet_map(rho.clone(), Point::Hyperbolic(p)).unwrap()
}

fn ac5() -> Outcome {
    let rho = axis_rep();
    let cfg = RelaxationConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let starts: Vec<Point> = (0..2).map(|_| rho.space().random_point(&mut rng, 1.0)).collect();
    let r1 = relax(&hadamard::equivariant::build_bouquet_map(rho.clone(), starts[0].clone()).unwrap(), &cfg).unwrap();
    let r2 = relax(&hadamard::equivariant::build_bouquet_map(rho.clone(), starts[1].clone()).unwrap(), &cfg).unwrap();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let report = verify_harmonic_homotopy(&r1, &r2, &grid).unwrap();
    let max_dev = report.rows.iter().map(|r| (r.energy - 4.0).abs()).fold(0.0, f64::max);
    let separation = rho.space().dist(&r1.map.images()[0], &r2.map.images()[0]).unwrap();
    let pass = (r1.energy - 4.0).abs() <= 1e-6 && (r2.energy - 4.0).abs() <= 1e-6 && max_dev <= 1e-6;
    outcome(
        pass,
        format!(
            "E* = {:.12} and {:.12}, minimizers {separation:.3} apart, max |E(H_s)-4| = {max_dev:.1e}",
            r1.energy, r2.energy
        ),
    )
}

fn ac6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rho) in [("cayley tree F2", rep("rep_free.json")), ("H2 [[2,1],[1,1]],[[1,1],[1,2]]", rep("rep_h2.json"))] {
        let cfg = SamplerConfig {
            seed: SEED,
            trials: 1000,
            scale: SamplerConfig::default_scale(rho.space()),
            threads: 1,
        };
        let a = estimate_width_constant(rho.clone(), &cfg).unwrap();
        let b = estimate_width_constant(rho.clone(), &cfg).unwrap();
        let c = estimate_width_constant(rho, &SamplerConfig { threads: 4, ..cfg }).unwrap();
        let finite = a.samples.iter().all(|s| s.ratio.is_some_and(f64::is_finite));
        let exact = a.c_hat.to_bits() == b.c_hat.to_bits() && a == c;
        pass &= finite && exact;
        parts.push(format!("{name}: C^ = {:.17} (finite {finite}, bit-exact {exact})", a.c_hat));
    }
    outcome(pass, parts.join("; "))
}

fn ac7() -> Outcome {
    let rho = axis_rep();
    let cfg = RelaxationConfig::default();
    let r = relax(&bouquet_at(&rho, HyperbolicPoint::origin()), &cfg).unwrap();
    let g = rho.evaluate(&Word::generator(1)).unwrap();
    let mut ratios = Vec::new();
    let mut geometry_ok = true;
    for i in 1..=20 {
        let t = 0.05 * i as f64;
        // the axis is the x1-line; this point lies at distance t from it
        let y = HyperbolicPoint::from_polar(t, FRAC_PI_2);
        let gy = g.apply(rho.space(), &Point::Hyperbolic(y)).unwrap();
        let d = rho.space().dist(&Point::Hyperbolic(y), &gy).unwrap();
        // displacement at distance t from an axis of translation length 2
        geometry_ok &= ((d / 2.0).sinh() - t.cosh() * 1f64.sinh()).abs() < 1e-12;
        let u = bouquet_at(&rho, y);
        ratios.push((t, main_lemma_ratio_refined(&u, &r, &cfg).unwrap()));
    }
    let values: Vec<f64> = ratios.iter().filter_map(|(_, x)| *x).collect();
    let all_finite = values.len() == ratios.len() && values.iter().all(|x| x.is_finite() && *x > 0.0);
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        all_finite && geometry_ok,
        format!("20 offsets t in [0.05, 1]: ratio in [{min:.4}, {max:.4}], uniform bound C* >= {max:.4}"),
    )
}

/// Least conjugator in the radius-6 ball by brute force.
fn exhaustive(inst: &ConjugacyInstance) -> Option<Word> {
    enumerate_ball(2, 6).find(|g| verify(g, inst).unwrap().holds)
}

#[derive(Default)]
struct Tally {
    instances: usize,
    conjugate: usize,
    discrepancies: usize,
}

impl Tally {
    fn check(&mut self, inst: &ConjugacyInstance, with_exhaustive: bool) {
        let cfg = SearchConfig {
            max_radius: 6,
            ..Default::default()
        };
        self.instances += 1;
        let solved = solve(inst, &cfg).unwrap();
        let oracle = free_group_oracle(inst).unwrap();
        let same_verdict = matches!(
            (&solved.verdict, &oracle.verdict),
            (Verdict::Conjugate { .. }, Verdict::Conjugate { .. }) | (Verdict::NotConjugate { .. }, Verdict::NotConjugate { .. })
        );
        let mut ok = same_verdict;
        for cert in [&solved, &oracle] {
            if let Some(g) = cert.conjugator() {
                ok &= verify(g, inst).unwrap().holds;
            }
        }
        if let Some(g) = solved.conjugator() {
            self.conjugate += 1;
            // both are shortlex-least, hence identical
            ok &= oracle.conjugator() == Some(g);
        }
        if with_exhaustive {
            ok &= exhaustive(inst).as_ref() == oracle.conjugator().filter(|g| g.len() <= 6);
        }
        self.discrepancies += usize::from(!ok);
    }
}

fn ac8() -> Outcome {
    let start = Instant::now();
    let short: Vec<Word> = enumerate_ball(2, 3).collect();
    let conjugators: Vec<Word> = enumerate_ball(2, 2).collect();
    let mut t = Tally::default();
    // N = 1: every pair of short words, and every conjugate of each
    for a in &short {
        for b in &short {
            t.check(&ConjugacyInstance::free(2, vec![a.clone()], vec![b.clone()]).unwrap(), true);
        }
        for g in &conjugators {
            t.check(&ConjugacyInstance::free(2, vec![a.clone()], vec![a.conjugate_by(g)]).unwrap(), true);
        }
    }
    // N = 2: every pair conjugated by every |g| ≤ 2
    for a1 in &short {
        for a2 in &short {
            for g in &conjugators {
                let inst = ConjugacyInstance::free(2, vec![a1.clone(), a2.clone()], vec![a1.conjugate_by(g), a2.conjugate_by(g)]);
                t.check(&inst.unwrap(), false);
            }
        }
    }
    let exhaustive_count = t.instances;
    // random: conjugate lists and lists conjugated entrywise by different words
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..1000 {
        let n = rng.random_range(1..=3);
        let a: Vec<Word> = (0..n)
            .map(|_| {
                let len = rng.random_range(0..=6);
                random_reduced_word(&mut rng, 2, len)
            })
            .collect();
        let b: Vec<Word> = if i % 2 == 0 {
            let len = rng.random_range(0..=5);
            let g = random_reduced_word(&mut rng, 2, len);
            a.iter().map(|w| w.conjugate_by(&g)).collect()
        } else {
            a.iter()
                .map(|w| {
                    let len = rng.random_range(0..=3);
                    w.conjugate_by(&random_reduced_word(&mut rng, 2, len))
                })
                .collect()
        };
        t.check(&ConjugacyInstance::free(2, a, b).unwrap(), true);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        t.discrepancies == 0 && secs < 300.0,
        format!(
            "{} instances ({exhaustive_count} exhaustive, 1000 random), {} conjugate, {} discrepancies, {secs:.1}s",
            t.instances, t.conjugate, t.discrepancies
        ),
    )
}

fn ac9() -> Outcome {
    let rho = Representation::free_on_cayley_tree(2).unwrap();
    let y = rho.space().base_point();
    let e = Word::identity();
    let mut checked = 0;
    let mut bad = 0;
    for g in enumerate_ball(2, 6) {
        checked += 1;
        bad += usize::from(orbit_distance(&rho, &y, &g, &e).unwrap() != g.word_length() as f64);
    }
    outcome(bad == 0, format!("{checked} words of length <= 6, {bad} mismatches"))
}

fn ac10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hadamard");
    let d = |n: &str| data(n).display().to_string();
    let runs: Vec<Vec<String>> = [
        vec!["check-cat0", "--model", "euclidean", "--dim", "2", "--trials", "200"],
        vec!["check-cat0", "--model", "hyperbolic", "--trials", "200", "--format", "csv"],
        vec!["check-cat0", "--model", "tree", "--preset", "spider", "--trials", "200", "--format", "human"],
        vec!["check-cat0", "--model", "cayley", "--trials", "200"],
        vec!["width", "--u", &d("theta_u.json"), "--v", &d("theta_v.json")],
        vec!["convexity", "--u", &d("theta_u.json"), "--v", &d("theta_v.json"), "--format", "csv"],
        vec!["harmonic", "--map", &d("theta_u.json")],
        vec!["estimate-cstar", "--free-rank", "2", "--trials", "100"],
        vec!["estimate-cstar", "--rep", &d("rep_h2.json"), "--trials", "100", "--threads", "3", "--format", "csv"],
        vec!["conjugacy", "solve", "--alphabet", "2", "--a", "xy,yX", "--b", "yx,Xy"],
        vec!["conjugacy", "solve", "--rep", &d("rep_parabolic.json"), "--a", "a", "--b", "Bab", "--max-radius", "3"],
        vec!["orbit-report", "--rep", &d("rep_parabolic.json"), "--instances", "5"],
    ]
    .iter()
    .map(|r| r.iter().map(|s| s.to_string()).collect())
    .collect();
    let mut mismatches = Vec::new();
    for args in &runs {
        let first = Command::new(bin).args(args).output().unwrap();
        let second = Command::new(bin).args(args).output().unwrap();
        if first.stdout.is_empty() || first.stdout != second.stdout || first.status.code() != second.status.code() {
            mismatches.push(args[0].clone());
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{} invocations over 7 subcommands run twice, differing: {:?}", runs.len(), mismatches),
    )
}

fn main() {
    let (ac1, ac2) = ac1_ac2();
    let results = [
        ("AC1", "CAT(0) triangle comparison", ac1),
        ("AC2", "Reshetnyak quadrilaterals and distance convexity", ac2),
        ("AC3", "length/energy convexity along geodesic homotopies", ac3()),
        ("AC4", "harmonic-map identities, monotone trace, stationarity", ac4()),
        ("AC5", "energy constant between minimizers (axis example)", ac5()),
        ("AC6", "width constant estimates", ac6()),
        ("AC7", "Main Lemma ratio on the axis family", ac7()),
        ("AC8", "conjugacy solver vs free-group oracle", ac8()),
        ("AC9", "orbit metric equals word length on the Cayley tree", ac9()),
        ("AC10", "byte-identical CLI output under a fixed seed", ac10()),
    ];
    let mut failed = 0;
    for (id, title, o) in &results {
        println!("{id} {} {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
