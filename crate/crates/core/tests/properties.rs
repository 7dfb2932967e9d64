//! Property-based invariants across modules.

use std::f64::consts::TAU;
use std::sync::Arc;

use proptest::prelude::*;

use hadamard::conjugacy::{solve, verify, ConjugacyInstance, SearchConfig};
use hadamard::equivariant::{build_bouquet_map, EquivariantMap, FundamentalGraph, GeodesicHomotopy, GraphEdge};
use hadamard::groups::{ball_size, enumerate_ball, orbit_distance, Alphabet, Representation, Word};
use hadamard::harmonic::{relax, RelaxationConfig};
use hadamard::spaces::{
    distance_convexity_gap, hyperbolic, quadrilateral_defect, triangle_defect, HyperbolicPoint, Point, Space,
};

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..=max_len)
        .prop_map(|letters| Word::new(letters).unwrap())
}

fn h2_point() -> impl Strategy<Value = HyperbolicPoint> {
    (0.0..6.0f64, 0.0..TAU).prop_map(|(r, a)| HyperbolicPoint::from_polar(r, a))
}

fn e2_point() -> impl Strategy<Value = Point> {
    prop::collection::vec(-10.0..10.0f64, 2).prop_map(Point::Euclidean)
}

fn h2_rho() -> Arc<Representation> {
    Arc::new(Representation::matrices(&[[[2.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]]]).unwrap())
}

proptest! {
    #[test]
    fn free_group_axioms(u in word(8), v in word(8), w in word(8)) {
        prop_assert!(u.multiply(&u.inverse()).is_identity());
        prop_assert_eq!(u.multiply(&v).multiply(&w), u.multiply(&v.multiply(&w)));
        prop_assert_eq!(u.multiply(&v).inverse(), v.inverse().multiply(&u.inverse()));
        prop_assert_eq!(u.conjugate_by(&v).conjugate_by(&w), u.conjugate_by(&v.multiply(&w)));
    }

    #[test]
    fn words_round_trip_through_alphabet(u in word(12)) {
        let al = Alphabet::standard(2);
        prop_assert_eq!(al.parse(&al.format(&u)).unwrap(), u);
    }

    #[test]
    fn primitive_root_reconstructs(u in word(10)) {
        prop_assume!(!u.is_identity());
        let (z, m) = u.primitive_root();
        prop_assert_eq!(z.pow(m as i64), u.clone());
        prop_assert!(z.commutes_with(&u));
    }

    #[test]
    fn hyperbolic_metric_axioms(p in h2_point(), q in h2_point(), r in h2_point()) {
        let (pq, qr, pr) = (hyperbolic::dist(&p, &q), hyperbolic::dist(&q, &r), hyperbolic::dist(&p, &r));
        prop_assert!((pq - hyperbolic::dist(&q, &p)).abs() <= 1e-12 * (1.0 + pq));
        prop_assert!(pr <= pq + qr + 1e-9);
        // the acosh form loses accuracy for nearby points only
        if pq > 1e-3 {
            prop_assert!((pq - hyperbolic::dist_by_pairing(&p, &q)).abs() <= 1e-8 * (1.0 + pq));
        }
    }

    #[test]
    fn sl2_images_are_isometries(p in h2_point(), q in h2_point(), g in word(4)) {
        let rho = h2_rho();
        let (pp, qq) = (Point::Hyperbolic(p), Point::Hyperbolic(q));
        let d = rho.space().dist(&pp, &qq).unwrap();
        let d_img = rho.space().dist(&rho.act(&g, &pp).unwrap(), &rho.act(&g, &qq).unwrap()).unwrap();
        prop_assert!((d - d_img).abs() <= 1e-7 * (1.0 + d));
    }

    #[test]
    fn flat_triangles_attain_equality(p in e2_point(), q in e2_point(), r in e2_point(), lambda in 0.0..=1.0f64) {
        let s = Space::euclidean(2);
        prop_assert!(triangle_defect(&s, &p, &q, &r, lambda).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn hyperbolic_comparisons(
        p in h2_point(), q in h2_point(), r in h2_point(), s in h2_point(),
        t in 0.0..=1.0f64, alpha in 0.0..=1.0f64,
    ) {
        let sp = Space::Hyperbolic;
        let [p, q, r, s] = [p, q, r, s].map(Point::Hyperbolic);
        prop_assert!(triangle_defect(&sp, &p, &q, &r, t).unwrap() >= -1e-9);
        prop_assert!(quadrilateral_defect(&sp, &p, &q, &r, &s, t, alpha).unwrap() >= -1e-9);
        prop_assert!(distance_convexity_gap(&sp, &p, &q, &r, &s, t).unwrap() >= -1e-9);
    }

    #[test]
    fn cayley_orbit_metric_is_word_metric(g in word(8), h in word(8)) {
        let rho = Representation::free_on_cayley_tree(2).unwrap();
        let y = rho.space().base_point();
        let d = orbit_distance(&rho, &y, &g, &h).unwrap();
        prop_assert_eq!(d, g.inverse().multiply(&h).word_length() as f64);
    }

    #[test]
    fn energy_dominates_length_squared(a in h2_point(), b in h2_point(), len0 in 0.1..3.0f64, len1 in 0.1..3.0f64) {
        // Cauchy–Schwarz: L² ≤ E · Σ len
        let graph = Arc::new(FundamentalGraph::new(2, vec![
            GraphEdge { source: 0, target: 1, len: len0, label: Word::identity() },
            GraphEdge { source: 0, target: 1, len: len1, label: Word::generator(1) },
            GraphEdge { source: 1, target: 0, len: 1.0, label: Word::generator(2) },
        ]).unwrap());
        let u = EquivariantMap::new(graph.clone(), h2_rho(), vec![Point::Hyperbolic(a), Point::Hyperbolic(b)]).unwrap();
        let (l, e) = (u.length().unwrap(), u.energy().unwrap());
        prop_assert!(l * l <= e * graph.total_length() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn width_2_brackets_and_is_below_width_inf(a in h2_point(), b in h2_point()) {
        let rho = h2_rho();
        let u = build_bouquet_map(rho.clone(), Point::Hyperbolic(a)).unwrap();
        let v = build_bouquet_map(rho, Point::Hyperbolic(b)).unwrap();
        let h = GeodesicHomotopy::new(u.clone(), v).unwrap();
        let w2 = h.width_2(16).unwrap();
        let w_inf = h.width_inf().unwrap();
        prop_assert!(w2.lower <= w2.value * (1.0 + 1e-9) + 1e-12);
        prop_assert!(w2.value <= w2.upper * (1.0 + 1e-9) + 1e-12);
        prop_assert!(w2.value <= w_inf * u.graph().total_length().sqrt() * (1.0 + 1e-9) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relaxation_never_increases_energy(a in h2_point()) {
        let u = build_bouquet_map(h2_rho(), Point::Hyperbolic(a)).unwrap();
        let r = relax(&u, &RelaxationConfig::default()).unwrap();
        prop_assert!(r.energy <= u.energy().unwrap());
        prop_assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn solve_is_sound_minimal_and_translation_invariant(
        a in prop::collection::vec(word(4), 1..=2), g in word(3), h in word(2),
    ) {
        let b: Vec<Word> = a.iter().map(|w| w.conjugate_by(&g)).collect();
        let inst = ConjugacyInstance::free(2, a.clone(), b.clone()).unwrap();
        let cert = solve(&inst, &SearchConfig { max_radius: 4, ..Default::default() }).unwrap();
        let found = cert.conjugator().expect("constructed conjugate").clone();
        prop_assert!(verify(&found, &inst).unwrap().holds);
        prop_assert!(found.len() <= g.len());
        // nothing shorter verifies
        if found.len() > 0 {
            prop_assert!(enumerate_ball(2, found.len() as u32 - 1).all(|k| !verify(&k, &inst).unwrap().holds));
        }
        // A' = h⁻¹Ah is conjugated to B by h⁻¹·g
        let shifted: Vec<Word> = a.iter().map(|w| w.conjugate_by(&h)).collect();
        let inst2 = ConjugacyInstance::free(2, shifted, b).unwrap();
        prop_assert!(verify(&h.inverse().multiply(&found), &inst2).unwrap().holds);
    }

    #[test]
    fn ball_enumeration_is_complete_and_sorted(radius in 0u32..5) {
        let words: Vec<Word> = enumerate_ball(2, radius).collect();
        prop_assert_eq!(words.len() as u128, ball_size(2, radius));
        prop_assert!(words.windows(2).all(|w| w[0] < w[1]));
    }
}
