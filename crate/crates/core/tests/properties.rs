mod common;

use isqlab::bmo::{bmo_norm, Symbol};
use isqlab::field::SampledField;
use isqlab::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use isqlab::intrinsic::{ConeQuadrature, SquareFunctions, SquareKind};
use isqlab::lp::FEASIBILITY_TOL;
use isqlab::morrey::{
    hardy_best_constant, morrey_norm, zygmund_constant, Bound, EnvelopeReading, HardyConfig, ProbeSet, WeightFunction,
    ZygmundProblem,
};
use isqlab::young::{log_grid, YoungFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CATALOG: [&str; 6] = ["power:1", "power:2.5", "npower:1.5", "npower:4", "exp", "llogl"];

fn young() -> impl Strategy<Value = YoungFunction> {
    prop::sample::select(&CATALOG[..]).prop_map(|id| YoungFunction::from_id(id).unwrap())
}

fn line(values: Vec<f64>) -> SampledField {
    let n = values.len();
    SampledField::new(1, [-2.0, 0.0], 4.0 / n as f64, [n, 1], values, "sample").unwrap()
}

fn field() -> impl Strategy<Value = SampledField> {
    prop::collection::vec(-3.0f64..3.0, 64).prop_map(line)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn young_is_monotone(phi in young(), a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(phi.value(lo) <= phi.value(hi));
    }

    #[test]
    fn young_midpoint_convexity(phi in young(), a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let mid = phi.value(0.5 * (a + b));
        let chord = 0.5 * (phi.value(a) + phi.value(b));
        prop_assert!(mid <= chord + 1e-12 * (1.0 + chord));
    }

    #[test]
    fn young_scaling_inequalities(phi in young(), t in 1e-3f64..40.0, a in 1e-3f64..=1.0, b in 1.0f64..10.0) {
        let v = phi.value(t);
        prop_assert!(phi.value(a * t) <= a * v * (1.0 + 1e-12));
        if b * t <= phi.domain_cap() {
            prop_assert!(phi.value(b * t) >= b * v * (1.0 - 1e-12));
        }
    }

    #[test]
    fn young_inverse_bracket(phi in young(), s in 1e-6f64..1e6) {
        let r = phi.inverse(s);
        prop_assert!(phi.value(r) <= s * (1.0 + 1e-12));
        prop_assert!(phi.inverse(phi.value(r)) <= r * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn morrey_norm_is_homogeneous(f in field(), c in -5.0f64..5.0, lambda in 0.1f64..0.9) {
        let phi = YoungFunction::power(2.0).unwrap();
        let w = WeightFunction::MorreyClassical { lambda, p: 2.0, dim: 1 };
        let probes = ProbeSet::new(vec![[0.0, 0.0], [0.4, 0.0]], 0.125, 1.0, 4).unwrap();
        let base = morrey_norm(&f, &phi, &w, &probes).unwrap();
        let scaled = morrey_norm(&f.scaled(c), &phi, &w, &probes).unwrap();
        prop_assert!(rel(scaled, c.abs() * base) <= 1e-12, "{scaled} vs {}", c.abs() * base);
    }

    #[test]
    fn enlarging_probes_never_lowers_the_morrey_norm(
        f in field(),
        extra_center in -0.8f64..0.8,
        extra_radius in 0.125f64..1.0,
    ) {
        let phi = YoungFunction::exp();
        let w = WeightFunction::PowerLaw(-0.5);
        let small = ProbeSet::with_radii(vec![[0.0, 0.0]], vec![0.125, 0.5]).unwrap();
        let large = ProbeSet::with_radii(vec![[0.0, 0.0], [extra_center, 0.0]], vec![0.125, 0.5, extra_radius]).unwrap();
        prop_assert!(morrey_norm(&f, &phi, &w, &large).unwrap() >= morrey_norm(&f, &phi, &w, &small).unwrap());
    }

    #[test]
    fn bmo_norm_shift_and_scale(f in field(), shift in -100.0f64..100.0, c in -5.0f64..5.0) {
        let probes = ProbeSet::new(vec![[0.0, 0.0], [0.5, 0.0]], 0.25, 1.0, 4).unwrap();
        let base = bmo_norm(&f, &probes).unwrap();
        let shifted = bmo_norm(&f.map(|v| v + shift), &probes).unwrap();
        let scale = 1.0 + shift.abs() / base.max(f64::MIN_POSITIVE);
        prop_assert!((shifted - base).abs() <= 1e-12 * base * scale, "{shifted} vs {base}");
        prop_assert!(rel(bmo_norm(&f.scaled(c), &probes).unwrap(), c.abs() * base) <= 1e-12);
    }

    #[test]
    fn lp_witness_is_feasible(seed in any::<u64>(), m in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (class, c) = common::random_instance(&mut rng, m);
        let sol = class.solve(&c).unwrap();
        prop_assert!(class.max_violation(&sol.witness) <= FEASIBILITY_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zygmund_log_factor_dominates(lambda in 0.05f64..0.95, p in 1.2f64..4.0) {
        let y = YoungFunction::power(p).unwrap();
        let w = WeightFunction::MorreyClassical { lambda, p, dim: 1 };
        let radii = log_grid(1e-3, 1.0, 5);
        let value = |with_log| {
            let prob = ZygmundProblem { phi1: &w, phi2: &w, young: &y, dim: 1, with_log, reading: EnvelopeReading::EssInf };
            zygmund_constant(&prob, &radii, 1e4).unwrap()
        };
        match (value(false), value(true)) {
            (Bound::Finite(a), Bound::Finite(b)) => prop_assert!(b.value >= a.value),
            (Bound::Divergent { .. }, other) => prop_assert!(other.is_divergent()),
            (_, Bound::Divergent { .. } | Bound::Inconclusive { .. }) | (Bound::Inconclusive { .. }, _) => {}
        }
    }

    #[test]
    fn hardy_constant_grows_with_w(gamma in -4.0f64..-2.5, k in 1.0f64..4.0) {
        let cfg = |w| {
            HardyConfig::new(WeightFunction::PowerLaw(-1.0), WeightFunction::PowerLaw(1.0), w, 1e-2, 10.0, 8, 1e4).unwrap()
        };
        let small = hardy_best_constant(&cfg(WeightFunction::PowerLaw(gamma))).unwrap();
        let large = hardy_best_constant(&cfg(WeightFunction::Product(vec![
            WeightFunction::PowerLaw(gamma),
            WeightFunction::Constant(k),
        ])))
        .unwrap();
        if let (Some(a), Some(b)) = (small.finite(), large.finite()) {
            prop_assert!(b >= a * (1.0 - 1e-12), "{b} < {a}");
        }
    }
}

fn sparse_quad() -> ConeQuadrature {
    ConeQuadrature::new(0.125, 1.0, 3, 8, 1.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn square_functions_scale_with_the_field(f in field(), c in -4.0f64..4.0, x in -0.5f64..0.5) {
        let q = sparse_quad();
        let base = SquareFunctions::new(&f, 1.0, &q).unwrap();
        let fc = f.scaled(c);
        let scaled = SquareFunctions::new(&fc, 1.0, &q).unwrap();
        for kind in [SquareKind::Lusin { beta: 2.0 }, SquareKind::Vertical, SquareKind::GStar { lambda: 3.0 }] {
            let a = base.evaluate_many(kind, &[[x, 0.0]]).unwrap()[0];
            let b = scaled.evaluate_many(kind, &[[x, 0.0]]).unwrap()[0];
            prop_assert!(rel(b, c.abs() * a) <= 1e-12, "{kind:?}: {b} vs {}", c.abs() * a);
        }
    }

    #[test]
    fn commutator_ignores_symbol_shift(f in field(), shift in -50.0f64..50.0, x in -0.5f64..0.5) {
        let q = sparse_quad();
        let sq = SquareFunctions::new(&f, 0.75, &q).unwrap();
        let b = Symbol::Affine { a: 1.5, b: 0.0 }.sample_like(&f);
        let shifted = b.map(|v| v + shift);
        for kind in [SquareKind::Lusin { beta: 1.0 }, SquareKind::Vertical] {
            let a = sq.commutator(&b, kind, [x, 0.0]).unwrap();
            let s = sq.commutator(&shifted, kind, [x, 0.0]).unwrap();
            prop_assert!((a - s).abs() <= 1e-12 * a.max(1.0), "{kind:?}: {a} vs {s}");
        }
    }
}

fn lemma33_config(corpus: &[&str], radii_count: usize, extra_center: bool) -> ExperimentConfig {
    let centers = if extra_center { "[[0], [0.5]]" } else { "[[0]]" };
    let corpus = corpus.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", ");
    ExperimentConfig::parse(&format!(
        r#"{{
            "dim": 1,
            "grid": {{ "origin": [-2], "h": 0.0625, "extents": [64] }},
            "probes": {{ "centers": {centers}, "r_min": 0.125, "r_max": 1, "count": {radii_count} }},
            "quadrature": {{ "t_max": 8, "nodes_per_decade": 3, "m": 8 }},
            "corpus": [{corpus}],
            "seed": 4,
            "refine": false,
            "truncation_check": false
        }}"#
    ))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn enlarging_corpus_or_probes_never_lowers_the_constant(
        extra in prop::sample::select(vec!["trig:2", "indicator:0.3:0.25", "bump:-0.2:0.3:0.5"]),
        more_centers in any::<bool>(),
    ) {
        let constant = |cfg: ExperimentConfig| {
            run_experiment(ExperimentKind::Lemma33, &cfg).unwrap().check("local_constant").unwrap().value
        };
        let base = constant(lemma33_config(&["step:-0.75:0.25", "trig:3"], 2, false));
        let corpus = constant(lemma33_config(&["step:-0.75:0.25", "trig:3", extra], 2, false));
        let probes = constant(lemma33_config(&["step:-0.75:0.25", "trig:3"], 2, more_centers));
        prop_assert!(corpus >= base && probes >= base, "{base} -> corpus {corpus}, probes {probes}");
    }
}
