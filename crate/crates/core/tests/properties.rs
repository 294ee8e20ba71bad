use num_complex::Complex64;
use proptest::prelude::*;

use zsa_core::gdpoly::{Base, GeneralizedDirichletPoly};
use zsa_core::levelset::{trace_level_curve, ComponentClass, PrunedSum, TraceOptions};
use zsa_core::realroots::{count_real_zeros_brute, sign_changes, RealExpEquation};
use zsa_core::strips::rn_membership;
use zsa_core::zerofinder::{default_max_step, find_zeros, winding_number};
use zsa_core::{Error, Family, Rectangle};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn conjugate_symmetry(n in 3u64..=20, x in -8.0f64..8.0, y in -200.0f64..200.0) {
        for family in [Family::Zeta, Family::G, Family::GStar] {
            let p = family.build(n).unwrap();
            let z = Complex64::new(x, y);
            let a = p.evaluate(z.conj()).unwrap();
            let b = p.evaluate(z).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-12 * p.abs_scale(x));
        }
    }

    #[test]
    fn reflection_swaps_families(n in 2u64..=20, x in -8.0f64..8.0, y in -200.0f64..200.0) {
        let z = Complex64::new(x, y);
        let zeta = Family::Zeta.build(n).unwrap().evaluate(-z).unwrap();
        let g = Family::G.build(n).unwrap();
        prop_assert!((zeta - g.evaluate(z).unwrap()).norm() <= 1e-12 * g.abs_scale(x));
    }

    #[test]
    fn modulus_envelope_brackets_samples(n in 3u64..=12, x in -3.0f64..2.0, y in 0.0f64..1000.0) {
        let g = PrunedSum::new(n).unwrap();
        let v = g.poly().evaluate(Complex64::new(x, y)).unwrap().norm();
        let scale = g.max_modulus(x);
        prop_assert!(g.min_modulus(x) <= v + 1e-9 * scale);
        prop_assert!(v <= scale * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn zero_count_matches_winding(
        n in 3u64..=9,
        family in prop::sample::select(vec![Family::Zeta, Family::G, Family::GStar]),
        x0 in -3.0f64..1.0,
        w in 0.2f64..3.0,
        y0 in -40.0f64..60.0,
        h in 0.5f64..20.0,
    ) {
        let p = family.build(n).unwrap();
        let rect = Rectangle::new(x0, x0 + w, y0, y0 + h).unwrap();
        match find_zeros(&p, &rect, 1e-10) {
            Ok(zeros) => {
                let count: u32 = zeros.iter().map(|z| z.multiplicity).sum();
                let w = winding_number(&p, &rect, default_max_step(&p)).unwrap();
                prop_assert_eq!(count as i64, w);
                for z in &zeros {
                    prop_assert!(rect.contains(z.position()));
                    prop_assert!(z.residual <= 1e-8 * p.abs_scale(z.re));
                }
            }
            Err(Error::Boundary { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn sampled_crossing_implies_membership(n in 3u64..=8, x in -2.0f64..1.5, y0 in 0.0f64..500.0) {
        let g = PrunedSum::new(n).unwrap();
        let level = g.level(x);
        let (mut below, mut above) = (false, false);
        for j in 0..2000 {
            let v = g.poly().evaluate(Complex64::new(x, y0 + 0.01 * j as f64)).unwrap().norm();
            below |= v <= level;
            above |= v >= level;
        }
        if below && above {
            prop_assert!(rn_membership(n, x, 1e-9).unwrap());
            prop_assert!(g.feasible(x, level));
        }
        if !rn_membership(n, x, 1e-9).unwrap() {
            prop_assert!(!(below && above));
        }
    }

    #[test]
    fn real_zeros_bounded_by_sign_changes(
        terms in prop::collection::vec((1u64..=12, 0.5f64..2.0, any::<bool>()), 2..=6),
        level in -3.0f64..3.0,
    ) {
        let terms: Vec<(f64, Base)> = terms
            .into_iter()
            .map(|(k, c, neg)| (if neg { -c } else { c }, Base::integer(k)))
            .collect();
        let Ok(poly) = GeneralizedDirichletPoly::new("random", terms) else {
            return Ok(());
        };
        let eq = RealExpEquation::new(poly, level).unwrap();
        let bound = sign_changes(&eq).unwrap();
        if let Ok(found) = count_real_zeros_brute(&eq, -60.0, 60.0, 20_000) {
            prop_assert!(found <= bound, "{found} real zeros, {bound} sign changes");
        }
    }
}

#[test]
fn level_curves_are_symmetric_about_the_real_axis() {
    for (n, x0) in [(3, -0.5), (5, 0.3), (7, 1.2)] {
        let a = trace_level_curve(n, x0, &TraceOptions::default()).unwrap();
        let mut upper: Vec<(ComponentClass, i64)> = Vec::new();
        let mut lower: Vec<(ComponentClass, i64)> = Vec::new();
        for c in &a.components {
            let ys: Vec<f64> = c.vertices.iter().map(|v| v[1]).collect();
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mid = 0.5 * (lo + hi);
            // centred to about a cell: keyed by its mirror image
            let key = (mid.abs() / a.grid).round() as i64;
            if mid > a.grid {
                upper.push((c.class, key));
            } else if mid < -a.grid {
                lower.push((c.class, key));
            }
        }
        let sort = |v: &mut Vec<(ComponentClass, i64)>| v.sort_by_key(|&(c, k)| (c.as_str(), k));
        sort(&mut upper);
        sort(&mut lower);
        assert_eq!(upper.len(), lower.len(), "n={n} x0={x0}");
        for (u, l) in upper.iter().zip(&lower) {
            assert_eq!(u.0, l.0);
            assert!((u.1 - l.1).abs() <= 2, "n={n} x0={x0}: {u:?} vs {l:?}");
        }
    }
}

#[cfg(feature = "parallel")]
#[test]
fn single_thread_pool_gives_identical_results() {
    use zsa_core::levelset::modulus_profiles;
    use zsa_core::levelset::ProfileOptions;
    use zsa_core::zerofinder::scan_zeros;

    let run = || {
        let p = Family::G.build(7).unwrap();
        let zeros = scan_zeros(&p, (-3.0, 2.0), (0.0, 120.0), 10.0, 1e-10).unwrap();
        let opts = ProfileOptions {
            y_max: 200.0,
            step: None,
        };
        let profiles = modulus_profiles(6, &[-1.0, 0.0, 0.5], &opts).unwrap();
        let trace = trace_level_curve(5, 0.4, &TraceOptions::default()).unwrap();
        (
            serde_json::to_string(&zeros).unwrap(),
            serde_json::to_string(&profiles).unwrap(),
            serde_json::to_string(&trace).unwrap(),
        )
    };
    let pooled = run();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(pooled, single);
}
