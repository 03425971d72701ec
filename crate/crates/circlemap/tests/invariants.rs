//! Cross-module invariants: branch tiling, round trips, distortion decay,
//! measure consistency, and a few property tests over random inputs.

use proptest::prelude::*;

use circlemap::circle_map::LiftMap;
use circlemap::dual_deriv;
use circlemap::linear_model;
use circlemap::measures;
use circlemap::symbolic::{self, SymbolWord};

fn all_maps() -> Vec<LiftMap> {
    vec![
        LiftMap::power(2).unwrap(),
        LiftMap::power(3).unwrap(),
        LiftMap::piecewise_linear(0.3).unwrap(),
        LiftMap::trig_perturbed(2, 0.5).unwrap(),
        LiftMap::fs_smooth(0.7, 4.0).unwrap(),
    ]
}

#[test]
fn branch_tiling_and_round_trip() {
    for m in all_maps() {
        let d = m.degree();
        // branch images tile [0, 1]
        let mut total = 0.0;
        for k in 0..d {
            let a = m.inverse_branch(k, 0.0).unwrap();
            let b = m.inverse_branch(k, 1.0).unwrap();
            total += b - a;
            if k + 1 < d {
                let next = m.inverse_branch(k + 1, 0.0).unwrap();
                assert!((b - next).abs() < 1e-12, "{}: branch junction", m.kind_name());
            }
        }
        assert!((total - 1.0).abs() < 1e-12, "{}: tiling sum {total}", m.kind_name());
        // round trip on a grid of branch arguments
        for k in 0..d {
            for i in 0..=32 {
                let y = i as f64 / 32.0;
                let x = m.inverse_branch(k, y).unwrap();
                let back = m.eval01(x);
                assert!(
                    (back - (y + k as f64)).abs() <= 1e-12,
                    "{}: |F(G_{k}({y})) - (y + {k})| = {:.2e}",
                    m.kind_name(),
                    (back - (y + k as f64)).abs()
                );
            }
        }
    }
}

#[test]
fn holder_distortion_constant_is_stable() {
    // log ratio of (F^{-n})' bounded by C |x - y| with C stable across n
    let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
    let deriv_backward = |x: f64, n: u32| -> f64 {
        // (F^{-n})'(x) as a product of branch derivatives along the chain
        let mut y = x;
        let mut acc = 1.0;
        for _ in 0..n {
            y = m.inverse(y);
            acc /= m.derivative_sides(y).1;
        }
        acc
    };
    let mut cs = Vec::new();
    for n in [2u32, 4, 8, 12] {
        let mut c_fit = 0.0f64;
        for i in 0..24 {
            let x = i as f64 / 24.0;
            for j in (i + 1)..24 {
                let y = j as f64 / 24.0;
                let lr = (deriv_backward(x, n) / deriv_backward(y, n)).ln().abs();
                c_fit = c_fit.max(lr / (x - y).abs());
            }
        }
        cs.push(c_fit);
    }
    for pair in cs.windows(2) {
        assert!(pair[1] <= pair[0] * 1.10 + 1e-12, "distortion constants grew: {cs:?}");
    }
}

#[test]
fn interval_decay_is_geometric() {
    // iota_n <= C tau^n with tau < 1 on the expanding examples
    for m in [LiftMap::trig_perturbed(2, 0.5).unwrap(), LiftMap::piecewise_linear(0.3).unwrap()] {
        let mut iotas = Vec::new();
        for n in 2..=12 {
            iotas.push(m.expansion_report(n).unwrap().iota);
        }
        let tau = (iotas[iotas.len() - 1] / iotas[0]).powf(1.0 / (iotas.len() - 1) as f64);
        assert!(tau < 1.0, "{}: tau = {tau}", m.kind_name());
        for (i, pair) in iotas.windows(2).enumerate() {
            assert!(pair[1] < pair[0], "{}: iota grew at step {i}", m.kind_name());
        }
    }
}

#[test]
fn encode_decode_exhaustive_depth_10() {
    let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
    let level = symbolic::partition_endpoints(&m, 10).unwrap();
    for idx in 0..level.cells() as u64 {
        let (a, b) = level.interval(idx);
        let got = symbolic::encode_point(&m, 0.5 * (a + b), 10).unwrap();
        assert_eq!(got.index(2), idx);
    }
}

#[test]
fn sigma_invariance_of_lifted_measure() {
    // mass([w_n]) = sum_i mass([i w_n]) for the invariant measures
    for m in [LiftMap::power(2).unwrap(), LiftMap::piecewise_linear(0.3).unwrap()] {
        let fine = measures::lebesgue_cylinder_measure(&m, 9).unwrap();
        let coarse = measures::lebesgue_cylinder_measure(&m, 8).unwrap();
        assert!(coarse.prepend_consistency(&fine).unwrap() <= 1e-12);
        assert!((fine.total() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn dual_measure_refinement_consistency_across_depths() {
    let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
    // the step-residual floor scales with the grid interpolation error
    let density = measures::invariant_density(&m, 1 << 12, 200, 1e-10).unwrap();
    let dist = density.distribution();
    let mut prev: Option<measures::CylinderMeasure> = None;
    for depth in 5..=9 {
        let mu = measures::dual_cylinder_measure(&m, &dist, depth).unwrap();
        if let Some(coarse) = prev {
            assert!(coarse.refinement_consistency(&mu).unwrap() <= 1e-12);
        }
        prev = Some(mu);
    }
}

#[test]
fn delta_sits_in_dual_bracket() {
    let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
    let delta = linear_model::delta_of(&m, 14).unwrap();
    let zeros = SymbolWord::parse("00000000000000", 2).unwrap();
    let est = dual_deriv::dual_derivative(&m, &zeros, 14, 0.0).unwrap();
    assert!(
        (delta.value - est.value).abs() <= delta.gap + est.gap + 1e-12,
        "delta {} vs D*(0...0) {}",
        delta.value,
        est.value
    );
}

#[test]
fn cross_method_distributions_agree_on_smooth_examples() {
    // Lebesgue-preserving kinds agree immediately; the trig map needs the
    // Cesaro tail (the averaged error decays like 1/n), so convergence is
    // observed at n = 100
    let grid = 1 << 12;
    for m in [LiftMap::power(2).unwrap(), LiftMap::fs_smooth(0.7, 4.0).unwrap()] {
        let density = measures::invariant_density(&m, grid, 200, 1e-10).unwrap();
        let dist = density.distribution();
        let (ces, _) = measures::cesaro_distribution(&m, 8, grid).unwrap();
        let (xs, ys) = ces.knots();
        let sup = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (dist.eval(*x) - y).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-4, "{}: sup {sup}", m.kind_name());
    }
    let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
    let density = measures::invariant_density(&m, grid, 300, 1e-10).unwrap();
    let dist = density.distribution();
    let (ces, oscillations) = measures::cesaro_distribution(&m, 100, grid).unwrap();
    let (xs, ys) = ces.knots();
    let sup = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (dist.eval(*x) - y).abs())
        .fold(0.0, f64::max);
    assert!(sup <= 1e-4, "trig at n = 100: sup {sup}");
    // oscillations shrink
    assert!(oscillations.last().unwrap() < &1e-4);
}

#[test]
fn gibbs_bracket_stabilizes_for_trig() {
    let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
    let density = measures::invariant_density(&m, 1 << 13, 300, 1e-11).unwrap();
    let dist = density.distribution();
    let mut brackets = Vec::new();
    for depth in [6u32, 8, 10] {
        let mu = measures::dual_cylinder_measure(&m, &dist, depth).unwrap();
        let b = measures::gibbs_report(&m, &mu).unwrap();
        brackets.push((b.lower, b.upper));
    }
    // both ends move by less and less: Cauchy-style stabilization
    let step1 = (brackets[1].0 - brackets[0].0).abs() + (brackets[1].1 - brackets[0].1).abs();
    let step2 = (brackets[2].0 - brackets[1].0).abs() + (brackets[2].1 - brackets[1].1).abs();
    assert!(step2 < step1, "bracket moves grew: {brackets:?}");
    assert!(step2 < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_any_branch_point(y in 0.0f64..1.0, k in 0u32..2) {
        let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
        let x = m.inverse_branch(k, y).unwrap();
        prop_assert!((m.eval01(x) - (y + k as f64)).abs() <= 1e-12);
    }

    #[test]
    fn word_nesting(digits in proptest::collection::vec(0u8..2, 1..9), extra in 0u8..2) {
        let m = LiftMap::trig_perturbed(2, 0.5).unwrap();
        let w = SymbolWord::new(digits, 2).unwrap();
        let (a, b) = symbolic::interval_for_word(&m, &w).unwrap();
        let (ca, cb) = symbolic::interval_for_word(&m, &w.push_digit(extra)).unwrap();
        prop_assert!(ca >= a - 1e-12 && cb <= b + 1e-12);
    }

    #[test]
    fn dual_metric_is_a_metric_on_words(
        a in proptest::collection::vec(0u8..3, 1..7),
        b in proptest::collection::vec(0u8..3, 1..7),
        c in proptest::collection::vec(0u8..3, 1..7),
    ) {
        let d = 3;
        let wa = SymbolWord::new(a, d).unwrap();
        let wb = SymbolWord::new(b, d).unwrap();
        let wc = SymbolWord::new(c, d).unwrap();
        let dab = symbolic::dual_metric(&wa, &wb, d);
        let dba = symbolic::dual_metric(&wb, &wa, d);
        prop_assert!((dab - dba).abs() < 1e-15);
        prop_assert!(dab >= 0.0);
        // padding with zeros on the dual-left never changes the value
        let dab_pad = symbolic::dual_metric(&wa.zero_padded(9), &wb.zero_padded(9), d);
        prop_assert!((dab - dab_pad).abs() < 1e-15);
        let dac = symbolic::dual_metric(&wa, &wc, d);
        let dcb = symbolic::dual_metric(&wc, &wb, d);
        prop_assert!(dab <= dac + dcb + 1e-12);
    }

    #[test]
    fn entropy_never_exceeds_log_d(masses in proptest::collection::vec(0.0f64..1.0, 16)) {
        let total: f64 = masses.iter().sum();
        prop_assume!(total > 1e-6);
        let normalized: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let mu = measures::CylinderMeasure::new(2, 4, measures::Side::SigmaStar, normalized).unwrap();
        let e = measures::entropy_cylinder(&mu).unwrap();
        for (_, raw) in e.per_depth {
            prop_assert!(raw <= 2f64.ln() + 1e-9);
        }
    }

    #[test]
    fn zeta_monotone_random_pairs(m1 in 1.0f64..4.0, m2 in 1.0f64..4.0) {
        let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        let zl = circlemap::conjugacy::zeta(lo, 800).unwrap();
        let zh = circlemap::conjugacy::zeta(hi, 800).unwrap();
        prop_assert!(zl <= zh + 1e-12);
    }
}
