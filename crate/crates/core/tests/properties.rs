use proptest::prelude::*;

use zeromode::clifford::{CliffordRep, Sign, Spinor, C64};
use zeromode::conformal::{pushforward_potential, talenti_bubble};
use zeromode::fd::{gradient_norm_sq, gradient_scalar, integrate, regularized_norm};
use zeromode::grid::{BumpSpinor, GridSpec, ScalarField, SpinorField};
use zeromode::radial::{sobolev_quotient, RadialProfile};
use zeromode::sharp::SharpFamily;

fn spinor(size: usize) -> impl Strategy<Value = Spinor> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), size)
        .prop_map(|v| Spinor(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clifford_square_is_minus_length(v in (2usize..8).prop_flat_map(vector)) {
        let n = v.len();
        let rep = CliffordRep::new(n).unwrap();
        let psi = Spinor((0..rep.size()).map(|k| C64::new(k as f64 + 1.0, -0.5)).collect());
        let twice = rep.clifford_apply(&v, &rep.clifford_apply(&v, &psi).unwrap()).unwrap();
        let len2: f64 = v.iter().map(|x| x * x).sum();
        let expect = psi.scale(C64::new(-len2, 0.0));
        prop_assert!(twice.max_abs_diff(&expect) <= 1e-12 * (1.0 + len2) * psi.norm());
    }

    #[test]
    fn clifford_action_is_skew(v in vector(3), psi in spinor(2)) {
        let rep = CliffordRep::new(3).unwrap();
        let w = rep.clifford_apply(&v, &psi).unwrap();
        prop_assert!(psi.inner(&w).re.abs() <= 1e-12 * (1.0 + psi.norm_sqr()));
    }

    #[test]
    fn sharp_pair_solves_the_zero_mode_equation(x in vector(3), minus in any::<bool>()) {
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let family = SharpFamily::new(3, sign).unwrap();
        let psi0 = family.admissible_psi0(50, 3).unwrap();
        prop_assert!(family.residual_norm(&psi0, &x) <= 1e-12);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let norm2 = family.zero_mode(&psi0, &x).norm_sqr();
        prop_assert!((norm2 * (1.0 + r2).powi(2) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pushforward_has_constant_length(x in vector(3)) {
        let family = SharpFamily::new(3, Sign::Plus).unwrap();
        let abar = pushforward_potential(&family.potential(&x), &x);
        let len = abar.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((len - 1.5).abs() <= 1e-12);
    }

    #[test]
    fn quotient_is_invariant_under_scaling(c in 0.01..100.0f64, bump in 0.0..0.5f64) {
        let nodes = RadialProfile::log_nodes(400, 1e-3, 1e3);
        let f = |r: f64| talenti_bubble(3, r) * (1.0 + bump * (-r * r).exp());
        let a = sobolev_quotient(&RadialProfile::from_fn(3, nodes.clone(), f).unwrap()).unwrap();
        let b = sobolev_quotient(&RadialProfile::from_fn(3, nodes, |r| c * f(r)).unwrap()).unwrap();
        prop_assert!((a / b - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn regularized_norm_dominates(seed in 0u64..1000, eps in 1e-3..1.0f64) {
        let g = GridSpec::new(3, 2.0, 13, 4).unwrap();
        let b = BumpSpinor::unit_scale(3, 2, seed);
        let f = SpinorField::sample(&g, 2, |x| b.eval(x));
        let reg = regularized_norm(&f, eps).unwrap();
        let plain = f.norm();
        for (r, p) in reg.data.iter().zip(&plain.data) {
            prop_assert!(*r >= p.max(eps));
        }
    }

    #[test]
    fn integration_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let g = GridSpec::new(3, 4.0, 25, 4).unwrap();
        let f = ScalarField::sample(&g, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
        let h = ScalarField::sample(&g, |x| 1.0 / (1.0 + x[0] * x[0] + x[1].abs()));
        let combo = f.zip_map(&h, |p, q| a * p + b * q).unwrap();
        let lhs = integrate(&combo);
        let rhs = a * integrate(&f) + b * integrate(&h);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn diamagnetic_inequality(seed in 0u64..1000) {
        let g = GridSpec::new(3, 3.0, 41, 4).unwrap();
        let bump = BumpSpinor::unit_scale(3, 2, seed);
        let f = SpinorField::sample(&g, 2, |x| bump.eval(x));
        let grad_abs = gradient_scalar(&f.norm()).unwrap();
        let full = gradient_norm_sq(&f).unwrap();
        for (i, total) in full.data.iter().enumerate() {
            let lhs: f64 = grad_abs.iter().map(|d| d.data[i] * d.data[i]).sum();
            prop_assert!(lhs <= total + 1e-4, "site {i}: {lhs} > {total}");
        }
    }
}
