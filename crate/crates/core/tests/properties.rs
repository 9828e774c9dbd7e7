use lue_edge::airyfred::airy_kernel;
use lue_edge::asymptotics::{cubic_relative_residual, cubic_root_f_tilde};
use lue_edge::exactprob::{phat_hankel_oracle, phat_projection, sigma_exact, EnsembleParams};
use lue_edge::mcsample::{ks_distance, sample_largest, EmpiricalCDF, SamplerConfig, Scaling};
use lue_edge::orthopoly::cd_kernel;
use lue_edge::painleve::{fn_equation_residual, pv_residual, sigma_form_residual, PainleveState};
use lue_edge::specfun::{airy, barnes_ln_g, log_gamma, regularized_lower_gamma};
use proptest::prelude::*;

fn params(n: usize, gamma: f64) -> EnsembleParams {
    EnsembleParams::new(n, gamma).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_gamma_recurrence(x in 0.01f64..60.0) {
        let lhs = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
        let scale = log_gamma(x + 1.0).unwrap().abs() + x.ln().abs() + 1.0;
        prop_assert!((lhs - x.ln()).abs() <= 1e-14 * scale);
    }

    #[test]
    fn barnes_recurrence(z in 1.0f64..40.0) {
        let lhs = barnes_ln_g(z + 1.0).unwrap() - barnes_ln_g(z).unwrap();
        let rhs = log_gamma(z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn regularized_gamma_is_a_cdf(a in 0.05f64..30.0, t in 0.0f64..80.0, dt in 0.0f64..5.0) {
        let p = regularized_lower_gamma(a, t).unwrap();
        let q = regularized_lower_gamma(a, t + dt).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(q >= p - 1e-15);
    }

    #[test]
    fn airy_derivative_is_consistent(x in -15.0f64..15.0) {
        let h = 1e-5;
        let fd = (airy(x + h).unwrap().ai - airy(x - h).unwrap().ai) / (2.0 * h);
        let d = airy(x).unwrap().ai_prime;
        prop_assert!((fd - d).abs() <= 1e-7 * (1.0 + d.abs()));
    }

    #[test]
    fn airy_kernel_is_symmetric(u in -10.0f64..10.0, v in -10.0f64..10.0) {
        prop_assert_eq!(airy_kernel(u, v).unwrap(), airy_kernel(v, u).unwrap());
    }

    #[test]
    fn christoffel_darboux_symmetry(n in 1usize..15, gamma in -0.9f64..4.0, x in 0.01f64..50.0, y in 0.01f64..50.0) {
        let a = cd_kernel(n, gamma, x, y).unwrap();
        let b = cd_kernel(n, gamma, y, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn log_probability_is_a_log_cdf(n in 1usize..12, gamma in -0.9f64..5.0, t in 0.1f64..80.0, dt in 0.0f64..10.0) {
        let a = phat_projection(params(n, gamma), t).unwrap().log_value;
        let b = phat_projection(params(n, gamma), t + dt).unwrap().log_value;
        prop_assert!(a <= 0.0 && b <= 0.0);
        prop_assert!(b >= a - 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn projection_agrees_with_hankel(n in 1usize..9, gamma in -0.5f64..3.0, t in 0.3f64..15.0) {
        let a = phat_projection(params(n, gamma), t).unwrap().log_value;
        let b = phat_hankel_oracle(params(n, gamma), t).unwrap().log_value;
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn sigma_is_bounded_and_solves_sigma_form(n in 1usize..9, gamma in 0.0f64..3.0, t in 1.0f64..25.0) {
        let v = sigma_exact(params(n, gamma), t).unwrap();
        let k = n as f64 * (n as f64 + gamma);
        prop_assert!(v.sigma >= -1e-12 && v.sigma <= k + 1e-9);
        let r = sigma_form_residual(&v.into(), n, gamma);
        prop_assert!(r.abs() <= 1e-6 * ((t * v.sigma_double_prime).powi(2) + 1.0));
    }

    #[test]
    fn rescaling_identity_for_arbitrary_input(
        n in 1usize..50, gamma in 0.0f64..3.0, alpha in 0.05f64..0.95,
        s in 1.1f64..10.0, d1 in -5.0f64..5.0, d2 in -5.0f64..5.0,
    ) {
        let nf = n as f64;
        let st = PainleveState { t: 4.0 * nf * alpha, s, s_prime: d1, s_double_prime: d2 };
        let pv = pv_residual(&st, n, gamma).unwrap();
        let fr = fn_equation_residual(alpha, s, 4.0 * nf * d1, 16.0 * nf * nf * d2, n, gamma).unwrap();
        let scale = 16.0 * nf * nf * (pv.abs() + 1.0) + fr.abs();
        prop_assert!((fr - 16.0 * nf * nf * pv).abs() <= 1e-12 * scale);
    }

    #[test]
    fn cubic_root_has_small_residual(n in 10usize..2000, gamma in 0.0f64..4.0, alpha in 0.05f64..0.95) {
        let f = cubic_root_f_tilde(n, gamma, alpha).unwrap();
        prop_assert!(f > 1.0);
        prop_assert!(cubic_relative_residual(n, gamma, alpha, f) <= 1e-12);
    }

    #[test]
    fn empirical_cdf_is_monotone(mut xs in prop::collection::vec(-100.0f64..100.0, 1..200), a in -120.0f64..120.0, b in -120.0f64..120.0) {
        let e = EmpiricalCDF::new(xs.clone()).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(e.cdf(lo) <= e.cdf(hi));
        prop_assert!((0.0..=1.0).contains(&e.cdf(lo)));
        xs.sort_by(f64::total_cmp);
        prop_assert_eq!(ks_distance(&e, |x| e.cdf(x), &xs).unwrap(), 0.0);
    }

    #[test]
    fn sampler_scaling_contract(n in 1usize..8, gamma in -0.9f64..3.0, seed in any::<u64>()) {
        let base = SamplerConfig { params: params(n, gamma), sample_count: 50, seed, scaling: Scaling::Unscaled };
        let u = sample_largest(&base).unwrap();
        let s = sample_largest(&SamplerConfig { scaling: Scaling::Scaled, ..base }).unwrap();
        let div = 4.0 * n as f64;
        for (a, b) in u.samples().iter().zip(s.samples()) {
            prop_assert_eq!(a / div, *b);
        }
        prop_assert!(u.samples().iter().all(|&x| x > 0.0));
    }
}
