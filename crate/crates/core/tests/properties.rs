//! Randomized invariants of the building blocks.

use bfield_coulomb::approximant::{parse_params, phase_eval, write_params, Approximant, Mode, TrialParams, TrialPhase};
use bfield_coulomb::rb_pt::{self, parse_rational};
use bfield_coulomb::units::{self, StateLabel, SystemSpec};
use bfield_coulomb::variational::{self, minimize, QuadratureGrid};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = TrialParams> {
    (
        (0.0..0.5f64, 0.5..1.5f64, 0.0..0.3f64, 0.0..0.2f64, 0.0..0.3f64),
        (0.0..0.3f64, 0.0..0.5f64, 0.0..0.3f64, 0.0..0.5f64),
        0.0..1.2f64,
        prop::bool::ANY,
    )
        .prop_map(|((a0, a1, a2, a3, a4), (b1, b2, b3, b0), q, odd)| TrialParams {
            alpha: [a0, a1, a2, a3, a4],
            beta: [b0, b1, b2, b3],
            q,
            mode: Mode::Ten,
            state: if odd { StateLabel::TWO_P0 } else { StateLabel::GROUND },
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn analytic_gradient_matches_finite_difference(p in params(), gamma in 0.0..20.0f64, rho in 0.01..3.0f64, z in -3.0..3.0f64) {
        let r = rho.hypot(z);
        let v = phase_eval(rho, r, &p, gamma).unwrap();
        let h = 1e-5 * r;
        let f = |a: f64, b: f64| phase_eval(a, b, &p, gamma).unwrap().phase;
        let fd_rho = (f(rho + h, r) - f(rho - h, r)) / (2.0 * h);
        let fd_r = (f(rho, r + h) - f(rho, r - h)) / (2.0 * h);
        let scale = 1.0 + v.d_rho.abs().max(v.d_r.abs());
        prop_assert!((fd_rho - v.d_rho).abs() / scale < 1e-6);
        prop_assert!((fd_r - v.d_r).abs() / scale < 1e-6);
    }

    #[test]
    fn parameter_text_round_trips(p in params(), gamma in 0.0..1e4f64) {
        let (back, g) = parse_params(&write_params(&p, gamma)).unwrap();
        prop_assert_eq!(back, p);
        prop_assert_eq!(g, gamma);
    }

    #[test]
    fn mass_scaling_round_trips(ratio in 0.5..1e5f64, gamma in 0.0..1e3f64, e in -1.0..1e3f64) {
        let s = SystemSpec::with_ratio(ratio).unwrap();
        let mu = s.mu_ratio();
        let lambda = units::to_reference_problem(gamma, &s);
        prop_assert!((lambda * mu * mu - gamma).abs() <= 1e-12 * gamma.max(1.0));
        prop_assert!((units::energy_from_reference(e, &s) - mu * e).abs() <= 1e-12 * e.abs().max(1.0));
        let gc = units::critical_field_scaled(lambda, &s);
        prop_assert!((gc - gamma).abs() <= 1e-12 * gamma.max(1.0));
    }

    #[test]
    fn rationals_print_and_parse(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
        let q = parse_rational(&format!("{n}/{d}")).unwrap();
        prop_assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn simplex_never_worsens_the_start(c in prop::collection::vec(-2.0..2.0f64, 3), w in prop::collection::vec(0.1..5.0f64, 3)) {
        let f = |x: &[f64]| x.iter().zip(&c).zip(&w).map(|((x, c), w)| w * (x - c).powi(2)).sum::<f64>();
        let x0 = [0.0; 3];
        let out = minimize(f, &x0, &[0.3; 3], 1e-14, 4000);
        prop_assert!(out.f <= f(&x0));
        prop_assert!(out.f < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn energy_is_bounded_below_by_the_hydrogen_level(p in params(), gamma in 0.0..5.0f64) {
        // Every normalizable trial state lies above the exact ground level,
        // which is itself above the zero-field value -1 Ry.
        let trial = Approximant { params: p.clone(), gamma };
        let grid = QuadratureGrid::for_trial(&trial, gamma, variational::DEFAULT_ORDER);
        let e = variational::functional(&trial, gamma, 1.0, &grid).unwrap().energy;
        let floor = if p.state.p == 0 { -1.0 } else { -0.25 };
        prop_assert!(e > floor - 1e-9, "E = {e}");
    }

    #[test]
    fn energy_ignores_normalization(p in params(), gamma in 0.0..5.0f64, shift in -5.0..5.0f64) {
        struct Shifted(Approximant, f64);
        impl TrialPhase for Shifted {
            fn state(&self) -> StateLabel { self.0.state() }
            fn phase(&self, rho: f64, r: f64) -> bfield_coulomb::error::Result<bfield_coulomb::approximant::PhaseValue> {
                let mut v = self.0.phase(rho, r)?;
                v.phase += self.1;
                Ok(v)
            }
        }
        let trial = Approximant { params: p, gamma };
        let grid = QuadratureGrid::for_trial(&trial, gamma, variational::DEFAULT_ORDER);
        let a = variational::functional(&trial, gamma, 1.0, &grid).unwrap().energy;
        let b = variational::functional(&Shifted(trial.clone(), shift), gamma, 1.0, &grid).unwrap().energy;
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
    }
}

#[test]
fn series_signs_alternate_through_order_30() {
    let s = rb_pt::run(StateLabel::GROUND, 30).unwrap();
    assert!(s.signs_alternate());
}
