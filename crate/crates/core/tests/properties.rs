mod common;

use common::*;
use ehyp_core::ambient::Space;
use ehyp_core::dual::{seed, seed2};
use ehyp_core::expr::Expr;
use ehyp_core::lie::ModelKind;
use ehyp_core::surface::builtin_surface;
use ehyp_core::verify::{evaluate, HypersurfaceChart, Tolerances};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(KINDS.to_vec())
}

fn space() -> impl Strategy<Value = Space> {
    prop::sample::select(vec![Space::Su3So3, Space::Sl3So3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jacobi_identity_holds(k in kind(), s in any::<u64>()) {
        prop_assert!(jacobi_identity(k, &mut rng(s), 20) <= 1e-13);
    }

    #[test]
    fn curvature_has_the_algebraic_symmetries(k in kind(), s in any::<u64>()) {
        prop_assert!(curvature_symmetries(k, &mut rng(s), 10) <= 1e-12);
    }

    #[test]
    fn curvature_pairing_is_nondegenerate(k in kind(), s in any::<u64>()) {
        prop_assert!(curvature_nondegeneracy(k, &mut rng(s), 4) > 1e-8);
    }

    #[test]
    fn mixed_root_curvature_is_nonzero(k in kind(), s in any::<u64>()) {
        prop_assert!(mixed_curvature_nonvanishing(k, &mut rng(s)) > 1e-8);
    }

    #[test]
    fn theta_pairing_identity(k in kind(), s in any::<u64>()) {
        prop_assert!(theta_pairing(k, &mut rng(s)) <= 1e-11);
    }

    #[test]
    fn root_set_is_symmetric_and_seed_independent(k in kind(), s in any::<u64>()) {
        let (neg, reseed) = root_set_stability(k, s);
        prop_assert!(neg <= 1e-9 && reseed <= 1e-9, "{neg:e} {reseed:e}");
    }

    #[test]
    fn codimension_one_solvmanifolds_are_einstein(k in prop::sample::select(vec![ModelKind::Sl3, ModelKind::Sl4]), s in any::<u64>()) {
        let a = solv_audit(k, &mut rng(s), 2);
        prop_assert!(a.ad_asymmetry <= 1e-12);
        prop_assert!(a.derived_leak <= 1e-11 && a.derived_dim_ok);
        prop_assert!(a.constant_gap <= 1e-9 && a.codim1_residual <= 1e-9);
        prop_assert!(a.trace_ad_xi <= 1e-12);
    }

    #[test]
    fn leaves_are_equivariant(sp in space(), s in any::<u64>()) {
        prop_assert!(leaf_equivariance(sp, &mut rng(s), 4) <= 1e-11);
    }

    #[test]
    fn leaves_have_curvature_one_half(sp in space(), s in any::<u64>()) {
        prop_assert!(leaf_sectional(sp, &mut rng(s), 4) <= 1e-8);
    }

    #[test]
    fn induced_metric_is_positive(sp in space(), s in any::<u64>()) {
        prop_assert!(induced_metric_min_eigenvalue(sp, &mut rng(s), 4) > 0.0);
    }

    #[test]
    fn centro_affine_curvature_is_unimodular_invariant(
        name in prop::sample::select(vec!["hyperboloid", "hexenhut", "ruled_exp", "ruled_cubic", "unit_sphere"]),
        s in any::<u64>(),
    ) {
        prop_assert!(unimodular_invariance(name, &mut rng(s), 1) <= 1e-8);
    }

    #[test]
    fn expression_derivatives_match_difference_quotients(u1 in -2.0f64..2.0, u2 in -2.0f64..2.0) {
        let e = Expr::parse("sin(u1)*cosh(u2) + u1^3/7 - sqrt(2 + cos(u2))*exp(u1/3)").unwrap();
        let d = e.eval(&seed([u1, u2]));
        let h = 1e-6;
        for k in 0..2 {
            let mut a = [u1, u2];
            let mut b = [u1, u2];
            a[k] += h;
            b[k] -= h;
            let fd = (e.eval(&a) - e.eval(&b)) / (2.0 * h);
            prop_assert!((fd - d.d[k]).abs() < 1e-7);
        }
        let j = e.eval(&seed2([u1, u2]));
        prop_assert!((j.grad(0) - d.d[0]).abs() < 1e-12 && (j.hess(0, 1) - j.hess(1, 0)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Per-sample self-consistency of the hypersurface pipeline: H = Tr S, the
    /// α multiset is the spectrum of R̃_ξ, ξ is normal and tangent.
    #[test]
    fn sample_records_are_self_consistent(
        name in prop::sample::select(SPECIAL_SURFACES.to_vec()),
        a in 0.05f64..0.95, b in 0.05f64..0.95, t1 in 0.3f64..1.5, t2 in -1.0f64..1.0,
    ) {
        let s = builtin_surface(name).unwrap();
        let u = [s.domain[0][0] + a * (s.domain[0][1] - s.domain[0][0]), s.domain[1][0] + b * (s.domain[1][1] - s.domain[1][0])];
        let sp = if s.model == ehyp_core::surface::SurfaceModel::Legendrian { Space::Su3So3 } else { Space::Sl3So3 };
        let c = HypersurfaceChart::new(s, sp).unwrap();
        let x = [u[0], u[1], t1, t2];
        prop_assume!(c.in_domain(x) && c.metric(x).symmetric_eigenvalues().min() > 1e-4);
        let r = evaluate(&c, x, &Tolerances::analytic(1e-5)).unwrap();
        prop_assert!(r.consistency_residual <= 1e-10, "{}", r.consistency_residual);
        prop_assert!(r.normal_residual <= 1e-11 && r.membership_residual <= 1e-10);
        prop_assert!(r.einstein_residual <= 1e-8, "{name} {x:?} {}", r.einstein_residual);
        prop_assert_eq!(r.gauss_map_rank, 2);
    }
}

#[test]
fn symmetric_metrics_are_einstein() {
    for k in KINDS {
        assert!(symmetric_einstein(k) <= 1e-10, "{k:?}");
    }
}

#[test]
fn bracket_grading_holds() {
    for k in KINDS {
        assert!(bracket_grading(k) <= 1e-11, "{k:?} {:e}", bracket_grading(k));
    }
}

#[test]
fn builtin_model_residuals_on_a_32_grid() {
    for name in ehyp_core::surface::BUILTIN_NAMES {
        let r = model_residual(name, 32);
        assert!(r <= 1e-10, "{name}: {r:e}");
    }
}

#[test]
fn special_legendrian_angles_are_constant() {
    for name in ["legendrian_sphere", "legendrian_torus", "torus_beta0_control"] {
        let sd = angle_spread(name, 32);
        assert!(sd <= 1e-9, "{name}: {sd:e}");
    }
}

#[test]
fn full_system_iff_curvature_minus_one() {
    for name in ["hyperboloid", "hexenhut", "ruled_hyperboloid", "ruled_exp", "ruled_cubic", "unit_sphere"] {
        assert_eq!(special_iff_curvature_minus_one(name, 12), 0, "{name}");
    }
}
