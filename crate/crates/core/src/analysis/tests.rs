use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::model::{log_grid, ParamFamily};

fn fam(name: &str, p: &[(&str, f64)]) -> ParamFamily {
    ParamFamily::new(name, p).unwrap()
}

/// α = α₁x, β = β₁, k = e^{−κ₁x} as registered families.
fn linear(a1: f64, b1: f64, kappa: f64) -> ModelTriple {
    ModelTriple::new(
        fam("power", &[("coef", a1), ("exponent", 1.0)]).rate(),
        fam("constant", &[("value", b1)]).rate(),
        fam("exponential-survival", &[("theta", kappa)]).survival(),
    )
}

fn expr(a: &str, b: &str, k: &str) -> ModelTriple {
    ModelTriple::from_exprs(a, b, k).unwrap()
}

#[test]
fn gamma_linear_case_both_routes() {
    let m = linear(1.0, 0.5, 1.0);
    let closed = Analysis::new(m.clone());
    let numeric = Analysis::numeric(m);
    for &y in &[1e-4, 0.3, 1.0, 2.0, 50.0, 1e5] {
        let want = 0.5 * f64::ln(y);
        assert_relative_eq!(closed.big_gamma(y).unwrap(), want, max_relative = 1e-14, epsilon = 1e-15);
        assert_relative_eq!(numeric.big_gamma(y).unwrap(), want, max_relative = 1e-10, epsilon = 1e-13);
    }
    assert_eq!(numeric.big_gamma(1.0).unwrap(), 0.0);
    assert_eq!(numeric.gamma_at_zero().unwrap(), f64::NEG_INFINITY);
    assert_eq!(numeric.gamma_at_infinity().unwrap(), f64::INFINITY);
}

#[test]
fn gamma_bounded_at_infinity() {
    // α = 2x², β = 1: γ = y^{-2}/2, θ = 1, Γ(y) − Γ(∞) = −(γ₁/θ) y^{−θ}.
    let an = Analysis::numeric(expr("2*x^2", "1", "exp(-x)"));
    let ginf = an.gamma_at_infinity().unwrap();
    assert_relative_eq!(ginf, 0.5, max_relative = 1e-10);
    for &y in &[0.1, 1.0, 7.0] {
        assert_relative_eq!(an.big_gamma(y).unwrap() - ginf, -0.5 / y, max_relative = 1e-10);
    }
}

#[test]
fn gamma_inverse_roundtrip_numeric() {
    let an = Analysis::numeric(expr("x^2", "1+x^2", "exp(-x/2)"));
    for &y in &[0.05, 0.5, 1.0, 3.0, 40.0] {
        let v = an.big_gamma(y).unwrap();
        assert_relative_eq!(an.big_gamma_inverse(v).unwrap(), y, max_relative = 1e-11);
    }
}

#[test]
fn flow_power_law() {
    // α = 2x^{1/2}: x_t = (x^{1/2} − t)², t₀ = x^{1/2}.
    let m = ModelTriple::new(fam("power", &[("coef", 2.0), ("exponent", 0.5)]).rate(), fam("constant", &[("value", 1.0)]).rate(), fam("exponential-survival", &[("theta", 1.0)]).survival());
    for an in [Analysis::new(m.clone()), Analysis::numeric(m)] {
        assert_relative_eq!(an.t0(4.0).unwrap(), 2.0, max_relative = 1e-10);
        assert_relative_eq!(an.flow(4.0, 0.5).unwrap(), 2.25, max_relative = 1e-10);
        assert_eq!(an.flow(4.0, 2.5).unwrap(), 0.0);
        assert_eq!(an.flow(4.0, 0.0).unwrap(), 4.0);
        assert!(an.t0_finite().unwrap());
    }
}

#[test]
fn flow_constant_rate_and_linear() {
    let an = Analysis::numeric(expr("1.5", "1", "exp(-x)"));
    assert_relative_eq!(an.flow(3.0, 1.0).unwrap(), 1.5, max_relative = 1e-10);
    assert_eq!(an.flow(3.0, 2.5).unwrap(), 0.0);
    let an = Analysis::numeric(expr("2*x", "1", "exp(-x)"));
    assert_relative_eq!(an.time_to_level(3.0, 1.0).unwrap(), 3f64.ln() / 2.0, max_relative = 1e-12);
    assert_eq!(an.t0(3.0).unwrap(), f64::INFINITY);
    assert!(!an.t0_finite().unwrap());
    assert_eq!(an.time_to_level(3.0, 3.0).unwrap(), 0.0);
    assert!(matches!(an.time_to_level(1.0, 2.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn numeric_flow_far_below_table_grid() {
    let an = Analysis::numeric(expr("x", "0.8*x", "exp(-x)"));
    assert_relative_eq!(an.flow(1.0, 150.0).unwrap(), (-150.0f64).exp(), max_relative = 1e-10);
    assert_relative_eq!(an.flow(1e-100, 200.0).unwrap(), 1e-100 * (-200.0f64).exp(), max_relative = 1e-10);
}

#[test]
fn hawkes_scale_function() {
    // γ = γ₁, Γ(y) = γ₁(y − 1): s(x) − s(0) = e^{γ₁} γ₁/(1−γ₁)(e^{(1−γ₁)x} − 1).
    let g1: f64 = 0.8;
    let an = Analysis::new(expr("x", "0.8*x", "exp(-x)"));
    let s0 = an.s_at_zero().unwrap();
    for &x in &[0.1, 1.0, 3.0, 20.0] {
        let want = g1.exp() * g1 / (1.0 - g1) * (((1.0 - g1) * x).exp() - 1.0);
        assert_relative_eq!(an.scale_s(x).unwrap() - s0, want, max_relative = 1e-9);
    }
    assert_eq!(an.scale_s(1.0).unwrap(), 0.0);
    assert_eq!(an.s_at_infinity().unwrap(), f64::INFINITY);
    assert!(matches!(an.scale_s1(1.0), Err(Error::Precondition(_))));
}

#[test]
fn supercritical_hawkes_s1() {
    let g1: f64 = 1.2;
    let an = Analysis::new(expr("x", "1.2*x", "exp(-x)"));
    let sinf = an.s_at_infinity().unwrap();
    assert!(sinf.is_finite());
    for &x in &[0.2, 1.0, 5.0, 30.0] {
        let want = g1.exp() * g1 / (g1 - 1.0) * ((1.0 - g1) * x).exp();
        assert_relative_eq!(an.scale_s1(x).unwrap(), want, max_relative = 1e-9);
        assert_relative_eq!(an.scale_s(x).unwrap() + an.scale_s1(x).unwrap(), sinf, max_relative = 1e-10);
    }
}

#[test]
fn linear_scale_matches_direct_quadrature() {
    let an = Analysis::new(linear(1.0, 0.5, 1.0));
    let f = |y: f64| 0.5 * y.powf(-1.5) * y.exp();
    for &x in &[0.2, 3.0, 10.0] {
        let direct = crate::calculus::integrate(&f, 1.0f64.min(x), 1.0f64.max(x), 1e-12).unwrap().value;
        let direct = if x < 1.0 { -direct } else { direct };
        assert_relative_eq!(an.scale_s(x).unwrap(), direct, max_relative = 1e-10);
    }
}

#[test]
fn speed_density_identity_and_gamma_shape() {
    let an = Analysis::new(linear(1.0, 0.5, 2.0));
    for &y in &[0.01, 0.5, 4.0] {
        let m = an.model();
        let lhs = an.speed_density(y) * m.alpha.evaluate(y) / m.k.evaluate(y);
        assert_relative_eq!(lhs, an.big_gamma(y).unwrap().exp(), max_relative = 1e-13);
        assert_relative_eq!(an.speed_density(y), y.powf(-0.5) * (-2.0 * y).exp(), max_relative = 1e-13);
    }
    assert_eq!(an.pi_integrability().unwrap(), (true, true));
}

#[test]
fn inverse_gaussian_speed_density() {
    // α = x², β = 1, k = e^{−y}: π ∝ y^{−2} e^{−(y + 1/y)}.
    let an = Analysis::numeric(expr("x^2", "1", "exp(-x)"));
    let c = an.speed_density(1.0) / (-2.0f64).exp();
    for &y in &[0.1, 0.7, 3.0] {
        assert_relative_eq!(an.speed_density(y), c * y.powi(-2) * (-(y + 1.0 / y)).exp(), max_relative = 1e-9);
    }
}

#[test]
fn boundary_examples() {
    let hawkes = Analysis::new(expr("x", "0.8*x", "exp(-x)"));
    assert_eq!(hawkes.classify_boundary().unwrap().verdict, BoundaryVerdict::Natural);
    let release = Analysis::new(expr("1", "0.5", "exp(-x)"));
    let b = release.classify_boundary().unwrap();
    assert_eq!(b.verdict, BoundaryVerdict::Regular);
    assert!(b.condition_r && !b.condition_a && b.t0_finite && b.gamma0_finite);
    let lin = Analysis::numeric(linear(1.0, 0.5, 1.0));
    assert_eq!(lin.classify_boundary().unwrap().verdict, BoundaryVerdict::Entrance);
    // k(0) = ∞ makes 0 absorbing.
    let attract = Analysis::new(expr("1", "1", "x^(-2)"));
    let b = attract.classify_boundary().unwrap();
    assert!(b.condition_a && !b.condition_r);
    assert_eq!(b.verdict, BoundaryVerdict::Exit);
}

#[test]
fn regime_examples() {
    let lin = Analysis::new(linear(1.0, 0.5, 1.0)).classify_regime().unwrap();
    assert_eq!(lin.verdict, RegimeVerdict::HarrisPositiveRecurrent);
    let expl = Analysis::new(expr("x^2", "1+x^2", "exp(-x/2)")).classify_regime().unwrap();
    assert_eq!(expl.verdict, RegimeVerdict::TransientOrExplosive);
    assert!(!expl.extinction_possible);
    let sup = Analysis::new(expr("x", "1.2*x", "exp(-x)")).classify_regime().unwrap();
    assert_eq!(sup.verdict, RegimeVerdict::TransientOrExplosive);
    assert!(sup.extinction_possible);
    assert_relative_eq!(sup.gamma_at_0.0, -1.2, max_relative = 1e-10);
    let bounded = Analysis::new(expr("2*x^2", "1", "exp(-x)")).classify_regime().unwrap();
    assert_eq!(bounded.verdict, RegimeVerdict::NoNonconstantScale);
    let json = serde_json::to_value(&lin).unwrap();
    assert_eq!(json["verdict"], "harris_positive_recurrent");
    assert_eq!(json["s_at_inf"], "inf");
    assert_eq!(json["boundary"]["condition_R"], true);
}

#[test]
fn exit_probability_properties() {
    let an = Analysis::new(expr("x^2", "1+x^2", "exp(-x/2)"));
    let (a, b) = (0.5, 4.0);
    assert_eq!(an.exit_probability(a, a, b).unwrap().value, 1.0);
    assert_eq!(an.exit_probability(b, a, b).unwrap().value, 0.0);
    let mut prev = 1.0;
    for x in log_grid(0.5, 4.0, 20) {
        let p = an.exit_probability(x, a, b).unwrap();
        assert!(p.assumes_finite_exit_time);
        assert!((0.0..=1.0).contains(&p.value) && p.value <= prev);
        prev = p.value;
    }
    let below = an.prob_hit_below(1.0, 0.5).unwrap();
    assert!(below < 1.0 && below > an.exit_probability(1.0, a, b).unwrap().value);
    assert!(an.exit_probability(1.0, 2.0, 2.0).is_err());
    let rec = Analysis::new(linear(1.0, 0.5, 1.0));
    assert!(matches!(rec.exit_probability(1.0, 0.5, 4.0), Err(Error::Precondition(_))));
}

#[test]
fn overshoot_exit_probability() {
    // c = E s₁(Y) for Y − b ~ Exp(1/2), by direct quadrature.
    let an = Analysis::numeric(expr("x^2", "1+x^2", "exp(-x/2)"));
    let (a, x, b) = (0.5, 1.0, 4.0);
    let f = |y: f64| 0.5 * (-(y - b) / 2.0).exp() * an.scale_s1(y).unwrap();
    let c = crate::calculus::integrate(&f, b, f64::INFINITY, 1e-11).unwrap().value;
    let (sx, sa) = (an.scale_s1(x).unwrap(), an.scale_s1(a).unwrap());
    let p = an.exit_probability_with_overshoot(x, a, b).unwrap();
    assert_relative_eq!(p, (sx - c) / (sa - c), max_relative = 1e-8);
    assert!(p > an.exit_probability(x, a, b).unwrap().value);
    assert_eq!(an.exit_probability_with_overshoot(a, a, b).unwrap(), 1.0);
    assert_eq!(an.exit_probability_with_overshoot(b, a, b).unwrap(), 0.0);
}

#[test]
fn explosive_s1_matches_direct_quadrature() {
    // Γ(y) = y − 1/y, so s₁(1) = ∫_1^∞ (1 + y^{−2}) e^{−y/2 + 1/y} dy.
    let an = Analysis::numeric(expr("x^2", "1+x^2", "exp(-x/2)"));
    let f = |y: f64| (1.0 + y.powi(-2)) * (-y / 2.0 + 1.0 / y).exp();
    let direct = crate::calculus::integrate(&f, 1.0, f64::INFINITY, 1e-12).unwrap().value;
    assert_relative_eq!(an.scale_s1(1.0).unwrap(), direct, max_relative = 1e-9);
}

#[test]
fn mean_extinction_time_linear_release() {
    let m = expr("1", "0.5", "exp(-x)");
    for an in [Analysis::new(m.clone()), Analysis::numeric(m.without_closed_forms())] {
        let phi = an.mean_extinction_time(2.0).unwrap();
        assert!((phi - 4.0).abs() < 1e-6, "{phi}");
        assert!(phi >= an.t0(2.0).unwrap());
        for &x in &[0.3, 1.0, 5.0] {
            assert_relative_eq!(an.mean_extinction_time(x).unwrap(), 2.0 * x, max_relative = 1e-8);
        }
    }
    let lin = Analysis::new(linear(1.0, 0.5, 1.0));
    assert!(matches!(lin.mean_extinction_time(1.0), Err(Error::Precondition(m)) if m.contains("t₀")));
    let expl = Analysis::new(expr("x^2", "1+x^2", "exp(-x/2)"));
    assert!(matches!(expl.mean_hitting_time(2.0, 1.0), Err(Error::Precondition(_))));
}

#[test]
fn hitting_time_bounds_and_monotonicity() {
    let an = Analysis::new(linear(1.0, 0.5, 1.0));
    let a = 0.5;
    assert_eq!(an.mean_hitting_time(a, a).unwrap(), 0.0);
    let xs = log_grid(0.6, 20.0, 12);
    for w in xs.windows(2) {
        let (x1, x2) = (w[0], w[1]);
        let d = an.mean_hitting_time(x2, a).unwrap() - an.mean_hitting_time(x1, a).unwrap();
        assert!(d >= an.time_to_level(x2, x1).unwrap() * (1.0 - 1e-9));
        assert!(an.mean_hitting_time(x2, a).unwrap() >= an.time_to_level(x2, a).unwrap());
    }
}

#[test]
fn generator_annihilates_scale_and_phi() {
    for m in [linear(1.0, 0.5, 1.0), expr("x", "0.8*x", "exp(-x)")] {
        let an = Analysis::new(m);
        let s = an.scale_handle().unwrap();
        let phi = an.phi_handle(0.5).unwrap();
        for x in log_grid(0.6, 30.0, 8) {
            let gs = generator_apply(&an, &s, x).unwrap();
            let scale = (an.model().alpha.evaluate(x) * an.scale_density(x)).max(1.0);
            assert!(gs.abs() <= 1e-6 * scale, "Gs({x}) = {gs}");
            let gp = generator_apply(&an, &phi, x).unwrap();
            assert!((gp + 1.0).abs() <= 1e-5, "Gφ({x}) = {gp}");
        }
        assert_eq!(generator_apply(&an, &FunctionHandle::constant(3.0), 2.0).unwrap(), 0.0);
    }
}

#[test]
fn numeric_derivative_of_linear_function() {
    let u = FunctionHandle::new(|x| 3.0 * x - 1.0);
    for &x in &[1e-3, 1.0, 1e4] {
        assert!((u.derivative(x) - 3.0).abs() < 1e-9);
    }
}

#[test]
fn lyapunov_examples() {
    // α = 1+x, β = x, k = e^{−2x}, V = eˣ: GV = −eˣ.
    let an = Analysis::new(expr("1+x", "x", "exp(-2*x)"));
    let v = FunctionHandle::new(f64::exp).with_derivative(f64::exp).with_ln_derivative(|x| (1.0, x));
    let grid = log_grid(0.01, 20.0, 15);
    let rep = lyapunov_drift_check(&an, &v, 1.0, 0.0, &grid).unwrap();
    assert!(rep.holds && rep.non_explosion);
    for p in &rep.points {
        assert_relative_eq!(p.drift, -p.x.exp(), max_relative = 1e-8);
        assert_relative_eq!(p.bound, p.x.exp(), max_relative = 1e-15);
    }
    // Numeric derivative route agrees.
    let vn = FunctionHandle::new(f64::exp);
    assert_relative_eq!(generator_apply(&an, &vn, 2.0).unwrap(), -2f64.exp(), max_relative = 1e-6);

    let c = FunctionHandle::constant(1.0);
    assert!(!lyapunov_drift_check(&an, &c, 0.5, 0.0, &grid).unwrap().holds);

    let lin = Analysis::new(linear(1.0, 0.5, 1.0));
    let s = lin.scale_handle().unwrap();
    let v = FunctionHandle::new(|x| 1.0 + s.value(x)).with_derivative(|x| lin.scale_density(x)).with_ln_derivative(|x| (1.0, lin.ln_scale_density(x)));
    let rep = lyapunov_drift_check(&lin, &v, 0.1, 1.0, &log_grid(1.0, 30.0, 10)).unwrap();
    assert!(!rep.holds && rep.non_explosion);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scale_monotone(x in 0.05f64..40.0, dx in 0.01f64..5.0) {
        let an = Analysis::new(expr("x", "1.2*x", "exp(-x)"));
        prop_assert!(an.scale_s(x + dx).unwrap() > an.scale_s(x).unwrap());
        prop_assert!(an.scale_s1(x + dx).unwrap() < an.scale_s1(x).unwrap());
    }

    #[test]
    fn flow_numeric_matches_closed(x in 0.01f64..50.0, t in 0.0f64..3.0) {
        let m = ModelTriple::new(fam("power", &[("coef", 0.7), ("exponent", 1.5)]).rate(), fam("constant", &[("value", 1.0)]).rate(), fam("exponential-survival", &[("theta", 1.0)]).survival());
        let closed = Analysis::new(m.clone()).flow(x, t).unwrap();
        let numeric = NUMERIC_FLOW.with(|an| an.flow(x, t).unwrap());
        prop_assert!((closed - numeric).abs() <= 1e-9 * closed.max(1e-300));
    }
}

thread_local! {
    static NUMERIC_FLOW: Analysis = Analysis::numeric(ModelTriple::from_exprs("0.7*x^1.5", "1", "exp(-x)").unwrap());
}
