mod common;

use common::{asymmetric, ground_state, params, rel};
use fracnls::coupled::{energy, symmetric_oracle, symmetric_system};
use fracnls::fiber::{
    dilate, dilate_pair, fiber_energy_scalar, optimal_fiber_param, pohozaev_scalar, project_to_f, rayleigh,
    rayleigh_scalar, system_g, FiberCurve,
};
use fracnls::scalar::{scalar_energy, scaled_solution, unit_lambda_coupling};
use fracnls::spectral::{hs_seminorm_sq, lp_integral, mass};
use fracnls::{Error, Field, Grid};
use proptest::prelude::*;

const S: f64 = 0.45;
const P: f64 = 2.5;

fn bump(grid: Grid, amp: f64, width: f64, shift: f64) -> Field {
    Field::from_fn(grid, |x| amp / (1.0 + ((x[0] - shift) / width).powi(2)).powi(2)).unwrap()
}

fn positive_field() -> impl Strategy<Value = Field> {
    (0.3f64..2.0, 0.5f64..3.0, -2.0f64..2.0, 0.0f64..0.5).prop_map(|(amp, width, shift, second)| {
        let grid = Grid::new(1, 1024, 80.0).unwrap();
        let a = bump(grid, amp, width, shift);
        let b = Field::gaussian(grid, second, 1.0);
        Field::new(grid, a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilation_scaling_laws(u in positive_field(), l in -2.0f64..2.0) {
        let d = dilate(&u, l, S);
        prop_assert_eq!(d.grid().m, u.grid().m);
        prop_assert!(rel(mass(&d), mass(&u)) < 1e-12);
        let k_ratio = hs_seminorm_sq(&d, S) / hs_seminorm_sq(&u, S);
        prop_assert!(rel(k_ratio, (2.0 * S * S * l).exp()) < 1e-10);
        let b_ratio = lp_integral(&d, 2.0 * P).unwrap() / lp_integral(&u, 2.0 * P).unwrap();
        prop_assert!(rel(b_ratio, ((P - 1.0) * S * l).exp()) < 1e-10);
    }

    #[test]
    fn group_action(u in positive_field(), l1 in -1.5f64..1.5, l2 in -1.5f64..1.5) {
        let twice = dilate(&dilate(&u, l1, S), l2, S);
        let once = dilate(&u, l1 + l2, S);
        prop_assert!(rel(twice.grid().l, once.grid().l) < 1e-14);
        let d = twice.values().iter().zip(once.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(d <= 1e-13 * once.max_abs());
    }

    #[test]
    fn fiber_sign_pattern(u in positive_field(), mu in 0.2f64..3.0) {
        let curve = FiberCurve::scalar(&u, mu, &params()).unwrap();
        let l0 = curve.argmax().unwrap();
        prop_assert!(curve.second_derivative(l0) < 0.0);
        for i in 1..=50 {
            let step = 0.1 * i as f64;
            prop_assert!(curve.derivative(l0 - step) > 0.0);
            prop_assert!(curve.derivative(l0 + step) < 0.0);
        }
    }

    #[test]
    fn argmax_matches_a_fine_scan(u in positive_field(), mu in 0.2f64..3.0) {
        let l0 = optimal_fiber_param(&u, mu, &params()).unwrap();
        let (k, b) = (hs_seminorm_sq(&u, S), mu * lp_integral(&u, 2.0 * P).unwrap());
        let f = |l: f64| 0.5 * (2.0 * S * S * l).exp() * k - ((P - 1.0) * S * l).exp() * b / (2.0 * P);
        let centre = l0.round();
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=60_000 {
            let l = centre - 3.0 + 1e-4 * i as f64;
            let v = f(l);
            if v > best.0 {
                best = (v, l);
            }
        }
        prop_assert!((best.1 - l0).abs() <= 2e-4, "scan {} vs {}", best.1, l0);
    }

    #[test]
    fn fiber_energy_is_the_energy_of_the_dilate(u in positive_field(), mu in 0.2f64..3.0, l in -2.0f64..2.0) {
        let direct = scalar_energy(&dilate(&u, l, S), mu, S, P).unwrap();
        let closed = fiber_energy_scalar(&u, mu, l, &params()).unwrap();
        prop_assert!((direct - closed).abs() <= 1e-10 * direct.abs().max(hs_seminorm_sq(&u, S)));
    }

    #[test]
    fn rayleigh_is_dilation_invariant(u in positive_field(), v in positive_field(), l in -2.0f64..2.0) {
        let sys = asymmetric(0.7);
        let (du, dv) = dilate_pair(&u, &v, l, S);
        prop_assert!(rel(rayleigh(&du, &dv, &sys).unwrap(), rayleigh(&u, &v, &sys).unwrap()) < 1e-10);
    }

    #[test]
    fn projection_lands_on_the_manifold(u in positive_field(), v in positive_field(), beta in 0.0f64..3.0) {
        let sys = asymmetric(beta);
        let (l, pu, pv) = project_to_f(&u, &v, &sys).unwrap();
        let k = hs_seminorm_sq(&pu, S) + hs_seminorm_sq(&pv, S);
        prop_assert!(system_g(&pu, &pv, &sys).unwrap().abs() <= 1e-10 * k);
        prop_assert!(rel(energy(&pu, &pv, &sys).unwrap(), rayleigh(&pu, &pv, &sys).unwrap()) < 1e-8);
        // Already projected: the parameter is zero.
        let (again, _, _) = project_to_f(&pu, &pv, &sys).unwrap();
        prop_assert!(again.abs() < 1e-10);
        // Undo a known dilation.
        let (qu, qv) = dilate_pair(&pu, &pv, 0.8, S);
        let (back, _, _) = project_to_f(&qu, &qv, &sys).unwrap();
        prop_assert!((back + 0.8).abs() < 1e-8);
        prop_assert!(l.is_finite());
    }
}

#[test]
fn projected_point_is_the_strict_fiber_maximum() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let grid = Grid::new(1, 1024, 80.0).unwrap();
    let sys = asymmetric(1.1);
    for _ in 0..20 {
        let u = bump(grid, rng.gen_range(0.3..2.0), rng.gen_range(0.5..3.0), rng.gen_range(-2.0..2.0));
        let v = bump(grid, rng.gen_range(0.3..2.0), rng.gen_range(0.5..3.0), rng.gen_range(-2.0..2.0));
        let (_, pu, pv) = project_to_f(&u, &v, &sys).unwrap();
        let top = energy(&pu, &pv, &sys).unwrap();
        for j in 0..50 {
            let l = -2.5 + 0.1 * j as f64 + 0.05;
            let (du, dv) = dilate_pair(&pu, &pv, l, S);
            assert!(energy(&du, &dv, &sys).unwrap() < top);
        }
    }
}

#[test]
fn scaled_solutions_sit_on_their_manifold() {
    let gs = ground_state(4096, 120.0);
    for (a, mu) in [(0.7, 0.5), (1.0, 1.0), (1.3, 2.0)] {
        let w = scaled_solution(a, mu, &gs).unwrap().w;
        let k = hs_seminorm_sq(&w, S);
        // Bounded by the Pohozaev defect of the grid profile.
        let defect = pohozaev_scalar(&w, mu, &params()).unwrap();
        assert!(defect.abs() <= 1.01 * gs.residual_pohozaev * k);
        let l0 = optimal_fiber_param(&w, mu, &params()).unwrap();
        let bound = 2.0 * gs.residual_pohozaev / (S * 0.6);
        assert!(l0.abs() < bound);
        let shifted = optimal_fiber_param(&dilate(&w, 0.7, S), mu, &params()).unwrap();
        assert!((shifted - (l0 - 0.7)).abs() < 1e-12);

        // Doubling the amplitude scales the kinetic term by 4 and the
        // nonlinear term by 2^{2p}.
        let twice = w.scaled(2.0);
        let d2 = pohozaev_scalar(&twice, mu, &params()).unwrap();
        assert!(d2.abs() > 1e-2 * hs_seminorm_sq(&twice, S));
    }
    assert_eq!(pohozaev_scalar(&Field::zeros(*gs.grid()), 1.0, &params()).unwrap(), 0.0);
}

#[test]
fn ground_state_fiber_is_maximal_at_zero_on_a_large_box() {
    let gs = ground_state(1 << 19, 7000.0);
    let e = gs.exponents();
    let w = scaled_solution(1.0, 1.3, &gs).unwrap().w;
    let l0 = optimal_fiber_param(&w, 1.3, &params()).unwrap();
    assert!(l0.abs() < 1e-6, "{l0:e}");
    // Scalar Rayleigh quotient equals the energy at the unit-multiplier coupling.
    let mu0 = unit_lambda_coupling(&e, gs.c0, 1.0);
    let w0 = scaled_solution(1.0, mu0, &gs).unwrap().w;
    let r = rayleigh_scalar(&w0, mu0, &params()).unwrap();
    assert!(rel(r, scalar_energy(&w0, mu0, S, P).unwrap()) < 1e-6);
}

#[test]
fn rayleigh_reduces_to_the_scalar_quotient() {
    let gs = ground_state(2048, 60.0);
    let e = gs.exponents();
    let mu0 = unit_lambda_coupling(&e, gs.c0, 1.0);
    let sys = fracnls::SystemParams::new(params(), mu0, 1.0, 0.9, 1.0, 1.0).unwrap();
    let u = gs.w0.clone();
    let zero = Field::zeros(*u.grid());
    let coupled = rayleigh(&u, &zero, &sys).unwrap();
    assert!(rel(coupled, rayleigh_scalar(&u, mu0, &params()).unwrap()) < 1e-12);
    // With one component zero the coupled manifold is the scalar one.
    let (l, _, _) = project_to_f(&u, &zero, &sys).unwrap();
    assert!(rel(l, optimal_fiber_param(&u, mu0, &params()).unwrap()) < 1e-12);
}

#[test]
fn fiber_limits_and_errors() {
    let grid = Grid::new(1, 512, 60.0).unwrap();
    let u = bump(grid, 3.5, 1.0, 0.0);
    let i0 = scalar_energy(&u, 1.0, S, P).unwrap();
    let far = fiber_energy_scalar(&u, 1.0, -10.0, &params()).unwrap();
    assert!(far > 0.0 && far < 1e-3 * i0.abs());
    assert!(rel(fiber_energy_scalar(&u, 1.0, 0.0, &params()).unwrap(), i0) < 1e-14);
    assert!(matches!(optimal_fiber_param(&Field::zeros(grid), 1.0, &params()), Err(Error::ZeroField)));
    let zero = Field::zeros(grid);
    assert!(matches!(project_to_f(&zero, &zero, &asymmetric(1.0)), Err(Error::DegeneratePair(_) | Error::ZeroField)));
    assert_eq!(dilate(&u, 0.0, S), u);
}

#[test]
fn pohozaev_functional_of_the_symmetric_pair() {
    let gs = ground_state(4096, 120.0);
    let oracle = symmetric_oracle(1.0, 1.0, 0.4, &gs).unwrap();
    let sys = symmetric_system(params(), 1.0, 1.0, 0.4).unwrap();
    let k = 2.0 * hs_seminorm_sq(&oracle.u, S);
    assert!(system_g(&oracle.u, &oracle.v, &sys).unwrap().abs() <= 1.01 * gs.residual_pohozaev * k);
    let zero = Field::zeros(*oracle.u.grid());
    assert_eq!(system_g(&zero, &zero, &sys).unwrap(), 0.0);
    let other = bump(*oracle.u.grid(), 1.0, 2.0, 0.0);
    assert!(system_g(&other, &oracle.v, &sys).unwrap().abs() > 1e-3);
}
