mod common;

use common::{exps, params, rel};
use fracnls::thresholds::{beta1, beta1_residual, beta2, beta2_residual, classify, regime_sweep_csv, Regime};
use fracnls::{ProblemParams, SystemParams};

/// Plain bisection to `tol` on `[0, hi]` for a decreasing function.
fn oracle_root(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn weights(n: f64, s: f64, p: f64, mu: [f64; 2], a: [f64; 2]) -> [f64; 2] {
    let (_, sigma, tau, _) = exps(n, s, p);
    [a[0].powf(-tau) * mu[0].powf(-sigma), a[1].powf(-tau) * mu[1].powf(-sigma)]
}

fn beta1_eq(n: f64, s: f64, p: f64, mu: [f64; 2], a: [f64; 2], b: f64) -> f64 {
    let w = weights(n, s, p, mu, a);
    let at = weights(n, s, p, [mu[0] + b, mu[1] + b], a);
    at[0] + at[1] - w[0].max(w[1])
}

fn beta2_eq(n: f64, s: f64, p: f64, mu: [f64; 2], a: [f64; 2], b: f64) -> f64 {
    let (d, sigma, _, pn) = exps(n, s, p);
    let w = weights(n, s, p, mu, a);
    let denom = mu[0] * a[0].powf(2.0 * p) + 2.0 * b * (a[0] * a[1]).powf(p) + mu[1] * a[1].powf(2.0 * p);
    (a[0] * a[0] + a[1] * a[1]).powf(pn / d) / denom.powf(sigma) - w[0].min(w[1])
}

fn sys(mu: [f64; 2], a: [f64; 2]) -> SystemParams {
    SystemParams::new(params(), mu[0], mu[1], 0.0, a[0], a[1]).unwrap()
}

#[test]
fn beta1_against_independent_bisection() {
    let (mu, a) = ([1.0, 2.0], [1.0, 1.0]);
    let oracle = oracle_root(|b| beta1_eq(1.0, 0.45, 2.5, mu, a, b), 1e-15);
    let got = beta1(&sys(mu, a));
    assert!(rel(got, oracle) < 1e-12, "{got} vs {oracle}");
    let w = weights(1.0, 0.45, 2.5, mu, a);
    assert!(beta1_eq(1.0, 0.45, 2.5, mu, a, got).abs() / w[0].max(w[1]) < 1e-12);
}

#[test]
fn beta2_against_independent_bisection() {
    let (mu, a) = ([1.0, 2.0], [1.0, 1.5]);
    let oracle = oracle_root(|b| beta2_eq(1.0, 0.45, 2.5, mu, a, b), 1e-15);
    let got = beta2(&sys(mu, a)).unwrap();
    assert!(rel(got, oracle) < 1e-12, "{got} vs {oracle}");
    let w = weights(1.0, 0.45, 2.5, mu, a);
    assert!(beta2_eq(1.0, 0.45, 2.5, mu, a, got).abs() / w[0].min(w[1]) < 1e-12);
}

#[test]
fn symmetric_closed_forms() {
    // Both equations reduce to 2 (mu + beta)^{-sigma} = mu^{-sigma}
    // (the powers of a cancel), so beta1 = beta2 = mu (2^{1/sigma} - 1).
    for (n, s, p) in [(1usize, 0.45, 2.5), (1, 0.3, 2.0), (2, 0.8, 1.9), (3, 0.9, 2.0)] {
        let params = ProblemParams::new(n, s, p).unwrap();
        let (d, _, _, _) = exps(n as f64, s, p);
        for mu in [0.5, 1.0, 3.0] {
            for a in [0.6, 1.0, 1.7] {
                let sys = SystemParams::new(params, mu, mu, 0.0, a, a).unwrap();
                let exact = mu * (2f64.powf(d / (2.0 * s)) - 1.0);
                assert!(rel(beta1(&sys), exact) < 1e-12);
                assert!(rel(beta2(&sys).unwrap(), exact) < 1e-12);
            }
        }
    }
}

#[test]
fn residuals_on_a_parameter_lattice() {
    for mu1 in [0.5, 1.0, 2.0] {
        for mu2 in [0.5, 1.0, 3.0] {
            for a2 in [0.8, 1.0, 1.2, 1.5] {
                let sys = sys([mu1, mu2], [1.0, a2]);
                let rep = classify(&sys);
                assert!(rep.residual1 < 1e-12);
                assert!(beta1_residual(&sys, rep.beta1) < 1e-12);
                if let Some(b2) = rep.beta2 {
                    assert!(beta2_residual(&sys, b2) < 1e-12);
                    // The root brackets the sign change.
                    let eq = |b: f64| beta2_eq(1.0, 0.45, 2.5, [mu1, mu2], [1.0, a2], b);
                    assert!(eq(b2 * (1.0 - 1e-9)) > 0.0 && eq(b2 * (1.0 + 1e-9)) < 0.0);
                }
                let eq = |b: f64| beta1_eq(1.0, 0.45, 2.5, [mu1, mu2], [1.0, a2], b);
                assert!(eq(rep.beta1 * (1.0 - 1e-9)) > 0.0 && eq(rep.beta1 * (1.0 + 1e-9)) < 0.0);
            }
        }
    }
}

#[test]
fn symmetric_beta1_scales_with_the_couplings() {
    let base = beta1(&sys([1.0, 1.0], [1.0, 1.0]));
    for c in [0.5, 2.0, 10.0] {
        assert!(rel(beta1(&sys([c, c], [1.0, 1.0])), c * base) < 1e-12);
    }
}

#[test]
fn beta1_nondecreasing_in_the_smaller_coupling() {
    for a2 in [0.8, 1.0, 1.3] {
        for mu2 in [0.5, 1.0, 4.0] {
            let values: Vec<(f64, f64)> = [0.2, 0.5, 1.0, 2.0, 4.0]
                .into_iter()
                .map(|mu1: f64| (mu1.min(mu2), beta1(&sys([mu1, mu2], [1.0, a2]))))
                .collect();
            for pair in values.windows(2) {
                if pair[1].0 > pair[0].0 {
                    assert!(pair[1].1 >= pair[0].1 * (1.0 - 1e-12), "{values:?}");
                }
            }
        }
    }
}

#[test]
fn classification_examples() {
    let base = sys([1.0, 2.0], [1.0, 1.2]);
    let b1 = beta1(&base);
    let b2 = beta2(&base).unwrap();
    assert!(b1 < b2);
    assert_eq!(classify(&base.with_beta(0.5 * b1)).regime, Regime::BelowBeta1);
    assert_eq!(classify(&base.with_beta(2.0 * b1.max(b2))).regime, Regime::AboveBeta2);
    assert_eq!(classify(&base.with_beta(0.5 * (b1 + b2))).regime, Regime::Between);
}

#[test]
fn missing_beta2_root_is_degenerate() {
    // Very unequal masses: the right side at zero coupling is already too small.
    let sys = sys([1.0, 1.0], [1.0, 4.0]);
    let w = weights(1.0, 0.45, 2.5, [1.0, 1.0], [1.0, 4.0]);
    let rhs0 = beta2_eq(1.0, 0.45, 2.5, [1.0, 1.0], [1.0, 4.0], 0.0) + w[0].min(w[1]);
    if rhs0 <= w[0].min(w[1]) {
        assert!(beta2(&sys).is_err());
        assert_eq!(classify(&sys.with_beta(10.0)).regime, Regime::Degenerate);
    } else {
        assert!(beta2(&sys).is_ok());
    }
}

#[test]
fn sweep_rows() {
    let csv = regime_sweep_csv(&sys([1.0, 2.0], [1.0, 1.2]), 0.0, 3.0, 17);
    assert_eq!(csv.lines().count(), 18);
}
