//! Dense vector helpers and a restarted GMRES for the Newton corrector.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GmresOpts {
    pub restart: usize,
    pub max_iter: usize,
    /// Stop once `||b - A x|| <= rtol * ||b||`.
    pub rtol: f64,
}

impl Default for GmresOpts {
    fn default() -> Self {
        Self { restart: 60, max_iter: 600, rtol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Right-preconditioned restarted GMRES for `A x = b` from `x = 0`.
///
/// `apply` computes `A v`, `precond` computes `M^{-1} v`; the returned `x` is
/// already mapped back through the preconditioner.
pub fn gmres(
    b: &[f64],
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    opts: GmresOpts,
) -> (Vec<f64>, GmresOutcome) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, GmresOutcome { iterations: 0, residual: 0.0, converged: true });
    }
    let target = opts.rtol * bnorm;
    let mut total = 0;
    let mut r = b.to_vec();
    loop {
        let beta = norm(&r);
        if beta <= target {
            return (x, GmresOutcome { iterations: total, residual: beta / bnorm, converged: true });
        }
        if total >= opts.max_iter {
            return (x, GmresOutcome { iterations: total, residual: beta / bnorm, converged: false });
        }
        let m = opts.restart.min(opts.max_iter - total);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let z = precond(&basis[k]);
            let mut w = apply(&z);
            // Modified Gram-Schmidt, applied twice for stability.
            for _ in 0..2 {
                for (j, q) in basis.iter().enumerate() {
                    let hij = dot(&w, q);
                    h[j][k] += hij;
                    axpy(-hij, q, &mut w);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            if g[k + 1].abs() <= target || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // Back substitution.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut update);
        }
        let dx = precond(&update);
        axpy(1.0, &dx, &mut x);
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    }
}
