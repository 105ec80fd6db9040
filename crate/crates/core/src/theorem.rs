//! Numerical check of the noise-augmentation regularization identity.
//!
//! For a model f and dataset (x, y), training with isotropic zero-mean noise
//! z of variance eta^2 satisfies
//!
//! ```text
//! E_z E_(x,y) ||f(x+z) - y||^2
//!   = E ||f(x) - y||^2
//!   + eta^2 * E [ ||df/dx||_F^2 + 1/2 (f(x)-y)' d2f/dx2 1 ]
//! ```
//!
//! up to higher-order terms in eta. The verifier estimates the left side by
//! Monte Carlo and evaluates the right side from the model's derivatives.
//!
//! The Monte-Carlo estimator uses antithetic pairs (z, -z) and whitens the
//! draws to the identity empirical covariance. Both are moment-matching
//! variance-reduction devices: antithetic pairing cancels every odd moment
//! exactly and whitening pins every second moment to eta^2 I, so the
//! residual gap reflects the Taylor remainder rather than sampling noise in
//! the low moments the identity is written in.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use serde::Serialize;

/// Twice-differentiable model with explicit first derivatives and diagonal
/// second derivatives.
pub trait DifferentiableModel {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major Jacobian, `output_dim x input_dim`.
    fn jacobian(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major diagonal second derivatives d2f_k/dx_i^2, same layout.
    fn second_diag(&self, x: &[f64]) -> Vec<f64>;
}

/// Compare analytic derivatives against central differences; returns the
/// worst relative error, with relative = |a - b| / max(1, |a|, |b|).
pub fn finite_difference_check(model: &dyn DifferentiableModel, x: &[f64], step: f64) -> f64 {
    assert!(step > 0.0, "finite-difference step must be positive");
    let d = model.input_dim();
    let k = model.output_dim();
    let f0 = model.eval(x);
    let jac = model.jacobian(x);
    let sec = model.second_diag(x);
    let mut worst = 0.0f64;
    let rel = |a: f64, b: f64| (a - b).abs() / 1.0f64.max(a.abs()).max(b.abs());
    for i in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += step;
        xm[i] -= step;
        let fp = model.eval(&xp);
        let fm = model.eval(&xm);
        for kk in 0..k {
            let fd_first = (fp[kk] - fm[kk]) / (2.0 * step);
            let fd_second = (fp[kk] - 2.0 * f0[kk] + fm[kk]) / (step * step);
            worst = worst.max(rel(fd_first, jac[kk * d + i]));
            worst = worst.max(rel(fd_second, sec[kk * d + i]));
        }
    }
    worst
}

/// Result of one theorem check at a single eta.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremCheck {
    pub eta: f64,
    /// Monte-Carlo noise-augmented loss.
    pub lhs: f64,
    /// Clean loss plus the eta^2 regularizer.
    pub rhs: f64,
    pub abs_gap: f64,
    /// Standard error of the Monte-Carlo estimate.
    pub mc_std_err: f64,
}

/// Tolerance for the derivative consistency guard (central differences at
/// step 1e-4).
pub const DERIVATIVE_TOLERANCE: f64 = 1e-4;
const FD_STEP: f64 = 1e-4;

/// Verify the identity on a dataset at one noise level.
///
/// `n_mc` counts total noise draws (rounded up to a multiple of two for
/// antithetic pairing). The same `rng` state reused across eta values gives
/// common random numbers, making the gap smooth in eta.
pub fn verify_theorem(
    model: &dyn DifferentiableModel,
    dataset: &[(Vec<f64>, Vec<f64>)],
    eta: f64,
    n_mc: usize,
    rng: &mut SeededRng,
) -> Result<TheoremCheck> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Argument("eta must be positive".into()));
    }
    if n_mc < 1000 {
        return Err(Error::Argument("n_mc must be at least 1000".into()));
    }
    if dataset.is_empty() {
        return Err(Error::Argument("empty dataset".into()));
    }
    let d = model.input_dim();
    let k = model.output_dim();
    for (x, y) in dataset {
        if x.len() != d || y.len() != k {
            return Err(Error::Shape("dataset entry dimensions mismatch model".into()));
        }
    }

    // Derivative consistency guard.
    for (x, _) in dataset {
        let err = finite_difference_check(model, x, FD_STEP);
        if err > DERIVATIVE_TOLERANCE {
            return Err(Error::Model(format!(
                "analytic derivatives disagree with finite differences: {err:.3e}"
            )));
        }
    }

    // Right side: clean loss + eta^2 * (||J||_F^2 + 1/2 (f-y)' s 1).
    let mut clean_loss = 0.0;
    let mut regularizer = 0.0;
    for (x, y) in dataset {
        let f = model.eval(x);
        let jac = model.jacobian(x);
        let sec = model.second_diag(x);
        clean_loss += f
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        let jac_sq: f64 = jac.iter().map(|v| v * v).sum();
        let mut hess_term = 0.0;
        for kk in 0..k {
            let row_sum: f64 = sec[kk * d..(kk + 1) * d].iter().sum();
            hess_term += (f[kk] - y[kk]) * row_sum;
        }
        regularizer += jac_sq + 0.5 * hess_term;
    }
    let n_data = dataset.len() as f64;
    clean_loss /= n_data;
    regularizer /= n_data;
    let rhs = clean_loss + eta * eta * regularizer;

    // Left side: antithetic, covariance-whitened Monte Carlo.
    let n_pairs = n_mc.div_ceil(2);
    let mut base = vec![0.0f64; n_pairs * d];
    for v in &mut base {
        *v = rng.normal();
    }
    whiten(&mut base, n_pairs, d);

    let mut pair_means = Vec::with_capacity(n_pairs);
    let mut x_plus = vec![0.0f64; d];
    let mut x_minus = vec![0.0f64; d];
    for p in 0..n_pairs {
        let z = &base[p * d..(p + 1) * d];
        let mut acc = 0.0;
        for (x, y) in dataset {
            for i in 0..d {
                x_plus[i] = x[i] + eta * z[i];
                x_minus[i] = x[i] - eta * z[i];
            }
            let fp = model.eval(&x_plus);
            let fm = model.eval(&x_minus);
            let lp: f64 = fp.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            let lm: f64 = fm.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            acc += 0.5 * (lp + lm);
        }
        pair_means.push(acc / n_data);
    }
    let lhs = pair_means.iter().sum::<f64>() / n_pairs as f64;
    let mc_var = if n_pairs > 1 {
        pair_means
            .iter()
            .map(|v| (v - lhs) * (v - lhs))
            .sum::<f64>()
            / (n_pairs as f64 - 1.0)
    } else {
        0.0
    };
    let mc_std_err = (mc_var / n_pairs as f64).sqrt();

    Ok(TheoremCheck {
        eta,
        lhs,
        rhs,
        abs_gap: (lhs - rhs).abs(),
        mc_std_err,
    })
}

/// Transform draws so the empirical second-moment matrix is exactly the
/// identity: compute C = mean(u u'), Cholesky-factor C = L L', and replace
/// each u by the solution of L v = u. The antithetic mean is already zero.
/// Falls back to per-coordinate scaling if C is numerically singular.
fn whiten(base: &mut [f64], n_pairs: usize, d: usize) {
    let mut cov = vec![0.0f64; d * d];
    for p in 0..n_pairs {
        let u = &base[p * d..(p + 1) * d];
        for i in 0..d {
            for j in 0..=i {
                cov[i * d + j] += u[i] * u[j];
            }
        }
    }
    for v in &mut cov {
        *v /= n_pairs as f64;
    }
    // Cholesky, lower triangle.
    let mut l = vec![0.0f64; d * d];
    let mut ok = true;
    'chol: for i in 0..d {
        for j in 0..=i {
            let mut sum = cov[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if sum <= 1e-12 {
                    ok = false;
                    break 'chol;
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    if ok {
        for p in 0..n_pairs {
            let u = &mut base[p * d..(p + 1) * d];
            // Forward substitution, in place.
            for i in 0..d {
                let mut v = u[i];
                for k in 0..i {
                    v -= l[i * d + k] * u[k];
                }
                u[i] = v / l[i * d + i];
            }
        }
    } else {
        for i in 0..d {
            let std = (cov[i * d + i]).sqrt();
            if std > 0.0 {
                for p in 0..n_pairs {
                    base[p * d + i] /= std;
                }
            }
        }
    }
}

/// Least-squares slope of log(gap) against log(eta).
pub fn log_log_slope(checks: &[TheoremCheck]) -> f64 {
    let pts: Vec<(f64, f64)> = checks
        .iter()
        .filter(|c| c.abs_gap > 0.0)
        .map(|c| (c.eta.ln(), c.abs_gap.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    num / den
}

// ---------------------------------------------------------------------------
// Built-in models
// ---------------------------------------------------------------------------

/// f(x) = W x.
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub d: usize,
    pub k: usize,
}

impl LinearModel {
    pub fn random(d: usize, k: usize, rng: &mut SeededRng) -> LinearModel {
        LinearModel {
            weights: (0..d * k).map(|_| rng.normal()).collect(),
            d,
            k,
        }
    }
}

impl DifferentiableModel for LinearModel {
    fn input_dim(&self) -> usize {
        self.d
    }
    fn output_dim(&self) -> usize {
        self.k
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|kk| {
                (0..self.d)
                    .map(|i| self.weights[kk * self.d + i] * x[i])
                    .sum()
            })
            .collect()
    }
    fn jacobian(&self, _x: &[f64]) -> Vec<f64> {
        self.weights.clone()
    }
    fn second_diag(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.k * self.d]
    }
}

/// f(x) = c, ignoring the input.
pub struct ConstantModel {
    pub c: Vec<f64>,
    pub d: usize,
}

impl DifferentiableModel for ConstantModel {
    fn input_dim(&self) -> usize {
        self.d
    }
    fn output_dim(&self) -> usize {
        self.c.len()
    }
    fn eval(&self, _x: &[f64]) -> Vec<f64> {
        self.c.clone()
    }
    fn jacobian(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.c.len() * self.d]
    }
    fn second_diag(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.c.len() * self.d]
    }
}

/// Scalar monomial f(x) = x^p for p = 2 or 3.
pub struct MonomialModel {
    pub power: u32,
}

impl DifferentiableModel for MonomialModel {
    fn input_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0].powi(self.power as i32)]
    }
    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        vec![self.power as f64 * x[0].powi(self.power as i32 - 1)]
    }
    fn second_diag(&self, x: &[f64]) -> Vec<f64> {
        let p = self.power as f64;
        vec![p * (p - 1.0) * x[0].powi(self.power as i32 - 2)]
    }
}

/// One-hidden-layer tanh network with fixed random weights.
pub struct MlpTiny {
    pub d: usize,
    pub h: usize,
    pub k: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl MlpTiny {
    pub fn seeded(d: usize, h: usize, k: usize, rng: &mut SeededRng) -> MlpTiny {
        let scale1 = 1.0 / (d as f64).sqrt();
        let scale2 = 1.0 / (h as f64).sqrt();
        MlpTiny {
            d,
            h,
            k,
            w1: (0..h * d).map(|_| rng.normal() * scale1).collect(),
            b1: (0..h).map(|_| rng.normal() * 0.1).collect(),
            w2: (0..k * h).map(|_| rng.normal() * scale2).collect(),
            b2: (0..k).map(|_| rng.normal() * 0.1).collect(),
        }
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        (0..self.h)
            .map(|j| {
                let pre: f64 = (0..self.d).map(|i| self.w1[j * self.d + i] * x[i]).sum();
                (pre + self.b1[j]).tanh()
            })
            .collect()
    }
}

impl DifferentiableModel for MlpTiny {
    fn input_dim(&self) -> usize {
        self.d
    }
    fn output_dim(&self) -> usize {
        self.k
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let t = self.hidden(x);
        (0..self.k)
            .map(|kk| {
                self.b2[kk] + (0..self.h).map(|j| self.w2[kk * self.h + j] * t[j]).sum::<f64>()
            })
            .collect()
    }
    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let t = self.hidden(x);
        let mut jac = vec![0.0; self.k * self.d];
        for kk in 0..self.k {
            for i in 0..self.d {
                jac[kk * self.d + i] = (0..self.h)
                    .map(|j| {
                        self.w2[kk * self.h + j] * (1.0 - t[j] * t[j]) * self.w1[j * self.d + i]
                    })
                    .sum();
            }
        }
        jac
    }
    fn second_diag(&self, x: &[f64]) -> Vec<f64> {
        // d2 tanh(a'x+b)/dx_i^2 = -2 t (1-t^2) a_i^2
        let t = self.hidden(x);
        let mut sec = vec![0.0; self.k * self.d];
        for kk in 0..self.k {
            for i in 0..self.d {
                sec[kk * self.d + i] = (0..self.h)
                    .map(|j| {
                        let a = self.w1[j * self.d + i];
                        self.w2[kk * self.h + j] * (-2.0 * t[j] * (1.0 - t[j] * t[j])) * a * a
                    })
                    .sum();
            }
        }
        sec
    }
}

/// Dataset with y = f(x): the perfect-fit regime where the identity is exact
/// through second order.
pub fn perfect_fit_dataset(model: &dyn DifferentiableModel, xs: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
    xs.iter().map(|x| (x.clone(), model.eval(x))).collect()
}

/// Random dataset with independent Gaussian x and y.
pub fn random_dataset(d: usize, k: usize, n: usize, rng: &mut SeededRng) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..n)
        .map(|_| {
            (
                (0..d).map(|_| rng.normal()).collect(),
                (0..k).map(|_| rng.normal()).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_check_linear_model() {
        let mut rng = SeededRng::new(1, 0);
        let model = LinearModel::random(4, 3, &mut rng);
        let x = vec![0.3, -0.8, 1.2, 0.05];
        // Analytic second derivatives are exactly zero.
        assert!(model.second_diag(&x).iter().all(|v| *v == 0.0));
        // First derivatives match central differences to rounding level.
        let step = 1e-4;
        let jac = model.jacobian(&x);
        for i in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += step;
            xm[i] -= step;
            let (fp, fm) = (model.eval(&xp), model.eval(&xm));
            for kk in 0..3 {
                let fd = (fp[kk] - fm[kk]) / (2.0 * step);
                assert!((fd - jac[kk * 4 + i]).abs() < 1e-8, "({kk},{i})");
            }
        }
        // Combined check (first + second differences) stays within the
        // model-guard tolerance; the second-difference quotient carries
        // ~1e-8 of rounding noise at this step.
        let err = finite_difference_check(&model, &x, step);
        assert!(err < DERIVATIVE_TOLERANCE, "err {err}");
    }

    #[test]
    fn fd_check_quadratic_recovers_second_derivative() {
        let model = MonomialModel { power: 2 };
        let x = vec![2.0];
        assert_eq!(model.second_diag(&x), vec![2.0]);
        let err = finite_difference_check(&model, &x, 1e-4);
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn fd_check_cubic_at_one() {
        let model = MonomialModel { power: 3 };
        let err = finite_difference_check(&model, &[1.0], 1e-4);
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn fd_check_mlp() {
        let mut rng = SeededRng::new(2, 0);
        let model = MlpTiny::seeded(3, 8, 2, &mut rng);
        let err = finite_difference_check(&model, &[0.2, -0.4, 0.9], 1e-4);
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn broken_derivatives_rejected() {
        struct Broken;
        impl DifferentiableModel for Broken {
            fn input_dim(&self) -> usize {
                1
            }
            fn output_dim(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64]) -> Vec<f64> {
                vec![x[0] * x[0]]
            }
            fn jacobian(&self, x: &[f64]) -> Vec<f64> {
                vec![3.0 * x[0]] // wrong on purpose
            }
            fn second_diag(&self, _x: &[f64]) -> Vec<f64> {
                vec![2.0]
            }
        }
        let data = vec![(vec![1.0], vec![1.0])];
        let mut rng = SeededRng::new(3, 0);
        match verify_theorem(&Broken, &data, 0.1, 1000, &mut rng) {
            Err(Error::Model(_)) => {}
            other => panic!("expected model error, got {other:?}"),
        }
    }

    #[test]
    fn linear_identity_within_three_standard_errors() {
        let mut model_rng = SeededRng::new(4, 0);
        for trial in 0..20 {
            let model = LinearModel::random(4, 3, &mut model_rng);
            let mut data_rng = SeededRng::new(5, trial);
            let dataset = random_dataset(4, 3, 8, &mut data_rng);
            let mut mc_rng = SeededRng::new(6, trial);
            let check = verify_theorem(&model, &dataset, 0.1, 100_000, &mut mc_rng).unwrap();
            assert!(
                check.abs_gap <= 3.0 * check.mc_std_err.max(1e-12),
                "trial {trial}: gap {} se {}",
                check.abs_gap,
                check.mc_std_err
            );
        }
    }

    #[test]
    fn constant_model_reduces_to_clean_loss() {
        let model = ConstantModel {
            c: vec![0.7, -0.2],
            d: 3,
        };
        let dataset = vec![
            (vec![0.1, 0.2, 0.3], vec![1.0, 0.0]),
            (vec![-0.5, 0.0, 0.8], vec![0.5, 0.5]),
        ];
        let mut rng = SeededRng::new(7, 0);
        let check = verify_theorem(&model, &dataset, 0.2, 2000, &mut rng).unwrap();
        assert!((check.lhs - check.rhs).abs() < 1e-12);
        let clean: f64 = dataset
            .iter()
            .map(|(_, y)| {
                model
                    .c
                    .iter()
                    .zip(y.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / 2.0;
        assert!((check.rhs - clean).abs() < 1e-12);
    }

    #[test]
    fn cubic_gap_scales_as_eta_cubed_or_better() {
        let model = MonomialModel { power: 3 };
        let xs: Vec<Vec<f64>> = [-1.0, -0.5, 0.25, 0.75, 1.0]
            .iter()
            .map(|v| vec![*v])
            .collect();
        let dataset = perfect_fit_dataset(&model, &xs);
        let base_rng = SeededRng::new(8, 0);
        let checks: Vec<TheoremCheck> = [0.1, 0.05, 0.025]
            .iter()
            .map(|eta| {
                let mut rng = base_rng.clone();
                verify_theorem(&model, &dataset, *eta, 200_000, &mut rng).unwrap()
            })
            .collect();
        let slope = log_log_slope(&checks);
        assert!(slope >= 2.5, "slope {slope}");
    }

    #[test]
    fn gap_monotone_as_eta_halves() {
        let mut rng = SeededRng::new(9, 0);
        let mlp = MlpTiny::seeded(3, 8, 2, &mut rng);
        let xs: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| rng.normal() * 0.5).collect())
            .collect();
        type ModelCase = (Box<dyn DifferentiableModel>, Vec<Vec<f64>>);
        let smooth_models: Vec<ModelCase> = vec![
            (Box::new(MonomialModel { power: 2 }), vec![vec![0.8], vec![-0.6]]),
            (Box::new(MonomialModel { power: 3 }), vec![vec![0.9], vec![0.4]]),
            (Box::new(mlp), xs),
        ];
        for (model, points) in &smooth_models {
            let dataset = perfect_fit_dataset(model.as_ref(), points);
            let base_rng = SeededRng::new(10, 1);
            let mut prev = f64::INFINITY;
            for eta in [0.2, 0.1, 0.05] {
                let mut rng = base_rng.clone();
                let check = verify_theorem(model.as_ref(), &dataset, eta, 50_000, &mut rng).unwrap();
                assert!(
                    check.abs_gap <= prev,
                    "gap not monotone: {} after {prev} at eta {eta}",
                    check.abs_gap
                );
                prev = check.abs_gap;
            }
        }
    }

    #[test]
    fn argument_validation() {
        let model = MonomialModel { power: 2 };
        let data = vec![(vec![1.0], vec![1.0])];
        let mut rng = SeededRng::new(11, 0);
        assert!(verify_theorem(&model, &data, 0.0, 2000, &mut rng).is_err());
        assert!(verify_theorem(&model, &data, 0.1, 10, &mut rng).is_err());
        assert!(verify_theorem(&model, &[], 0.1, 2000, &mut rng).is_err());
    }
}
