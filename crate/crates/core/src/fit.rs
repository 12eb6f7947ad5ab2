//! Nonlinear least squares for the correlation-decay model families:
//! oscillatory power-law decay ρ0 + A cos(B d)/d^(1+δ) and plain exponential
//! decay c0 + A exp(-γ d). A small Levenberg-Marquardt core with numeric
//! Jacobians and multi-start over the oscillation frequency.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Parameters of the oscillatory fit ρ0 + A cos(B d)/d^(1+δ).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CdwFit<T> {
    pub rho0: T,
    pub amplitude: T,
    pub frequency: T,
    pub delta: T,
    pub mse: T,
}

/// Parameters of the exponential fit c0 + A exp(-γ d).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExpFit<T> {
    pub offset: T,
    pub amplitude: T,
    pub gamma: T,
    pub mse: T,
}

fn oscillatory_model<T: Scalar>(theta: &[T], d: T) -> T {
    let (rho0, a, b, delta) = (theta[0], theta[1], theta[2], theta[3]);
    rho0 + a * (b * d).cos() / d.powf(T::one() + delta)
}

fn exponential_model<T: Scalar>(theta: &[T], d: T) -> T {
    let (c0, a, gamma) = (theta[0], theta[1], theta[2]);
    c0 + a * (-(gamma * d)).exp()
}

fn mean_squared_error<T: Scalar>(
    model: &impl Fn(&[T], T) -> T,
    theta: &[T],
    xs: &[T],
    ys: &[T],
) -> T {
    let mut acc = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let r = model(theta, x) - y;
        acc += r * r;
    }
    acc / T::from_f(xs.len() as f64)
}

/// Levenberg-Marquardt with forward-difference Jacobian. Returns the refined
/// parameters and their MSE; never fails hard, the best iterate so far is
/// kept on stagnation.
fn levenberg_marquardt<T: Scalar>(
    model: &impl Fn(&[T], T) -> T,
    theta0: &[T],
    xs: &[T],
    ys: &[T],
    max_iter: usize,
) -> (Vec<T>, T) {
    let n = xs.len();
    let p = theta0.len();
    let mut theta = theta0.to_vec();
    let mut lambda = T::from_f(1e-3);
    let mut best_mse = mean_squared_error(model, &theta, xs, ys);
    for _ in 0..max_iter {
        // residuals and Jacobian
        let mut resid = DVector::<T>::zeros(n);
        let mut jac = DMatrix::<T>::zeros(n, p);
        for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
            resid[i] = model(&theta, x) - y;
        }
        for j in 0..p {
            let h = T::from_f(1e-7) * (T::one() + theta[j].abs());
            let mut th = theta.clone();
            th[j] += h;
            for (i, &x) in xs.iter().enumerate() {
                jac[(i, j)] = (model(&th, x) - model(&theta, x)) / h;
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &resid;
        let mut improved = false;
        for _ in 0..8 {
            let mut damped = jtj.clone();
            for j in 0..p {
                damped[(j, j)] += lambda * (T::one() + jtj[(j, j)]);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= T::from_f(10.0);
                continue;
            };
            let trial: Vec<T> = theta.iter().zip(step.iter()).map(|(t, s)| *t - *s).collect();
            let mse = mean_squared_error(model, &trial, xs, ys);
            if mse.finite() && mse < best_mse {
                theta = trial;
                best_mse = mse;
                lambda = (lambda * T::from_f(0.3)).max(T::from_f(1e-12));
                improved = true;
                break;
            }
            lambda *= T::from_f(10.0);
        }
        if !improved {
            break;
        }
        if best_mse < T::from_f(1e-30) {
            break;
        }
    }
    (theta, best_mse)
}

/// Fit both decay families to a correlator profile sampled at separations
/// `ds` (d ≥ 1). Needs at least 8 points. Both MSEs are reported so callers
/// can compare families.
pub fn cdw_fit<T: Scalar>(ds: &[T], ys: &[T]) -> Result<(CdwFit<T>, ExpFit<T>)> {
    if ds.len() != ys.len() {
        return Err(Error::Fit("separation/value length mismatch".into()));
    }
    if ds.len() < 8 {
        return Err(Error::Fit(format!("need >= 8 points, got {}", ds.len())));
    }
    if ds.iter().any(|&d| d < T::one()) {
        return Err(Error::Fit("separations must satisfy d >= 1".into()));
    }

    let mean = ys.iter().fold(T::zero(), |a, &b| a + b) / T::from_f(ys.len() as f64);
    let spread = ys
        .iter()
        .fold(T::zero(), |a, &b| a.max((b - mean).abs()));

    // multi-start over the oscillation frequency; cos(Bd) is highly
    // multimodal in B
    let pi = T::from_f(std::f64::consts::PI);
    let mut best: Option<(Vec<T>, T)> = None;
    for ib in 0..24 {
        let b0 = pi * T::from_f((ib as f64 + 0.5) / 24.0);
        for &delta0 in &[T::zero(), T::from_f(0.5)] {
            let theta0 = vec![mean, spread, b0, delta0];
            let (theta, mse) =
                levenberg_marquardt(&oscillatory_model, &theta0, ds, ys, 60);
            if best.as_ref().map_or(true, |(_, m)| mse < *m) {
                best = Some((theta, mse));
            }
        }
    }
    let (theta, mse) = best.expect("at least one start");
    // fold the frequency into [0, π]
    let two_pi = pi * T::from_f(2.0);
    let mut b = theta[2] % two_pi;
    if b < T::zero() {
        b += two_pi;
    }
    if b > pi {
        b = two_pi - b;
    }
    let osc = CdwFit {
        rho0: theta[0],
        amplitude: theta[1],
        frequency: b,
        delta: theta[3],
        mse,
    };

    let mut best_exp: Option<(Vec<T>, T)> = None;
    for &g0 in &[T::from_f(0.05), T::from_f(0.2), T::from_f(0.7), T::from_f(2.0)] {
        let amp0 = ys[0] - mean;
        let theta0 = vec![mean, amp0, g0];
        let (theta, mse) = levenberg_marquardt(&exponential_model, &theta0, ds, ys, 60);
        if best_exp.as_ref().map_or(true, |(_, m)| mse < *m) {
            best_exp = Some((theta, mse));
        }
    }
    let (theta_e, mse_e) = best_exp.expect("at least one start");
    let exp = ExpFit {
        offset: theta_e[0],
        amplitude: theta_e[1],
        gamma: theta_e[2],
        mse: mse_e,
    };
    Ok((osc, exp))
}
