//! The Riemann–Siegel functions θ(t) and Z(t).
//!
//! Two routes are provided for each: the asymptotic θ and the finite main sum
//! for Z, and exact reference values built from log Γ and ζ. The reference
//! Z is the one used for locating zeros.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{self, EvalAccuracy, SpecialError};

/// Smallest ordinate accepted by θ and Z.
pub const T_MIN: f64 = 2.0;

/// Constant c in the main-sum remainder bound c·t^{−1/4}.
pub const MAIN_SUM_CONSTANT: f64 = 3.0;

/// Largest |Im e^{iθ}ζ(½+it)| tolerated before Z is rejected.
pub const REALNESS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RsError {
    #[error("t = {t} is below t_min = {t_min}")]
    DomainTooSmall { t: f64, t_min: f64 },
    #[error("Im(e^(i theta) zeta(1/2 + it)) = {imag:e} at t = {t}")]
    RealnessViolation { t: f64, imag: f64 },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZEvaluation {
    pub t: f64,
    pub value: f64,
    /// A posteriori bound on |value − Z(t)|.
    pub err_bound: f64,
    /// |Im| of the product e^{iθ}ζ(½+it); zero for the main sum.
    pub imag_residual: f64,
}

fn check_domain(t: f64) -> Result<(), RsError> {
    if t >= T_MIN {
        Ok(())
    } else {
        Err(RsError::DomainTooSmall { t, t_min: T_MIN })
    }
}

/// θ(t) ≈ (t/2)·log(t/2π) − t/2 − π/8 + 1/(48t) + 7/(5760t³) + ½·atan(e^{−πt}).
///
/// The last term is invisible to the power series and only matters below t ≈ 6.
pub fn theta_asymptotic(t: f64) -> Result<ThetaValue, RsError> {
    check_domain(t)?;
    let value = 0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0
        + 1.0 / (48.0 * t)
        + 7.0 / (5760.0 * t * t * t)
        + 0.5 * (-PI * t).exp().atan();
    Ok(ThetaValue { t, value })
}

/// θ(t) = Im log Γ(¼ + it/2) − (t/2)·log π.
///
/// log Γ is continuous along the line Re = ¼, so the result has no branch
/// jumps.
pub fn theta_exact(t: f64) -> Result<ThetaValue, RsError> {
    if !(t > 0.0) {
        return Err(RsError::DomainTooSmall { t, t_min: 0.0 });
    }
    let lg = special::log_gamma(Complex64::new(0.25, 0.5 * t))?;
    Ok(ThetaValue {
        t,
        value: lg.im - 0.5 * t * special::LN_PI,
    })
}

/// Number of terms ⌊√(t/2π)⌋ in the main sum.
pub fn main_sum_terms(t: f64) -> usize {
    (t / (2.0 * PI)).sqrt().floor() as usize
}

/// Z(t) ≈ 2·Σ_{n ≤ √(t/2π)} cos(θ(t) − t·log n)/√n, with the remainder
/// reported as `MAIN_SUM_CONSTANT·t^{−1/4}`.
pub fn z_main_sum(t: f64) -> Result<ZEvaluation, RsError> {
    let theta = theta_asymptotic(t)?.value;
    let value: f64 = (1..=main_sum_terms(t))
        .map(|n| {
            let n = n as f64;
            (theta - t * n.ln()).cos() / n.sqrt()
        })
        .sum::<f64>()
        * 2.0;
    Ok(ZEvaluation {
        t,
        value,
        err_bound: MAIN_SUM_CONSTANT * t.powf(-0.25),
        imag_residual: 0.0,
    })
}

/// Z(t) = Re(e^{iθ(t)}·ζ(½+it)) with the exact θ.
pub fn z_reference(t: f64, acc: &EvalAccuracy) -> Result<ZEvaluation, RsError> {
    check_domain(t)?;
    let theta = theta_exact(t)?.value;
    let (zeta, estimate) = special::zeta_with_estimate(Complex64::new(0.5, t), acc)?;
    let product = Complex64::from_polar(1.0, theta) * zeta;
    let imag_residual = product.im.abs();
    if imag_residual > REALNESS_LIMIT {
        return Err(RsError::RealnessViolation {
            t,
            imag: product.im,
        });
    }
    // rounding in the partial sum grows like ε·Σ n^{-1/2} ≈ 2ε√N
    let cutoff = acc.cutoff(t) as f64;
    let rounding = 8.0 * f64::EPSILON * cutoff.sqrt() * (1.0 + theta.abs());
    Ok(ZEvaluation {
        t,
        value: product.re,
        err_bound: estimate + rounding,
        imag_residual,
    })
}
