//! Special functions on and around the critical strip.
//!
//! The Riemann zeta function is continued with Euler–Maclaurin summation,
//! log-gamma and digamma use Stirling-type asymptotic series after an upward
//! shift, and the completed function
//!
//! ξ(s) = ½·s·(s−1)·π^{−s/2}·Γ(s/2)·ζ(s)
//!
//! is assembled from those pieces in a form that stays finite at s = 0 and
//! s = 1. Everything is plain `f64` arithmetic; the accuracy knobs live in
//! [`EvalAccuracy`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ComplexValue;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default lower bound on the scaled modulus of ξ for contour evaluations.
pub const DEFAULT_XI_FLOOR: f64 = 1e-8;

pub(crate) const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_2, B_4, ..., B_26.
const BERNOULLI_EVEN: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
];

/// Largest supported number of Bernoulli correction terms.
pub const MAX_EM_ORDER: usize = 12;

/// Minimum Euler–Maclaurin cutoff.
pub const MIN_EM_TERMS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("zeta has a pole at s = 1 (got s = {0})")]
    PoleAt1(ComplexValue),
    #[error("Re(s) = {0} is outside the supported continuation region Re(s) > -1")]
    RegionUnsupported(f64),
    #[error("truncation estimate {estimate:e} exceeds requested tolerance {abs_tol:e} at s = {s}")]
    AccuracyNotMet {
        s: ComplexValue,
        estimate: f64,
        abs_tol: f64,
    },
    #[error("pole at non-positive integer {0}")]
    PoleAtNonPositiveInteger(f64),
    #[error("|xi| (scaled) = {scaled_abs:e} below floor {floor:e} at s = {s}")]
    NearZeroOfXi {
        s: ComplexValue,
        scaled_abs: f64,
        floor: f64,
    },
    #[error("non-finite value produced at s = {0}")]
    NonFinite(ComplexValue),
    #[error("invalid accuracy settings: {0}")]
    InvalidAccuracy(String),
}

/// Truncation controls for the Euler–Maclaurin zeta evaluation.
///
/// `em_terms` is the cutoff used at heights |Im s| ≤ 25; above that the
/// cutoff grows linearly as `em_terms·|Im s|/25`, so the default of 50 gives
/// N = max(50, ⌈2|Im s|⌉) and doubling `em_terms` doubles N everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalAccuracy {
    pub em_terms: usize,
    pub em_order: usize,
    pub abs_tol: f64,
}

impl Default for EvalAccuracy {
    fn default() -> Self {
        Self {
            em_terms: 50,
            em_order: 8,
            abs_tol: 1e-12,
        }
    }
}

impl EvalAccuracy {
    pub fn validate(&self) -> Result<(), SpecialError> {
        if self.em_terms < MIN_EM_TERMS {
            return Err(SpecialError::InvalidAccuracy(format!(
                "em_terms = {} < {MIN_EM_TERMS}",
                self.em_terms
            )));
        }
        if self.em_order > MAX_EM_ORDER {
            return Err(SpecialError::InvalidAccuracy(format!(
                "em_order = {} > {MAX_EM_ORDER}",
                self.em_order
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(SpecialError::InvalidAccuracy(format!(
                "abs_tol = {} must be positive",
                self.abs_tol
            )));
        }
        Ok(())
    }

    /// Doubled cutoff and two more correction terms (capped).
    pub fn tightened(&self) -> Self {
        Self {
            em_terms: self.em_terms * 2,
            em_order: (self.em_order + 2).min(MAX_EM_ORDER),
            abs_tol: self.abs_tol,
        }
    }

    /// Effective cutoff N at height `im`.
    pub fn cutoff(&self, im: f64) -> usize {
        let scaled = (self.em_terms as f64 * im.abs() / 25.0).ceil() as usize;
        self.em_terms.max(scaled)
    }
}

fn finite(s: ComplexValue, z: ComplexValue) -> Result<ComplexValue, SpecialError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(SpecialError::NonFinite(s))
    }
}

/// Pieces of one Euler–Maclaurin pass, kept separate so that (s−1)ζ(s) can be
/// formed without dividing by s−1.
#[derive(Debug, Clone, Copy)]
struct EmPieces {
    /// Σ_{n<N} n^{-s} + N^{-s}/2 + Bernoulli tail.
    regular: Complex64,
    /// derivative of `regular`
    regular_d: Complex64,
    /// N^{1-s}
    pole_num: Complex64,
    ln_n: f64,
    estimate: f64,
}

fn em_pass(s: Complex64, cutoff: usize, order: usize, with_derivative: bool) -> EmPieces {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_d = Complex64::new(0.0, 0.0);
    for n in 2..cutoff {
        let ln_n = (n as f64).ln();
        let term = (-s * ln_n).exp();
        sum += term;
        if with_derivative {
            sum_d -= term * ln_n;
        }
    }
    // n = 1 contributes exactly 1 to the sum and 0 to its derivative
    sum += 1.0;

    let big_n = cutoff as f64;
    let ln_n = big_n.ln();
    let n_pow = (-s * ln_n).exp(); // N^{-s}
    let half = n_pow * 0.5;
    sum += half;
    if with_derivative {
        sum_d -= half * ln_n;
    }

    // Tail: Σ_k B_2k/(2k)! · (s)_{2k-1} · N^{-s-2k+1}
    // poch = s(s+1)...(s+2k-2), tracked together with its derivative.
    let mut poch = s;
    let mut poch_d = Complex64::new(1.0, 0.0);
    let mut factorial = 2.0; // (2k)!
    let mut n_scale = n_pow / big_n; // N^{-s-1}
    let inv_n2 = 1.0 / (big_n * big_n);
    let mut estimate = 0.0;
    for k in 1..=order + 1 {
        let coeff = BERNOULLI_EVEN[k - 1] / factorial;
        let term = poch * n_scale * coeff;
        if k <= order {
            sum += term;
            if with_derivative {
                sum_d += (poch_d - poch * ln_n) * n_scale * coeff;
            }
        } else {
            let sigma = s.re;
            let m = 2.0 * order as f64 + 1.0;
            estimate = term.norm() * (s + m).norm() / (sigma + m);
        }
        // advance (s)_{2k-1} -> (s)_{2k+1}
        for j in [2 * k - 1, 2 * k] {
            let f = s + j as f64;
            poch_d = poch_d * f + poch;
            poch *= f;
        }
        factorial *= ((2 * k + 1) * (2 * k + 2)) as f64;
        n_scale *= inv_n2;
    }

    EmPieces {
        regular: sum,
        regular_d: sum_d,
        pole_num: n_pow * big_n,
        ln_n,
        estimate,
    }
}

/// Runs Euler–Maclaurin at the requested settings, escalating the order and
/// then the cutoff until the truncation estimate meets `abs_tol`.
fn em_checked(
    s: Complex64,
    acc: &EvalAccuracy,
    with_derivative: bool,
) -> Result<EmPieces, SpecialError> {
    acc.validate()?;
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(SpecialError::NonFinite(s));
    }
    if s.re <= -1.0 {
        return Err(SpecialError::RegionUnsupported(s.re));
    }
    let mut cutoff = acc.cutoff(s.im);
    let mut order = acc.em_order;
    let mut pieces = em_pass(s, cutoff, order, with_derivative);
    let mut doublings = 0;
    while pieces.estimate > acc.abs_tol {
        if order < MAX_EM_ORDER {
            order = MAX_EM_ORDER;
        } else if doublings < 6 {
            cutoff *= 2;
            doublings += 1;
        } else {
            return Err(SpecialError::AccuracyNotMet {
                s,
                estimate: pieces.estimate,
                abs_tol: acc.abs_tol,
            });
        }
        pieces = em_pass(s, cutoff, order, with_derivative);
    }
    Ok(pieces)
}

/// ζ(s) together with its Euler–Maclaurin truncation estimate.
pub fn zeta_with_estimate(
    s: ComplexValue,
    acc: &EvalAccuracy,
) -> Result<(ComplexValue, f64), SpecialError> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(SpecialError::PoleAt1(s));
    }
    let p = em_checked(s, acc, false)?;
    let z = p.regular + p.pole_num / (s - 1.0);
    Ok((finite(s, z)?, p.estimate))
}

/// Riemann zeta function for Re(s) > −1, s ≠ 1.
pub fn zeta(s: ComplexValue, acc: &EvalAccuracy) -> Result<ComplexValue, SpecialError> {
    zeta_with_estimate(s, acc).map(|(z, _)| z)
}

/// ζ(s) and ζ'(s) from the term-differentiated Euler–Maclaurin sum.
pub fn zeta_and_derivative(
    s: ComplexValue,
    acc: &EvalAccuracy,
) -> Result<(ComplexValue, ComplexValue), SpecialError> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(SpecialError::PoleAt1(s));
    }
    let p = em_checked(s, acc, true)?;
    let inv = 1.0 / (s - 1.0);
    let z = p.regular + p.pole_num * inv;
    let dz = p.regular_d - p.pole_num * inv * (p.ln_n + inv);
    Ok((finite(s, z)?, finite(s, dz)?))
}

/// (s−1)·ζ(s), finite at s = 1 where it equals 1.
fn zeta_times_s_minus_1(s: Complex64, acc: &EvalAccuracy) -> Result<Complex64, SpecialError> {
    let p = em_checked(s, acc, false)?;
    finite(s, (s - 1.0) * p.regular + p.pole_num)
}

fn check_gamma_pole(s: Complex64) -> Result<(), SpecialError> {
    if s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round() {
        return Err(SpecialError::PoleAtNonPositiveInteger(s.re));
    }
    Ok(())
}

/// How far to shift `s` upward before the asymptotic series is accurate.
fn upward_shift(s: Complex64) -> usize {
    let mut m = 0usize;
    loop {
        let z = s + m as f64;
        if z.re >= 10.0 || (z.norm() >= 20.0 && z.re >= 1.0) {
            return m;
        }
        m += 1;
    }
}

/// log Γ(s) on the principal branch (branch cut along the negative real axis,
/// real for real s > 0).
pub fn log_gamma(s: ComplexValue) -> Result<ComplexValue, SpecialError> {
    check_gamma_pole(s)?;
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(SpecialError::NonFinite(s));
    }
    let m = upward_shift(s);
    let mut correction = Complex64::new(0.0, 0.0);
    for k in 0..m {
        correction += (s + k as f64).ln();
    }
    let z = s + m as f64;
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().take(10).enumerate() {
        let two_k = 2.0 * (k + 1) as f64;
        series += pow * (b / (two_k * (two_k - 1.0)));
        pow *= inv2;
    }
    let lg = (z - 0.5) * z.ln() - z + HALF_LN_2PI + series - correction;
    finite(s, lg)
}

/// Digamma ψ(s) = Γ'(s)/Γ(s).
pub fn digamma(s: ComplexValue) -> Result<ComplexValue, SpecialError> {
    check_gamma_pole(s)?;
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(SpecialError::NonFinite(s));
    }
    let m = upward_shift(s);
    let mut correction = Complex64::new(0.0, 0.0);
    for k in 0..m {
        correction += 1.0 / (s + k as f64);
    }
    let z = s + m as f64;
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().take(10).enumerate() {
        let two_k = 2.0 * (k + 1) as f64;
        series += pow * (b / two_k);
        pow *= inv2;
    }
    let psi = z.ln() - inv * 0.5 - series - correction;
    finite(s, psi)
}

/// log of π^{−s/2}·Γ(1 + s/2); together with (s−1)ζ(s) this gives ξ.
fn log_gamma_factor(s: Complex64) -> Result<Complex64, SpecialError> {
    Ok(-s * (0.5 * LN_PI) + log_gamma(1.0 + s * 0.5)?)
}

/// The completed zeta function ξ(s) = ½·s·(s−1)·π^{−s/2}·Γ(s/2)·ζ(s).
///
/// Evaluated as (s−1)ζ(s) · π^{−s/2}·Γ(1+s/2), which is regular at both
/// s = 0 and s = 1.
pub fn xi(s: ComplexValue, acc: &EvalAccuracy) -> Result<ComplexValue, SpecialError> {
    let a = zeta_times_s_minus_1(s, acc)?;
    let g = log_gamma_factor(s)?;
    finite(s, a * g.exp())
}

/// |½·s·(s−1)·ζ(s)|: the modulus of ξ with the Γ-factor divided out.
///
/// ξ itself decays like e^{−π|t|/4} up the strip, so floors are applied to
/// this scaled modulus instead; it vanishes exactly where ξ does for s ≠ 0.
pub fn xi_scaled_abs(s: ComplexValue, acc: &EvalAccuracy) -> Result<f64, SpecialError> {
    let a = zeta_times_s_minus_1(s, acc)?;
    Ok((a * s * 0.5).norm())
}

/// ξ(s), ξ'(s)/ξ(s) and the scaled modulus from one Euler–Maclaurin pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSample {
    pub value: ComplexValue,
    pub logderiv: ComplexValue,
    pub scaled_abs: f64,
}

/// Evaluates ξ, its scaled modulus and, when the scaled modulus is at least
/// `floor`, its logarithmic derivative
///
/// ξ'/ξ = 1/s + 1/(s−1) − ½·log π + ½·ψ(s/2) + ζ'(s)/ζ(s).
pub fn xi_sample(
    s: ComplexValue,
    acc: &EvalAccuracy,
    floor: f64,
) -> Result<XiSample, SpecialError> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(SpecialError::PoleAt1(s));
    }
    let p = em_checked(s, acc, true)?;
    let inv = 1.0 / (s - 1.0);
    let zeta_sm1 = (s - 1.0) * p.regular + p.pole_num;
    let scaled_abs = (zeta_sm1 * s * 0.5).norm();
    let value = finite(s, zeta_sm1 * log_gamma_factor(s)?.exp())?;
    if !(scaled_abs >= floor) {
        return Err(SpecialError::NearZeroOfXi {
            s,
            scaled_abs,
            floor,
        });
    }
    let zeta_v = p.regular + p.pole_num * inv;
    let zeta_d = p.regular_d - p.pole_num * inv * (p.ln_n + inv);
    // ½ψ(s/2) + 1/s = ½ψ(1 + s/2)
    let logderiv = inv - 0.5 * LN_PI + digamma(1.0 + s * 0.5)? * 0.5 + zeta_d / zeta_v;
    Ok(XiSample {
        value,
        logderiv: finite(s, logderiv)?,
        scaled_abs,
    })
}

/// ξ'(s)/ξ(s) with the default floor.
pub fn xi_logderiv(s: ComplexValue, acc: &EvalAccuracy) -> Result<ComplexValue, SpecialError> {
    xi_logderiv_with_floor(s, acc, DEFAULT_XI_FLOOR)
}

pub fn xi_logderiv_with_floor(
    s: ComplexValue,
    acc: &EvalAccuracy,
    floor: f64,
) -> Result<ComplexValue, SpecialError> {
    xi_sample(s, acc, floor).map(|x| x.logderiv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const GAMMA_1: f64 = 14.134_725_141_734_693;

    /// Borwein's accelerated alternating series for the Dirichlet eta function,
    /// converted to zeta. Independent of the Euler–Maclaurin route.
    fn zeta_borwein(s: Complex64, n: usize) -> Complex64 {
        let nf = n as f64;
        let mut d = vec![0.0f64; n + 1];
        let mut acc = 0.0;
        let mut term = 1.0 / nf; // i = 0 term: n·(n+i-1)!·4^i / ((n-i)!·(2i)!)
        for (i, di) in d.iter_mut().enumerate() {
            if i > 0 {
                let fi = i as f64;
                term *= (nf + fi - 1.0) * (nf - fi + 1.0) * 4.0 / ((2.0 * fi - 1.0) * (2.0 * fi));
            }
            acc += term;
            *di = nf * acc;
        }
        let dn = d[n];
        let mut eta = Complex64::new(0.0, 0.0);
        for (k, dk) in d[..n].iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let w = (dk - dn) / dn;
            eta += (-s * ((k + 1) as f64).ln()).exp() * (sign * w);
        }
        let eta = -eta;
        eta / (1.0 - (c(2.0, 0.0)).powc(1.0 - s))
    }

    #[test]
    fn basel_value() {
        let z = zeta(c(2.0, 0.0), &EvalAccuracy::default()).unwrap();
        assert!((z.re - PI * PI / 6.0).abs() < 1e-10);
        assert!(z.im.abs() < 1e-14);
    }

    #[test]
    fn zeta_at_zero_is_minus_half() {
        let z = zeta(c(0.0, 0.0), &EvalAccuracy::default()).unwrap();
        assert!((z.re + 0.5).abs() < 1e-10, "{z}");
    }

    #[test]
    fn zeta_vanishes_at_first_zero() {
        let z = zeta(c(0.5, GAMMA_1), &EvalAccuracy::default()).unwrap();
        assert!(z.norm() < 1e-6, "{z}");
    }

    #[test]
    fn zeta_matches_borwein_oracle() {
        let acc = EvalAccuracy::default();
        for &(re, im) in &[
            (0.5, 3.0),
            (0.2, 10.0),
            (0.9, 21.0),
            (0.0, 17.5),
            (1.0, 5.0),
            (0.5, -12.0),
            (2.5, 0.3),
        ] {
            let s = c(re, im);
            let a = zeta(s, &acc).unwrap();
            let b = zeta_borwein(s, 80);
            assert!((a - b).norm() < 1e-10, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn zeta_errors() {
        let acc = EvalAccuracy::default();
        assert!(matches!(
            zeta(c(1.0, 0.0), &acc),
            Err(SpecialError::PoleAt1(_))
        ));
        assert!(matches!(
            zeta(c(-1.0, 3.0), &acc),
            Err(SpecialError::RegionUnsupported(_))
        ));
        let bad = EvalAccuracy { em_terms: 5, ..acc };
        assert!(matches!(
            zeta(c(0.5, 3.0), &bad),
            Err(SpecialError::InvalidAccuracy(_))
        ));
        let impossible = EvalAccuracy {
            abs_tol: 1e-300,
            ..acc
        };
        assert!(matches!(
            zeta(c(-0.9, 40.0), &impossible),
            Err(SpecialError::AccuracyNotMet { .. })
        ));
    }

    #[test]
    fn zeta_derivative_matches_finite_difference() {
        let acc = EvalAccuracy::default();
        let h = 1e-5;
        for &s in &[c(0.5, 20.0), c(0.1, 33.3), c(2.0, 0.0), c(0.8, -7.0)] {
            let (_, d) = zeta_and_derivative(s, &acc).unwrap();
            let fd = (zeta(s + h, &acc).unwrap() - zeta(s - h, &acc).unwrap()) / (2.0 * h);
            assert!((d - fd).norm() < 1e-7, "s={s}: {d} vs {fd}");
        }
    }

    #[test]
    fn log_gamma_special_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        let lg5 = log_gamma(c(5.0, 0.0)).unwrap();
        assert!((lg5.re - 24f64.ln()).abs() < 1e-12 && lg5.im.abs() < 1e-14);
        let g_half = log_gamma(c(0.5, 0.0)).unwrap().exp();
        assert!((g_half.re - PI.sqrt()).abs() < 1e-10);
        assert!(matches!(
            log_gamma(c(-2.0, 0.0)),
            Err(SpecialError::PoleAtNonPositiveInteger(_))
        ));
        assert!(matches!(
            log_gamma(c(0.0, 0.0)),
            Err(SpecialError::PoleAtNonPositiveInteger(_))
        ));
    }

    #[test]
    fn log_gamma_recurrence_and_reflection() {
        // log Γ(s+1) − log Γ(s) = log s on the principal branch for Re s > 0
        for &s in &[c(0.25, 7.0), c(0.7, 0.3), c(3.0, -40.0), c(0.5, 120.0)] {
            let d = log_gamma(s + 1.0).unwrap() - log_gamma(s).unwrap() - s.ln();
            assert!(d.norm() < 1e-12, "s={s}: {d}");
        }
        // |Γ(½+it)|² = π / cosh(πt)
        for &t in &[1.0, 5.0, 20.0] {
            let lg = log_gamma(c(0.5, t)).unwrap();
            let expected = 0.5 * (PI / (PI * t).cosh()).ln();
            assert!((lg.re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn digamma_values() {
        let p1 = digamma(c(1.0, 0.0)).unwrap();
        assert!((p1.re + EULER_GAMMA).abs() < 1e-10);
        let d = digamma(c(2.0, 0.0)).unwrap() - p1;
        assert!((d.re - 1.0).abs() < 1e-12 && d.im.abs() < 1e-14);
        assert!(digamma(c(-3.0, 0.0)).is_err());
    }

    #[test]
    fn digamma_matches_log_gamma_difference() {
        let h = 1e-5;
        for &s in &[c(10.0, 0.0), c(0.3, 4.0), c(1.25, 25.0)] {
            let fd = (log_gamma(s + h).unwrap() - log_gamma(s - h).unwrap()) / (2.0 * h);
            let psi = digamma(s).unwrap();
            assert!((psi - fd).norm() < 1e-8, "s={s}: {psi} vs {fd}");
        }
    }

    #[test]
    fn xi_symmetries() {
        let acc = EvalAccuracy::default();
        let s = c(0.3, 7.0);
        let d = xi(s, &acc).unwrap() - xi(1.0 - s, &acc).unwrap();
        assert!(d.norm() < 1e-10, "{d}");
        let s = c(0.25, 3.0);
        let d = xi(s.conj(), &acc).unwrap() - xi(s, &acc).unwrap().conj();
        assert!(d.norm() < 1e-12, "{d}");
    }

    #[test]
    fn xi_special_points() {
        let acc = EvalAccuracy::default();
        // ξ(0) = ξ(1) = ½
        assert!((xi(c(0.0, 0.0), &acc).unwrap() - 0.5).norm() < 1e-12);
        assert!((xi(c(1.0, 0.0), &acc).unwrap() - 0.5).norm() < 1e-12);
        assert!(xi(c(0.5, GAMMA_1), &acc).unwrap().norm() < 1e-6);
    }

    #[test]
    fn xi_logderiv_antisymmetry() {
        let acc = EvalAccuracy::default();
        let s = c(0.3, 5.0);
        let a = xi_logderiv(s, &acc).unwrap();
        let b = xi_logderiv(1.0 - s, &acc).unwrap();
        assert!((a + b).norm() < 1e-8, "{a} {b}");
    }

    #[test]
    fn xi_logderiv_at_two_matches_log_modulus_gradient() {
        let acc = EvalAccuracy::default();
        let s = c(2.0, 0.0);
        let h = 1e-5;
        let lm = |z: Complex64| xi(z, &acc).unwrap().norm().ln();
        let dx = (lm(s + c(h, 0.0)) - lm(s - c(h, 0.0))) / (2.0 * h);
        let dy = (lm(s + c(0.0, h)) - lm(s - c(0.0, h))) / (2.0 * h);
        let l = xi_logderiv(s, &acc).unwrap();
        // ∂x log|ξ| = Re(ξ'/ξ), ∂y log|ξ| = −Im(ξ'/ξ)
        assert!((l.re - dx).abs() < 1e-6, "{l} {dx}");
        assert!((-l.im - dy).abs() < 1e-6, "{l} {dy}");
    }

    #[test]
    fn xi_logderiv_pole_dominance_near_zero() {
        let acc = EvalAccuracy::default();
        let rho = c(0.5, GAMMA_1);
        for dir in [c(1.0, 0.0), c(0.0, 1.0), c(-0.6, 0.8)] {
            let s = rho + dir * 1e-3;
            let l = xi_logderiv(s, &acc).unwrap();
            let pole = 1.0 / (s - rho);
            assert!((l - pole).norm() < 2.0, "{l} vs {pole}");
            assert!((l.norm() - 1e3).abs() < 2.0);
        }
    }

    #[test]
    fn near_zero_floor_reported() {
        let acc = EvalAccuracy::default();
        let r = xi_logderiv_with_floor(c(0.5, GAMMA_1), &acc, 1e-3);
        assert!(matches!(r, Err(SpecialError::NearZeroOfXi { .. })));
    }

    #[test]
    fn tight_settings_agree() {
        let acc = EvalAccuracy::default();
        let tight = acc.tightened();
        for &s in &[c(0.5, 100.0), c(0.0, 49.0), c(1.0, 3.0), c(0.75, 250.0)] {
            let a = zeta(s, &acc).unwrap();
            let b = zeta(s, &tight).unwrap();
            assert!(
                (a - b).norm() <= 10.0 * acc.abs_tol,
                "s={s}: {}",
                (a - b).norm()
            );
        }
    }

    #[test]
    fn cutoff_scaling() {
        let acc = EvalAccuracy::default();
        assert_eq!(acc.cutoff(10.0), 50);
        assert_eq!(acc.cutoff(100.0), 200);
        assert_eq!(acc.tightened().cutoff(100.0), 400);
    }
}
