//! Increasing enumeration of the critical-line zeros.
//!
//! Z(t) is sampled on a grid whose step follows the mean zero spacing
//! 2π/log(t/2π), every sign change becomes a [`ZeroBracket`], and each
//! bracket is bisected down to the requested width. The scan is repeated at
//! twice the oversampling factor and the two counts must agree.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::riemann_siegel::{self, RsError, T_MIN};
use crate::special::EvalAccuracy;

/// Smallest and largest scan step.
pub const MIN_SCAN_STEP: f64 = 1e-3;
pub const MAX_SCAN_STEP: f64 = 1.0;

/// Extra halvings allowed after reaching the tolerance while the midpoint
/// is not yet the smallest of the three bracket residuals.
const POLISH_STEPS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnumError {
    #[error("invalid scan range [{lo}, {hi}] or oversample {oversample}")]
    InvalidScan { lo: f64, hi: f64, oversample: usize },
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("refinement tolerance {0:e} is below 1e-12")]
    ToleranceTooSmall(f64),
    #[error("Z evaluates to exactly zero at t = {0} even after nudging")]
    SignLost(f64),
    #[error(
        "scan found {coarse} sign changes at oversample {oversample} but {fine} at {}; \
         raise the oversample (close pair or even-order zero?)",
        oversample * 2
    )]
    UnstableScan {
        coarse: usize,
        fine: usize,
        oversample: usize,
    },
    #[error("interval [{a}, {b}] exceeds the enumeration cap {t_cap}")]
    CapTooSmall { a: f64, b: f64, t_cap: f64 },
    #[error(transparent)]
    Evaluation(#[from] RsError),
}

/// An interval on which Z changes sign once at scan resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroBracket {
    pub lo: f64,
    pub hi: f64,
    pub sign_lo: i8,
    pub sign_hi: i8,
}

impl ZeroBracket {
    pub fn is_valid(&self) -> bool {
        self.lo < self.hi
            && self.sign_lo != self.sign_hi
            && self.sign_lo.abs() == 1
            && self.sign_hi.abs() == 1
    }
}

/// γ_n stored as the midpoint of a final bracket of width `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalZero {
    /// 1-based position in the enumeration; 0 until placed in one.
    pub index: usize,
    pub ordinate: f64,
    pub width: f64,
    pub multiplicity: Option<u32>,
}

impl CriticalZero {
    pub fn lo(&self) -> f64 {
        self.ordinate - 0.5 * self.width
    }

    pub fn hi(&self) -> f64 {
        self.ordinate + 0.5 * self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumeratorConfig {
    pub oversample: usize,
    pub tol: f64,
    pub acc: EvalAccuracy,
}

impl Default for EnumeratorConfig {
    fn default() -> Self {
        Self {
            oversample: 8,
            tol: 1e-9,
            acc: EvalAccuracy::default(),
        }
    }
}

/// Grid step at ordinate `t`: the mean zero gap over `oversample`, clamped.
pub fn scan_step(t: f64, oversample: usize) -> f64 {
    let log = (t / (2.0 * PI)).ln();
    if !(log > 0.0) {
        return MAX_SCAN_STEP;
    }
    let gap = 2.0 * PI / log;
    (gap / oversample as f64).clamp(MIN_SCAN_STEP, MAX_SCAN_STEP)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Z at `t`, nudged by `nudge` if it lands exactly on zero.
fn z_sign(t: f64, nudge: f64, acc: &EvalAccuracy) -> Result<(f64, i8), EnumError> {
    let v = riemann_siegel::z_reference(t, acc)?.value;
    match sign(v) {
        0 => {
            let t2 = t + nudge;
            let v2 = riemann_siegel::z_reference(t2, acc)?.value;
            match sign(v2) {
                0 => Err(EnumError::SignLost(t)),
                s => Ok((t2, s)),
            }
        }
        s => Ok((t, s)),
    }
}

/// Scan grid on [t_lo, t_hi]; both endpoints included.
pub fn scan_grid(t_lo: f64, t_hi: f64, oversample: usize) -> Vec<f64> {
    let mut grid = vec![t_lo];
    let mut t = t_lo;
    while t < t_hi {
        t = (t + scan_step(t, oversample)).min(t_hi);
        grid.push(t);
    }
    grid
}

/// Sign-change brackets of Z on [t_lo, t_hi], in increasing order.
pub fn scan_brackets(
    t_lo: f64,
    t_hi: f64,
    oversample: usize,
    acc: &EvalAccuracy,
) -> Result<Vec<ZeroBracket>, EnumError> {
    if !(t_lo >= T_MIN && t_lo <= t_hi && oversample >= 4) {
        return Err(EnumError::InvalidScan {
            lo: t_lo,
            hi: t_hi,
            oversample,
        });
    }
    let grid = scan_grid(t_lo, t_hi, oversample);
    let samples = grid
        .par_iter()
        .map(|&t| z_sign(t, MIN_SCAN_STEP * 1e-3, acc))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(samples
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| ZeroBracket {
            lo: w[0].0,
            hi: w[1].0,
            sign_lo: w[0].1,
            sign_hi: w[1].1,
        })
        .collect())
}

/// Result of plain bisection on a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Halves [lo, hi] until its width is at most `tol`, keeping the sign change
/// inside. `f(lo)` must have sign `sign_lo` and `f(hi)` the opposite sign.
/// Returns the exact-zero midpoint as a degenerate bracket if one is hit.
pub fn bisect<F>(
    mut lo: f64,
    mut hi: f64,
    sign_lo: i8,
    tol: f64,
    mut f: F,
) -> Result<Bisection, EnumError>
where
    F: FnMut(f64) -> Result<f64, EnumError>,
{
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = sign(f(mid)?);
        iterations += 1;
        if s == 0 {
            return Err(EnumError::SignLost(mid));
        }
        if s == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bisection { lo, hi, iterations })
}

/// Bisects a bracket to width ≤ `tol` and reports its midpoint.
///
/// Once the width is reached, halving continues (a bounded number of times)
/// until |Z(mid)| is no larger than |Z| at either end. The returned zero has
/// index 0 until it is placed in an enumeration.
pub fn refine_zero(
    b: &ZeroBracket,
    tol: f64,
    acc: &EvalAccuracy,
) -> Result<CriticalZero, EnumError> {
    if !b.is_valid() {
        return Err(EnumError::InvalidBracket { lo: b.lo, hi: b.hi });
    }
    if !(tol >= 1e-12) {
        return Err(EnumError::ToleranceTooSmall(tol));
    }
    let z = |t: f64| -> Result<f64, EnumError> { Ok(riemann_siegel::z_reference(t, acc)?.value) };
    let nudge = tol / 10.0;
    let z_nudged = |t: f64| -> Result<f64, EnumError> {
        let v = z(t)?;
        if v != 0.0 {
            return Ok(v);
        }
        let v = z(t + nudge)?;
        if v == 0.0 {
            Err(EnumError::SignLost(t))
        } else {
            Ok(v)
        }
    };

    let mut br = bisect(b.lo, b.hi, b.sign_lo, tol, z_nudged)?;
    let mut z_lo = z(br.lo)?.abs();
    let mut z_hi = z(br.hi)?.abs();
    for _ in 0..POLISH_STEPS {
        let mid = 0.5 * (br.lo + br.hi);
        let z_mid = z_nudged(mid)?;
        if z_mid.abs() <= z_lo.min(z_hi) || mid <= br.lo || mid >= br.hi {
            break;
        }
        if sign(z_mid) == b.sign_lo {
            br.lo = mid;
            z_lo = z_mid.abs();
        } else {
            br.hi = mid;
            z_hi = z_mid.abs();
        }
        br.iterations += 1;
    }
    Ok(CriticalZero {
        index: 0,
        ordinate: 0.5 * (br.lo + br.hi),
        width: br.hi - br.lo,
        multiplicity: None,
    })
}

/// All sign-change zeros of Z on [t_min, t_max], indexed from 1.
///
/// Fails with [`EnumError::UnstableScan`] when doubling the oversampling
/// changes the number of brackets.
pub fn enumerate_zeros(t_max: f64, cfg: &EnumeratorConfig) -> Result<Vec<CriticalZero>, EnumError> {
    if !(t_max >= T_MIN) {
        return Err(RsError::DomainTooSmall {
            t: t_max,
            t_min: T_MIN,
        }
        .into());
    }
    let brackets = scan_brackets(T_MIN, t_max, cfg.oversample, &cfg.acc)?;
    let check = scan_brackets(T_MIN, t_max, cfg.oversample * 2, &cfg.acc)?;
    if brackets.len() != check.len() {
        return Err(EnumError::UnstableScan {
            coarse: brackets.len(),
            fine: check.len(),
            oversample: cfg.oversample,
        });
    }
    let mut zeros = brackets
        .par_iter()
        .map(|b| refine_zero(b, cfg.tol, &cfg.acc))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, z) in zeros.iter_mut().enumerate() {
        z.index = i + 1;
    }
    Ok(zeros)
}

/// Rough count of zeros with ordinate ≤ t (Riemann–von Mangoldt main term).
pub fn expected_count(t: f64) -> f64 {
    if t <= 2.0 * PI {
        return 0.0;
    }
    let x = t / (2.0 * PI);
    x * x.ln() - x + 7.0 / 8.0
}

/// Enumerates at increasing heights until at least `count` zeros are known.
pub fn enumerate_first(
    count: usize,
    cfg: &EnumeratorConfig,
) -> Result<Vec<CriticalZero>, EnumError> {
    let mut t_max = 20.0f64;
    while expected_count(t_max) < count as f64 + 1.5 {
        t_max *= 1.1;
    }
    loop {
        let zeros = enumerate_zeros(t_max, cfg)?;
        if zeros.len() >= count {
            return Ok(zeros);
        }
        t_max *= 1.15;
    }
}

/// Lazily yields the zeros in increasing order, one scan window at a time.
///
/// The grid is the same as a single scan from `T_MIN`, so the stream agrees
/// with [`enumerate_zeros`] on every prefix.
pub struct ZeroStream {
    cfg: EnumeratorConfig,
    t_cap: f64,
    next_lo: f64,
    window: usize,
    buffer: std::collections::VecDeque<CriticalZero>,
    produced: usize,
}

impl ZeroStream {
    pub fn new(cfg: EnumeratorConfig, t_cap: f64) -> Self {
        Self {
            cfg,
            t_cap,
            next_lo: T_MIN,
            window: 64,
            buffer: Default::default(),
            produced: 0,
        }
    }

    fn fill(&mut self) -> Result<(), EnumError> {
        while self.buffer.is_empty() && self.next_lo < self.t_cap {
            let grid = scan_grid(self.next_lo, self.t_cap, self.cfg.oversample);
            let end = grid[grid.len().min(self.window + 1) - 1];
            let brackets = scan_brackets(self.next_lo, end, self.cfg.oversample, &self.cfg.acc)?;
            for b in &brackets {
                self.buffer
                    .push_back(refine_zero(b, self.cfg.tol, &self.cfg.acc)?);
            }
            self.next_lo = end;
        }
        Ok(())
    }
}

impl Iterator for ZeroStream {
    type Item = Result<CriticalZero, EnumError>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Err(e) = self.fill() {
            self.next_lo = self.t_cap;
            return Some(Err(e));
        }
        let mut z = self.buffer.pop_front()?;
        self.produced += 1;
        z.index = self.produced;
        Some(Ok(z))
    }
}

/// Whether a zero ordinate lies in [a, b]: enumerate in increasing order and
/// stop at the first zero above `b`.
pub fn decide_interval(
    a: f64,
    b: f64,
    t_cap: f64,
    cfg: &EnumeratorConfig,
) -> Result<bool, EnumError> {
    if b > t_cap {
        return Err(EnumError::CapTooSmall { a, b, t_cap });
    }
    if !(0.0 < a && a <= b) {
        return Err(EnumError::InvalidBracket { lo: a, hi: b });
    }
    for z in ZeroStream::new(*cfg, t_cap) {
        let z = z?;
        if z.lo() > b {
            return Ok(false);
        }
        if z.hi() >= a {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fine_grid_sign_changes(lo: f64, hi: f64) -> usize {
        let acc = EvalAccuracy::default();
        let n = ((hi - lo) / 1e-3).round() as usize;
        let mut prev = riemann_siegel::z_reference(lo, &acc).unwrap().value;
        let mut count = 0;
        for k in 1..=n {
            let t = lo + (hi - lo) * k as f64 / n as f64;
            let v = riemann_siegel::z_reference(t, &acc).unwrap().value;
            if v.signum() != prev.signum() {
                count += 1;
            }
            prev = v;
        }
        count
    }

    #[test]
    fn oracle_counts() {
        assert_eq!(fine_grid_sign_changes(2.0, 10.0), 0);
        assert_eq!(fine_grid_sign_changes(14.0, 15.0), 1);
    }

    #[test]
    fn scan_below_first_zero_is_empty() {
        let acc = EvalAccuracy::default();
        assert!(scan_brackets(2.0, 10.0, 8, &acc).unwrap().is_empty());
        let b = scan_brackets(14.0, 15.0, 8, &acc).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].is_valid());
    }

    #[test]
    fn scan_step_clamps() {
        assert_eq!(scan_step(3.0, 8), MAX_SCAN_STEP);
        assert_eq!(scan_step(2.0 * PI, 8), MAX_SCAN_STEP);
        let s = scan_step(100.0, 8);
        let gap = 2.0 * PI / (100.0 / (2.0 * PI)).ln();
        assert!((s - gap / 8.0).abs() < 1e-15);
        assert_eq!(scan_step(1e300, 16), MIN_SCAN_STEP);
    }

    #[test]
    fn scan_rejects_bad_input() {
        let acc = EvalAccuracy::default();
        assert!(scan_brackets(1.0, 10.0, 8, &acc).is_err());
        assert!(scan_brackets(5.0, 10.0, 3, &acc).is_err());
    }

    #[test]
    fn bisection_iteration_count() {
        let (lo, hi, tol) = (0.0, 1.0, 1e-6);
        let r = bisect(lo, hi, -1, tol, |x| Ok(x - 0.3)).unwrap();
        let expected = ((hi - lo) / tol).log2().ceil() as usize;
        assert_eq!(r.iterations, expected);
        assert!(r.hi - r.lo <= tol);
        assert!(r.lo <= 0.3 && 0.3 <= r.hi);
        assert!((r.hi - r.lo - (hi - lo) / 2f64.powi(expected as i32)).abs() < 1e-15);
    }

    #[test]
    fn first_zero_refinement() {
        let acc = EvalAccuracy::default();
        let b = scan_brackets(14.0, 15.0, 8, &acc).unwrap()[0];
        let z = refine_zero(&b, 1e-9, &acc).unwrap();
        assert!(z.ordinate > b.lo && z.ordinate < b.hi);
        assert!(z.width <= 1e-9);
        assert!((z.ordinate - 14.134_725_141_734_69).abs() < 1e-8);
        let at = |t| riemann_siegel::z_reference(t, &acc).unwrap().value.abs();
        assert!(at(z.ordinate) <= at(z.lo()).min(at(z.hi())));

        let tight = refine_zero(&b, 1e-9, &acc.tightened()).unwrap();
        assert!((tight.ordinate - z.ordinate).abs() < 1e-8);
    }

    #[test]
    fn refine_rejects_bad_bracket() {
        let acc = EvalAccuracy::default();
        let bad = ZeroBracket {
            lo: 15.0,
            hi: 14.0,
            sign_lo: 1,
            sign_hi: -1,
        };
        assert!(matches!(
            refine_zero(&bad, 1e-9, &acc),
            Err(EnumError::InvalidBracket { .. })
        ));
        let ok = ZeroBracket {
            lo: 14.0,
            hi: 15.0,
            sign_lo: -1,
            sign_hi: 1,
        };
        assert!(matches!(
            refine_zero(&ok, 1e-13, &acc),
            Err(EnumError::ToleranceTooSmall(_))
        ));
    }

    #[test]
    fn enumeration_to_twenty() {
        let zeros = enumerate_zeros(20.0, &EnumeratorConfig::default()).unwrap();
        assert_eq!(zeros.len(), fine_grid_sign_changes(2.0, 20.0));
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].index, 1);
    }

    #[test]
    fn enumeration_prefix_property() {
        let cfg = EnumeratorConfig::default();
        let a = enumerate_zeros(50.0, &cfg).unwrap();
        let b = enumerate_zeros(100.0, &cfg).unwrap();
        assert!(a.len() < b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.index, y.index);
            assert!((x.ordinate - y.ordinate).abs() <= cfg.tol);
        }
        for w in b.windows(2) {
            assert!(w[1].ordinate - w[0].ordinate > 10.0 * cfg.tol);
        }
    }

    #[test]
    fn scan_is_stable_under_oversampling() {
        let acc = EvalAccuracy::default();
        let counts: Vec<usize> = [8, 16, 32]
            .iter()
            .map(|&k| scan_brackets(2.0, 200.0, k, &acc).unwrap().len())
            .collect();
        assert!(counts.iter().all(|&c| c == counts[0]), "{counts:?}");
        assert_eq!(counts[0], 79);
    }

    #[test]
    fn decide_interval_cases() {
        let cfg = EnumeratorConfig::default();
        assert!(decide_interval(14.0, 15.0, 20.0, &cfg).unwrap());
        assert!(!decide_interval(2.0, 10.0, 20.0, &cfg).unwrap());
        assert!(matches!(
            decide_interval(14.0, 25.0, 20.0, &cfg),
            Err(EnumError::CapTooSmall { .. })
        ));
        let z = enumerate_zeros(30.0, &cfg).unwrap();
        for zero in &z {
            let a = zero.ordinate;
            assert!(decide_interval(a, a, 30.0, &cfg).unwrap());
        }
        // the gap between the first two zeros
        assert!(!decide_interval(z[0].hi() + 0.1, z[1].lo() - 0.1, 30.0, &cfg).unwrap());
    }

    #[test]
    fn stream_matches_batch_enumeration() {
        let cfg = EnumeratorConfig::default();
        let batch = enumerate_zeros(120.0, &cfg).unwrap();
        let streamed: Vec<_> = ZeroStream::new(cfg, 120.0)
            .collect::<Result<Vec<_>, _>>()
            .unwrap();
        assert_eq!(batch.len(), streamed.len());
        for (a, b) in batch.iter().zip(&streamed) {
            assert_eq!(a.index, b.index);
            assert!((a.ordinate - b.ordinate).abs() <= cfg.tol);
        }
    }
}
