//! Functions whose zeros the contour counter measures.
//!
//! Normally this is ξ itself. [`PlantedZero`] multiplies a target by
//! (s − ρ) so that a zero at a known off-line point can be injected into a
//! run and the discrepancy path exercised.

use serde::{Deserialize, Serialize};

use crate::special::{self, EvalAccuracy, SpecialError, XiSample};
use crate::ComplexValue;

pub trait XiTarget: Sync {
    /// Value, logarithmic derivative and scaled modulus at `s`. Fails with
    /// [`SpecialError::NearZeroOfXi`] when the scaled modulus is below `floor`.
    fn sample(&self, s: ComplexValue, floor: f64) -> Result<XiSample, SpecialError>;

    /// Zero injected on top of ξ, if any.
    fn planted_zero(&self) -> Option<ComplexValue> {
        None
    }
}

/// The completed zeta function ξ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompletedZeta {
    pub acc: EvalAccuracy,
}

impl CompletedZeta {
    pub fn new(acc: EvalAccuracy) -> Self {
        Self { acc }
    }
}

impl XiTarget for CompletedZeta {
    fn sample(&self, s: ComplexValue, floor: f64) -> Result<XiSample, SpecialError> {
        special::xi_sample(s, &self.acc, floor)
    }
}

/// `inner(s)·(s − zero)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedZero<T> {
    pub inner: T,
    pub zero: ComplexValue,
}

impl<T: XiTarget> PlantedZero<T> {
    pub fn new(inner: T, zero: ComplexValue) -> Self {
        Self { inner, zero }
    }
}

impl<T: XiTarget> XiTarget for PlantedZero<T> {
    fn sample(&self, s: ComplexValue, floor: f64) -> Result<XiSample, SpecialError> {
        let factor = s - self.zero;
        // the inner floor check happens on the product below
        let inner = self.inner.sample(s, 0.0)?;
        let scaled_abs = inner.scaled_abs * factor.norm();
        if !(scaled_abs >= floor) {
            return Err(SpecialError::NearZeroOfXi {
                s,
                scaled_abs,
                floor,
            });
        }
        Ok(XiSample {
            value: inner.value * factor,
            logderiv: inner.logderiv + 1.0 / factor,
            scaled_abs,
        })
    }

    fn planted_zero(&self) -> Option<ComplexValue> {
        Some(self.zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_factor_adds_pole_to_logderiv() {
        let base = CompletedZeta::default();
        let rho = ComplexValue::new(0.75, 40.0);
        let planted = PlantedZero::new(base, rho);
        let s = ComplexValue::new(0.4, 41.0);
        let a = base.sample(s, 1e-8).unwrap();
        let b = planted.sample(s, 1e-8).unwrap();
        assert!((b.value - a.value * (s - rho)).norm() <= 1e-12 * b.value.norm());
        assert!((b.logderiv - a.logderiv - 1.0 / (s - rho)).norm() < 1e-12);
        assert!(planted
            .sample(rho + ComplexValue::new(1e-14, 0.0), 1e-8)
            .is_err());
    }
}
