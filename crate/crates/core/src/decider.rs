//! The index function g(n) and per-rectangle verification records.
//!
//! g(0) = 0 and g(n) = g(n−1) when the rectangle count M(n) equals the
//! multiplicity l_n of γ_n, otherwise g(n) = n. Its non-zero values are the
//! indices of rectangles holding zeros that the critical-line enumeration did
//! not account for.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{ContourCount, ContourCounter, ContourError, Perturbation};
use crate::target::XiTarget;
use crate::zeros::CriticalZero;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecideError {
    #[error("verifying up to n = {n_max} needs {need} enumerated zeros, have {have}")]
    EnumerationTooShort {
        n_max: usize,
        need: usize,
        have: usize,
    },
    #[error("run has {0} record(s) with numerical failures")]
    RunIncomplete(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    OffLineSuspected,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    VerifiedInRange,
    DiscrepancyFound,
    Incomplete,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::VerifiedInRange => "verified_in_range",
            Verdict::DiscrepancyFound => "discrepancy_found",
            Verdict::Incomplete => "incomplete",
        }
    }
}

/// Winding details kept for the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingDiagnostics {
    pub circle_j0: usize,
    pub circle_counts: Vec<(usize, i64)>,
    pub rectangle: ContourCount,
    pub perturbations: Vec<Perturbation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub n: usize,
    pub gamma: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
    /// M(n); absent when the rectangle could not be counted.
    pub m: Option<u32>,
    /// l_n; absent when the circles could not be counted.
    pub l: Option<u32>,
    pub g: usize,
    pub status: RecordStatus,
    pub diagnostics: Vec<String>,
    pub windings: Option<WindingDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRun {
    pub n_max: usize,
    pub records: Vec<VerificationRecord>,
    pub verdict: Verdict,
}

/// One step of g: keep the previous value when M(n) = l_n, else jump to n.
pub fn g_step(n: usize, g_prev: usize, m: u32, l: u32) -> usize {
    if m == l {
        g_prev
    } else {
        n
    }
}

/// Verdict implied by a list of records. Numerical failures take precedence
/// over discrepancies.
pub fn verdict_from_records(records: &[VerificationRecord]) -> Verdict {
    if records
        .iter()
        .any(|r| r.status == RecordStatus::NumericalFailure)
    {
        Verdict::Incomplete
    } else if records
        .iter()
        .any(|r| r.status == RecordStatus::OffLineSuspected)
    {
        Verdict::DiscrepancyFound
    } else {
        Verdict::VerifiedInRange
    }
}

/// Counts computed for one index before the g-fold.
struct Measured {
    rect: Result<(f64, f64, Vec<Perturbation>, ContourCount), ContourError>,
    circles: Result<crate::contour::MultiplicityResult, ContourError>,
}

fn measure<T: XiTarget>(counter: &ContourCounter<T>, zeros: &[CriticalZero], n: usize) -> Measured {
    let rect = counter.build_rectangle(zeros, n).and_then(|r| {
        let w = counter.rectangle_count(&r)?;
        Ok((r.bottom, r.top, r.perturbations, w))
    });
    let circles = counter.multiplicity(zeros, n);
    Measured { rect, circles }
}

/// Computes l_n, M(n) and g(n) for n = 1..=n_max.
///
/// Per-index contour work runs in parallel; the g-fold is a sequential pass
/// in index order. Contour failures are captured in the record, which is
/// then marked as a numerical failure.
pub fn verify_range<T: XiTarget>(
    counter: &ContourCounter<T>,
    zeros: &[CriticalZero],
    n_max: usize,
) -> Result<VerificationRun, DecideError> {
    if n_max > 0 && zeros.len() < n_max + 1 {
        return Err(DecideError::EnumerationTooShort {
            n_max,
            need: n_max + 1,
            have: zeros.len(),
        });
    }
    let measured: Vec<Measured> = (1..=n_max)
        .into_par_iter()
        .map(|n| measure(counter, zeros, n))
        .collect();

    let mut g = 0usize;
    let mut records = Vec::with_capacity(n_max);
    for (i, meas) in measured.into_iter().enumerate() {
        let n = i + 1;
        let gamma = zeros[i].ordinate;
        let below = if n == 1 {
            crate::contour::ORIGIN_ORDINATE
        } else {
            zeros[i - 1].ordinate
        };
        let mut record = VerificationRecord {
            n,
            gamma,
            delta_lo: 0.5 * (below + gamma),
            delta_hi: 0.5 * (gamma + zeros[i + 1].ordinate),
            m: None,
            l: None,
            g,
            status: RecordStatus::NumericalFailure,
            diagnostics: Vec::new(),
            windings: None,
        };
        match &meas.circles {
            Ok(c) => record.l = Some(c.l),
            Err(e) => record.diagnostics.push(format!("multiplicity: {e}")),
        }
        match &meas.rect {
            Ok((bottom, top, _, w)) => {
                record.delta_lo = *bottom;
                record.delta_hi = *top;
                record.m = Some(w.count() as u32);
            }
            Err(e) => record.diagnostics.push(format!("rectangle: {e}")),
        }
        if let (Ok(c), Ok((_, _, perturbations, w))) = (&meas.circles, &meas.rect) {
            for p in perturbations {
                record.diagnostics.push(format!(
                    "{:?} edge moved from {} to {}",
                    p.edge, p.original, p.adjusted
                ));
            }
            record.windings = Some(WindingDiagnostics {
                circle_j0: c.j0,
                circle_counts: c.counts.clone(),
                rectangle: w.clone(),
                perturbations: perturbations.clone(),
            });
        }
        if let (Some(m), Some(l)) = (record.m, record.l) {
            g = g_step(n, g, m, l);
            record.status = if m == l {
                RecordStatus::Ok
            } else {
                record
                    .diagnostics
                    .push(format!("M({n}) = {m} but l_{n} = {l}"));
                RecordStatus::OffLineSuspected
            };
        }
        record.g = g;
        records.push(record);
    }
    let verdict = verdict_from_records(&records);
    Ok(VerificationRun {
        n_max,
        records,
        verdict,
    })
}

/// { g(n) : n ≤ n_max } \ {0}.
pub fn off_line_index_set(run: &VerificationRun) -> Result<BTreeSet<usize>, DecideError> {
    let failures = run
        .records
        .iter()
        .filter(|r| r.status == RecordStatus::NumericalFailure)
        .count();
    if failures > 0 {
        return Err(DecideError::RunIncomplete(failures));
    }
    Ok(run
        .records
        .iter()
        .map(|r| r.g)
        .filter(|&g| g != 0)
        .collect())
}
