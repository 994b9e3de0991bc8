//! Argument-principle zero counts over circles and rectangles.
//!
//! Every contour is measured twice. The primary count tracks the continuous
//! change of arg ξ along the path, subdividing any step whose phase jump
//! exceeds π/2. The check count integrates ξ'/ξ with composite
//! Gauss–Legendre panels. A contour is accepted only when both values are
//! within 0.25 of the same integer.
//!
//! Rectangles are bounded by the midpoints δ_n = (γ_{n−1} + γ_n)/2 between
//! consecutive enumerated ordinates, with γ_0 = 1. When ξ comes too close to
//! zero on a horizontal edge, that level is moved inside its gap instead of
//! indenting the contour.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{GaussLegendre, Path, Segment};
use crate::special::{SpecialError, DEFAULT_XI_FLOOR};
use crate::target::XiTarget;
use crate::zeros::CriticalZero;
use crate::ComplexValue;

/// Acceptance radius around the nearest integer.
pub const ACCEPT_DISTANCE: f64 = 0.25;

/// Ordinate standing in for γ_0 when forming δ_1.
pub const ORIGIN_ORDINATE: f64 = 1.0;

/// Smallest shrinking-circle index; radius 1/5 stays clear of points a
/// quarter unit off the critical line.
pub const MIN_CIRCLE_INDEX: usize = 5;

/// Circles tried after j_0 before giving up on stabilization.
pub const MAX_CIRCLE_STEPS: usize = 6;

/// Level perturbation steps, in units of gap/16, tried in this order.
const LEVEL_OFFSETS: [f64; 9] = [0.0, -1.0, 1.0, -2.0, 2.0, -3.0, 3.0, -4.0, 4.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContourError {
    #[error(
        "xi too close to zero on the contour at s = {s} (scaled |xi| = {scaled_abs:e} < {floor:e})"
    )]
    ContourTooCloseToZero {
        s: ComplexValue,
        scaled_abs: f64,
        floor: f64,
    },
    #[error("{method} winding {raw} is not within {ACCEPT_DISTANCE} of an integer")]
    NonIntegerResult {
        method: &'static str,
        raw: ComplexValue,
    },
    #[error("phase tracking counts {phase} but quadrature counts {quadrature}")]
    MethodDisagreement { phase: i64, quadrature: i64 },
    #[error("no admissible level near {level} (tried {attempts} positions)")]
    NoValidPerturbation { level: f64, attempts: usize },
    #[error("circle counts for zero {n} increase with j: {counts:?}")]
    NonMonotoneCounts { n: usize, counts: Vec<(usize, i64)> },
    #[error("circle counts for zero {n} did not stabilize: {counts:?}")]
    NotStabilized { n: usize, counts: Vec<(usize, i64)> },
    #[error("circle around zero {n} encloses no zero (counts {counts:?})")]
    NoZeroEnclosed { n: usize, counts: Vec<(usize, i64)> },
    #[error("negative winding {0} on a positively oriented contour")]
    NegativeCount(i64),
    #[error("enumeration has {have} zeros but index {need} is required")]
    MissingZeros { need: usize, have: usize },
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error(transparent)]
    Evaluation(SpecialError),
}

impl From<SpecialError> for ContourError {
    fn from(e: SpecialError) -> Self {
        match e {
            SpecialError::NearZeroOfXi {
                s,
                scaled_abs,
                floor,
            } => ContourError::ContourTooCloseToZero {
                s,
                scaled_abs,
                floor,
            },
            other => ContourError::Evaluation(other),
        }
    }
}

/// Discretization settings for both counting methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadPolicy {
    /// Gauss–Legendre points per panel.
    pub nodes: usize,
    /// Target panel length in the first round.
    pub panel_len: f64,
    /// Number of quadrature rounds; each doubles the panel count.
    pub max_rounds: usize,
    /// Stop refining once the quadrature result is this close to an integer.
    pub converged_distance: f64,
    /// Initial phase-tracking samples per unit length.
    pub phase_density: f64,
    pub min_phase_nodes: usize,
    pub max_phase_depth: u32,
}

impl Default for QuadPolicy {
    fn default() -> Self {
        Self {
            nodes: 16,
            panel_len: 0.5,
            max_rounds: 3,
            converged_distance: 1e-8,
            phase_density: 16.0,
            min_phase_nodes: 8,
            max_phase_depth: 40,
        }
    }
}

impl QuadPolicy {
    pub fn validate(&self) -> Result<(), ContourError> {
        if self.nodes < 2
            || !(self.panel_len > 0.0)
            || self.max_rounds == 0
            || !(self.phase_density > 0.0)
            || self.min_phase_nodes < 2
        {
            return Err(ContourError::InvalidContour(format!(
                "bad quadrature policy {self:?}"
            )));
        }
        Ok(())
    }

    fn panels(&self, seg: &Segment, round: usize) -> usize {
        ((seg.length() / self.panel_len).ceil() as usize).max(1) << round
    }

    fn phase_nodes(&self, seg: &Segment) -> usize {
        ((seg.length() * self.phase_density).ceil() as usize).max(self.min_phase_nodes)
    }
}

/// A winding number estimate: `raw` is (1/2πi)∮ f'/f dz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub raw: ComplexValue,
    pub count: i64,
    pub distance: f64,
}

impl WindingResult {
    pub fn from_raw(raw: ComplexValue) -> Self {
        let count = raw.re.round() as i64;
        Self {
            raw,
            count,
            distance: (raw - count as f64).norm(),
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.distance < ACCEPT_DISTANCE && self.raw.im.abs() < ACCEPT_DISTANCE
    }
}

/// Both counts for one contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourCount {
    pub phase: WindingResult,
    pub quadrature: WindingResult,
    /// Quadrature distance to the nearest integer after each round.
    pub quadrature_distances: Vec<f64>,
    pub phase_evaluations: usize,
}

impl ContourCount {
    pub fn count(&self) -> i64 {
        self.phase.count
    }
}

/// Circle of radius 1/j around ½ + iγ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleContour {
    pub center: ComplexValue,
    pub radius: f64,
    pub j: usize,
}

impl CircleContour {
    pub fn new(gamma: f64, j: usize) -> Self {
        Self {
            center: ComplexValue::new(0.5, gamma),
            radius: 1.0 / j as f64,
            j,
        }
    }

    pub fn path(&self) -> Path {
        Path::circle(self.center, self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Bottom,
    Top,
}

/// A horizontal edge moved away from its midpoint level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub edge: Edge,
    pub original: f64,
    pub adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleContour {
    pub bottom: f64,
    pub top: f64,
    pub left_re: f64,
    pub right_re: f64,
    pub perturbations: Vec<Perturbation>,
    /// Floor the edges were checked against.
    pub xi_floor: f64,
}

impl RectangleContour {
    pub fn new(bottom: f64, top: f64, xi_floor: f64) -> Self {
        Self {
            bottom,
            top,
            left_re: 0.0,
            right_re: 1.0,
            perturbations: Vec::new(),
            xi_floor,
        }
    }

    /// Counterclockwise boundary starting at the bottom-left corner.
    pub fn path(&self) -> Path {
        Path::polygon(&[
            ComplexValue::new(self.left_re, self.bottom),
            ComplexValue::new(self.right_re, self.bottom),
            ComplexValue::new(self.right_re, self.top),
            ComplexValue::new(self.left_re, self.top),
        ])
    }

    /// The two halves of the boundary on either side of Re s = ½, each run
    /// from the bottom midpoint to the top midpoint.
    pub fn half_paths(&self) -> (Path, Path) {
        let mid = 0.5 * (self.left_re + self.right_re);
        let p = |re: f64, im: f64| ComplexValue::new(re, im);
        let right = Path::new(vec![
            Segment::Line {
                from: p(mid, self.bottom),
                to: p(self.right_re, self.bottom),
            },
            Segment::Line {
                from: p(self.right_re, self.bottom),
                to: p(self.right_re, self.top),
            },
            Segment::Line {
                from: p(self.right_re, self.top),
                to: p(mid, self.top),
            },
        ]);
        let left = Path::new(vec![
            Segment::Line {
                from: p(mid, self.bottom),
                to: p(self.left_re, self.bottom),
            },
            Segment::Line {
                from: p(self.left_re, self.bottom),
                to: p(self.left_re, self.top),
            },
            Segment::Line {
                from: p(self.left_re, self.top),
                to: p(mid, self.top),
            },
        ]);
        (left, right)
    }
}

/// Shrinking-circle outcome for one zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityResult {
    pub n: usize,
    pub l: u32,
    pub j0: usize,
    /// (j, count) in the order evaluated.
    pub counts: Vec<(usize, i64)>,
    pub windings: Vec<ContourCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripCount {
    pub rectangle: RectangleContour,
    pub winding: ContourCount,
}

impl StripCount {
    pub fn count(&self) -> i64 {
        self.winding.count()
    }
}

/// A horizontal level after the floor check.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Level {
    original: f64,
    y: f64,
    floor: f64,
}

/// Counts zeros of an [`XiTarget`] inside contours.
#[derive(Debug, Clone)]
pub struct ContourCounter<T> {
    pub target: T,
    pub policy: QuadPolicy,
    pub xi_floor: f64,
    rule: GaussLegendre,
}

impl<T: XiTarget> ContourCounter<T> {
    pub fn new(target: T, policy: QuadPolicy, xi_floor: f64) -> Self {
        let rule = GaussLegendre::new(policy.nodes.max(1));
        Self {
            target,
            policy,
            xi_floor,
            rule,
        }
    }

    pub fn with_defaults(target: T) -> Self {
        Self::new(target, QuadPolicy::default(), DEFAULT_XI_FLOOR)
    }

    fn unit_value(&self, s: ComplexValue, floor: f64) -> Result<ComplexValue, ContourError> {
        let v = self.target.sample(s, floor)?.value;
        let r = v.norm();
        if !(r > 0.0) {
            return Err(ContourError::ContourTooCloseToZero {
                s,
                scaled_abs: 0.0,
                floor,
            });
        }
        Ok(v / r)
    }

    /// Continuous change of arg f along `path`, and the number of samples.
    pub fn phase_change(&self, path: &Path, floor: f64) -> Result<(f64, usize), ContourError> {
        let mut total = 0.0;
        let mut evaluations = 0;
        for seg in &path.segments {
            let m = self.policy.phase_nodes(seg);
            let values = (0..=m)
                .into_par_iter()
                .map(|k| {
                    let u = k as f64 / m as f64;
                    self.unit_value(seg.point(u), floor).map(|v| (u, v))
                })
                .collect::<Result<Vec<_>, _>>()?;
            evaluations += values.len();
            for w in values.windows(2) {
                let (d, e) = self.phase_step(seg, w[0], w[1], 0, floor)?;
                total += d;
                evaluations += e;
            }
        }
        Ok((total, evaluations))
    }

    fn phase_step(
        &self,
        seg: &Segment,
        (u0, f0): (f64, ComplexValue),
        (u1, f1): (f64, ComplexValue),
        depth: u32,
        floor: f64,
    ) -> Result<(f64, usize), ContourError> {
        let d = (f1 * f0.conj()).arg();
        if d.abs() <= 0.5 * PI {
            return Ok((d, 0));
        }
        if depth >= self.policy.max_phase_depth {
            return Err(ContourError::NonIntegerResult {
                method: "phase",
                raw: ComplexValue::new(d / (2.0 * PI), 0.0),
            });
        }
        let um = 0.5 * (u0 + u1);
        let fm = self.unit_value(seg.point(um), floor)?;
        let (a, ea) = self.phase_step(seg, (u0, f0), (um, fm), depth + 1, floor)?;
        let (b, eb) = self.phase_step(seg, (um, fm), (u1, f1), depth + 1, floor)?;
        Ok((a + b, ea + eb + 1))
    }

    /// ∫ f'/f dz along `path`, with the panel count multiplied by 2^round.
    pub fn path_integral(
        &self,
        path: &Path,
        round: usize,
        floor: f64,
    ) -> Result<ComplexValue, ContourError> {
        let mut total = ComplexValue::new(0.0, 0.0);
        for seg in &path.segments {
            let panels = self.policy.panels(seg, round);
            let h = 1.0 / panels as f64;
            let nodes: Vec<(f64, f64)> = (0..panels)
                .flat_map(|p| {
                    let mid = h * (p as f64 + 0.5);
                    self.rule
                        .nodes
                        .iter()
                        .zip(&self.rule.weights)
                        .map(move |(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
                })
                .collect();
            let terms = nodes
                .par_iter()
                .map(|&(u, w)| {
                    let ld = self.target.sample(seg.point(u), floor)?.logderiv;
                    Ok(ld * seg.tangent(u) * w)
                })
                .collect::<Result<Vec<_>, ContourError>>()?;
            total += terms.into_iter().sum::<ComplexValue>();
        }
        Ok(total)
    }

    /// Both winding counts for a closed path, at the counter's floor.
    pub fn integrate_logderiv(&self, path: &Path) -> Result<ContourCount, ContourError> {
        self.integrate_with_floor(path, self.xi_floor)
    }

    pub fn integrate_with_floor(
        &self,
        path: &Path,
        floor: f64,
    ) -> Result<ContourCount, ContourError> {
        self.policy.validate()?;
        let (arg, phase_evaluations) = self.phase_change(path, floor)?;
        let phase = WindingResult::from_raw(ComplexValue::new(arg / (2.0 * PI), 0.0));
        if !phase.is_accepted() {
            return Err(ContourError::NonIntegerResult {
                method: "phase",
                raw: phase.raw,
            });
        }

        let to_winding = ComplexValue::new(0.0, -1.0 / (2.0 * PI)); // 1/(2πi)
        let mut quadrature_distances = Vec::new();
        let mut quadrature = None;
        for round in 0..self.policy.max_rounds {
            let w = WindingResult::from_raw(self.path_integral(path, round, floor)? * to_winding);
            quadrature_distances.push(w.distance);
            quadrature = Some(w);
            if w.distance < self.policy.converged_distance {
                break;
            }
        }
        let quadrature = quadrature.expect("max_rounds validated non-zero");
        if !quadrature.is_accepted() {
            return Err(ContourError::NonIntegerResult {
                method: "quadrature",
                raw: quadrature.raw,
            });
        }
        if quadrature.count != phase.count {
            return Err(ContourError::MethodDisagreement {
                phase: phase.count,
                quadrature: quadrature.count,
            });
        }
        Ok(ContourCount {
            phase,
            quadrature,
            quadrature_distances,
            phase_evaluations,
        })
    }

    /// Stabilized count over the circles C_{n,j}, j = j_0, j_0 + 1, ...
    ///
    /// j_0 makes the first radius smaller than half the distance to the
    /// nearest other enumerated ordinate. Counts must not increase with j;
    /// the result is the first value seen twice in a row.
    pub fn multiplicity(
        &self,
        zeros: &[CriticalZero],
        n: usize,
    ) -> Result<MultiplicityResult, ContourError> {
        if n == 0 || n > zeros.len() {
            return Err(ContourError::MissingZeros {
                need: n,
                have: zeros.len(),
            });
        }
        let gamma = zeros[n - 1].ordinate;
        let nearest = [n.checked_sub(2), Some(n)]
            .into_iter()
            .flatten()
            .filter_map(|i| zeros.get(i))
            .map(|z| (z.ordinate - gamma).abs())
            .fold(f64::INFINITY, f64::min);
        let j0 = if nearest.is_finite() {
            ((2.0 / nearest).floor() as usize + 1).max(MIN_CIRCLE_INDEX)
        } else {
            MIN_CIRCLE_INDEX
        };

        let mut counts: Vec<(usize, i64)> = Vec::new();
        let mut windings = Vec::new();
        for j in j0..=j0 + MAX_CIRCLE_STEPS {
            let w = self.integrate_logderiv(&CircleContour::new(gamma, j).path())?;
            let c = w.count();
            windings.push(w);
            let prev = counts.last().map(|&(_, c)| c);
            counts.push((j, c));
            if c < 0 {
                return Err(ContourError::NegativeCount(c));
            }
            match prev {
                Some(p) if c > p => return Err(ContourError::NonMonotoneCounts { n, counts }),
                Some(p) if c == p => {
                    if c == 0 {
                        return Err(ContourError::NoZeroEnclosed { n, counts });
                    }
                    return Ok(MultiplicityResult {
                        n,
                        l: c as u32,
                        j0,
                        counts,
                        windings,
                    });
                }
                _ => {}
            }
        }
        Err(ContourError::NotStabilized { n, counts })
    }

    fn edge_clear(&self, y: f64, left: f64, right: f64, floor: f64) -> Result<bool, ContourError> {
        let seg = Segment::Line {
            from: ComplexValue::new(left, y),
            to: ComplexValue::new(right, y),
        };
        let m = self.policy.phase_nodes(&seg);
        let panels = self.policy.panels(&seg, 0);
        let h = 1.0 / panels as f64;
        let mut us: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        for p in 0..panels {
            let mid = h * (p as f64 + 0.5);
            us.extend(self.rule.nodes.iter().map(|x| mid + 0.5 * h * x));
        }
        let results: Vec<Result<(), SpecialError>> = us
            .par_iter()
            .map(|&u| self.target.sample(seg.point(u), floor).map(|_| ()))
            .collect();
        for r in results {
            match r {
                Ok(()) => {}
                Err(SpecialError::NearZeroOfXi { .. }) => return Ok(false),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(true)
    }

    /// Moves `level` by multiples of `step` until the edge clears the floor,
    /// then retries once with the floor divided by ten.
    fn settle_level(&self, level: f64, step: f64) -> Result<Level, ContourError> {
        for floor in [self.xi_floor, self.xi_floor / 10.0] {
            for k in LEVEL_OFFSETS {
                let y = level + k * step;
                if self.edge_clear(y, 0.0, 1.0, floor)? {
                    return Ok(Level {
                        original: level,
                        y,
                        floor,
                    });
                }
            }
        }
        Err(ContourError::NoValidPerturbation {
            level,
            attempts: 2 * LEVEL_OFFSETS.len(),
        })
    }

    /// δ_k with γ_0 = 1, settled against the floor. Needs zeros 1..k.
    fn level(&self, zeros: &[CriticalZero], k: usize) -> Result<Level, ContourError> {
        if k == 0 {
            return Err(ContourError::InvalidContour(
                "level index starts at 1".into(),
            ));
        }
        if k > zeros.len() {
            return Err(ContourError::MissingZeros {
                need: k,
                have: zeros.len(),
            });
        }
        let below = if k == 1 {
            ORIGIN_ORDINATE
        } else {
            zeros[k - 2].ordinate
        };
        let above = zeros[k - 1].ordinate;
        self.settle_level(0.5 * (below + above), (above - below) / 16.0)
    }

    /// Δ_n: bottom δ_n, top δ_{n+1}. Needs zeros 1..n+1.
    pub fn build_rectangle(
        &self,
        zeros: &[CriticalZero],
        n: usize,
    ) -> Result<RectangleContour, ContourError> {
        if n + 1 > zeros.len() {
            return Err(ContourError::MissingZeros {
                need: n + 1,
                have: zeros.len(),
            });
        }
        let bottom = self.level(zeros, n)?;
        let top = self.level(zeros, n + 1)?;
        let mut rect = RectangleContour::new(bottom.y, top.y, bottom.floor.min(top.floor));
        for (edge, lvl) in [(Edge::Bottom, bottom), (Edge::Top, top)] {
            if lvl.y != lvl.original {
                rect.perturbations.push(Perturbation {
                    edge,
                    original: lvl.original,
                    adjusted: lvl.y,
                });
            }
        }
        Ok(rect)
    }

    /// M(n) for a built rectangle.
    pub fn rectangle_count(&self, rect: &RectangleContour) -> Result<ContourCount, ContourError> {
        if !(rect.bottom < rect.top) {
            return Err(ContourError::InvalidContour(format!(
                "bottom {} is not below top {}",
                rect.bottom, rect.top
            )));
        }
        let w = self.integrate_with_floor(&rect.path(), rect.xi_floor)?;
        if w.count() < 0 {
            return Err(ContourError::NegativeCount(w.count()));
        }
        Ok(w)
    }

    /// Zeros with 1 < Im s < t_hi over the full strip, with multiplicity.
    /// `t_hi` may be moved by up to ±¼ if ξ is too small on the top edge.
    pub fn count_strip(&self, t_hi: f64) -> Result<StripCount, ContourError> {
        if !(t_hi > ORIGIN_ORDINATE) {
            return Err(ContourError::InvalidContour(format!(
                "strip top {t_hi} must exceed {ORIGIN_ORDINATE}"
            )));
        }
        let bottom = self.settle_level(ORIGIN_ORDINATE, 0.0)?;
        let top = self.settle_level(t_hi, 1.0 / 16.0)?;
        let mut rect = RectangleContour::new(bottom.y, top.y, top.floor);
        if top.y != top.original {
            rect.perturbations.push(Perturbation {
                edge: Edge::Top,
                original: top.original,
                adjusted: top.y,
            });
        }
        let winding = self.rectangle_count(&rect)?;
        Ok(StripCount {
            rectangle: rect,
            winding,
        })
    }
}
