//! Gauss–Legendre rules and piecewise contour paths.

use std::f64::consts::PI;

use crate::ComplexValue;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f over `panels` equal panels.
    pub fn integrate<F, T>(&self, a: f64, b: f64, panels: usize, mut f: F) -> T
    where
        F: FnMut(f64) -> T,
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        let h = (b - a) / panels as f64;
        let mut total = T::default();
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                total = total + f(mid + 0.5 * h * x) * (0.5 * h * w);
            }
        }
        total
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One piece of a contour, parametrized by u ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        from: ComplexValue,
        to: ComplexValue,
    },
    Arc {
        center: ComplexValue,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn point(&self, u: f64) -> ComplexValue {
        match *self {
            Segment::Line { from, to } => from + (to - from) * u,
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => center + ComplexValue::from_polar(radius, start_angle + sweep * u),
        }
    }

    /// dz/du
    pub fn tangent(&self, u: f64) -> ComplexValue {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                radius,
                start_angle,
                sweep,
                ..
            } => {
                ComplexValue::new(0.0, sweep)
                    * ComplexValue::from_polar(radius, start_angle + sweep * u)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start_angle: start_angle + sweep,
                sweep: -sweep,
            },
        }
    }
}

/// A piecewise path; closed when the last segment ends where the first begins.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    pub segments: Vec<Segment>,
}

impl Path {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Counterclockwise polyline through `vertices`, closed back to the first.
    pub fn polygon(vertices: &[ComplexValue]) -> Self {
        let n = vertices.len();
        Self {
            segments: (0..n)
                .map(|i| Segment::Line {
                    from: vertices[i],
                    to: vertices[(i + 1) % n],
                })
                .collect(),
        }
    }

    /// Counterclockwise circle as four quarter arcs.
    pub fn circle(center: ComplexValue, radius: f64) -> Self {
        Self {
            segments: (0..4)
                .map(|k| Segment::Arc {
                    center,
                    radius,
                    start_angle: k as f64 * PI / 2.0,
                    sweep: PI / 2.0,
                })
                .collect(),
        }
    }
}
