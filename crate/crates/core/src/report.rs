//! Run configuration, the zero cache, verification reports and plot data.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{ContourCounter, QuadPolicy};
use crate::decider::{verdict_from_records, Verdict, VerificationRecord, VerificationRun};
use crate::riemann_siegel::{self, RsError, T_MIN};
use crate::special::{self, EvalAccuracy, SpecialError, DEFAULT_XI_FLOOR};
use crate::target::CompletedZeta;
use crate::zeros::{CriticalZero, EnumeratorConfig};
use crate::ComplexValue;

/// Environment variable overriding the directory of the zero cache.
pub const CACHE_DIR_ENV: &str = "CRITLINE_CACHE_DIR";

pub const DEFAULT_CACHE_FILE: &str = "zeros.csv";

/// Header row of the zero cache.
pub const CACHE_HEADER: [&str; 4] = ["index", "ordinate", "width", "multiplicity"];

/// Largest number of rows `plot_rows` will produce.
pub const MAX_PLOT_ROWS: f64 = 1e7;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid plot range: {0}")]
    Range(String),
    #[error("malformed zero cache {path}: {msg}")]
    Cache { path: PathBuf, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Evaluation(#[from] RsError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(ReportError::Config(format!(
                "unknown report format '{other}'"
            ))),
        }
    }
}

/// Everything a run needs. Exactly one of `t_max` and `n_max` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub t_max: Option<f64>,
    pub n_max: Option<usize>,
    pub tol: f64,
    pub oversample: usize,
    pub em_terms: usize,
    pub em_order: usize,
    pub quad_nodes: usize,
    pub xi_floor: f64,
    pub cache_path: String,
    pub report_format: ReportFormat,
    /// Off-line zero multiplied into ξ; test fixture only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inject_zero: Option<[f64; 2]>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let acc = EvalAccuracy::default();
        let en = EnumeratorConfig::default();
        Self {
            t_max: None,
            n_max: None,
            tol: en.tol,
            oversample: en.oversample,
            em_terms: acc.em_terms,
            em_order: acc.em_order,
            quad_nodes: QuadPolicy::default().nodes,
            xi_floor: DEFAULT_XI_FLOOR,
            cache_path: DEFAULT_CACHE_FILE.to_string(),
            report_format: ReportFormat::Json,
            inject_zero: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ReportError> {
    value
        .trim()
        .parse()
        .map_err(|_| ReportError::Config(format!("cannot parse {key} = '{value}'")))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ReportError> {
        match key.trim() {
            "t_max" | "tmax" => self.t_max = Some(parse_num(key, value)?),
            "n_max" | "nmax" => self.n_max = Some(parse_num(key, value)?),
            "tol" => self.tol = parse_num(key, value)?,
            "oversample" => self.oversample = parse_num(key, value)?,
            "em_terms" => self.em_terms = parse_num(key, value)?,
            "em_order" => self.em_order = parse_num(key, value)?,
            "quad_nodes" => self.quad_nodes = parse_num(key, value)?,
            "xi_floor" => self.xi_floor = parse_num(key, value)?,
            "cache_path" => self.cache_path = value.trim().to_string(),
            "report_format" | "format" => self.report_format = value.parse()?,
            other => return Err(ReportError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file; blank lines and `#` comments are ignored.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), ReportError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ReportError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::Config(m));
        match (self.t_max, self.n_max) {
            (Some(_), Some(_)) | (None, None) => {
                return bad("exactly one of t_max and n_max must be set".into())
            }
            (Some(t), None) if !(t.is_finite() && t >= T_MIN) => {
                return bad(format!("t_max = {t} must be at least {T_MIN}"))
            }
            _ => {}
        }
        if !(self.tol >= 1e-12 && self.tol < 1.0) {
            return bad(format!("tol = {} must lie in [1e-12, 1)", self.tol));
        }
        if self.oversample < 4 {
            return bad(format!(
                "oversample = {} must be at least 4",
                self.oversample
            ));
        }
        self.accuracy()
            .validate()
            .map_err(|e| ReportError::Config(e.to_string()))?;
        if self.quad_nodes < 2 || self.quad_nodes > 128 {
            return bad(format!(
                "quad_nodes = {} must lie in [2, 128]",
                self.quad_nodes
            ));
        }
        if !(self.xi_floor > 0.0 && self.xi_floor < 1.0) {
            return bad(format!("xi_floor = {} must lie in (0, 1)", self.xi_floor));
        }
        if self.cache_path.trim().is_empty() {
            return bad("cache_path is empty".into());
        }
        Ok(())
    }

    pub fn accuracy(&self) -> EvalAccuracy {
        EvalAccuracy {
            em_terms: self.em_terms,
            em_order: self.em_order,
            ..EvalAccuracy::default()
        }
    }

    pub fn enumerator(&self) -> EnumeratorConfig {
        EnumeratorConfig {
            oversample: self.oversample,
            tol: self.tol,
            acc: self.accuracy(),
        }
    }

    pub fn quad_policy(&self) -> QuadPolicy {
        QuadPolicy {
            nodes: self.quad_nodes,
            ..QuadPolicy::default()
        }
    }

    pub fn counter(&self) -> ContourCounter<CompletedZeta> {
        ContourCounter::new(
            CompletedZeta::new(self.accuracy()),
            self.quad_policy(),
            self.xi_floor,
        )
    }

    pub fn injected_zero(&self) -> Option<ComplexValue> {
        self.inject_zero.map(|[re, im]| ComplexValue::new(re, im))
    }

    /// Cache location, with the directory replaced by `$CRITLINE_CACHE_DIR`
    /// when that is set.
    pub fn resolved_cache_path(&self) -> PathBuf {
        resolve_cache_path(
            &self.cache_path,
            std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from),
        )
    }
}

pub fn resolve_cache_path(cache_path: &str, dir_override: Option<PathBuf>) -> PathBuf {
    let p = PathBuf::from(cache_path);
    match dir_override {
        Some(dir) => dir.join(p.file_name().unwrap_or(p.as_os_str())),
        None => p,
    }
}

/// Decimal with 17 significant digits.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp10 = x.abs().log10().floor() as i32;
    if (-4..17).contains(&exp10) {
        let decimals = (16 - exp10).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ReportError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| ReportError::Io(e.error))?;
    Ok(())
}

pub fn zero_cache_text(zeros: &[CriticalZero]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CACHE_HEADER)?;
    for z in zeros {
        w.write_record([
            z.index.to_string(),
            format_sig17(z.ordinate),
            format!("{:.16e}", z.width),
            z.multiplicity.map(|m| m.to_string()).unwrap_or_default(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| ReportError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_zero_cache(path: &Path, zeros: &[CriticalZero]) -> Result<(), ReportError> {
    write_atomic(path, zero_cache_text(zeros)?.as_bytes())
}

pub fn parse_zero_cache(text: &str, path: &Path) -> Result<Vec<CriticalZero>, ReportError> {
    let err = |msg: String| ReportError::Cache {
        path: path.to_path_buf(),
        msg,
    };
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CACHE_HEADER {
        return Err(err(format!("unexpected header {header:?}")));
    }
    let mut zeros = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let index: usize = field(0)
            .parse()
            .map_err(|_| err(format!("row {}: bad index", i + 1)))?;
        if index != i + 1 {
            return Err(err(format!("row {}: index {index} out of sequence", i + 1)));
        }
        let ordinate: f64 = field(1)
            .parse()
            .map_err(|_| err(format!("row {}: bad ordinate", i + 1)))?;
        let width: f64 = field(2)
            .parse()
            .map_err(|_| err(format!("row {}: bad width", i + 1)))?;
        let multiplicity = match field(3) {
            "" => None,
            m => Some(
                m.parse()
                    .map_err(|_| err(format!("row {}: bad multiplicity", i + 1)))?,
            ),
        };
        if let Some(prev) = zeros.last().map(|z: &CriticalZero| z.ordinate) {
            if !(ordinate > prev) {
                return Err(err(format!("row {}: ordinates not increasing", i + 1)));
            }
        }
        zeros.push(CriticalZero {
            index,
            ordinate,
            width,
            multiplicity,
        });
    }
    Ok(zeros)
}

pub fn read_zero_cache(path: &Path) -> Result<Vec<CriticalZero>, ReportError> {
    parse_zero_cache(&fs::read_to_string(path)?, path)
}

/// The verification report written by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: RunConfig,
    pub records: Vec<VerificationRecord>,
    pub verdict: Verdict,
    pub off_line_indices: Vec<usize>,
    pub timing_seconds: f64,
}

impl ReportDocument {
    pub fn new(config: RunConfig, run: VerificationRun, timing_seconds: f64) -> Self {
        let off_line_indices = {
            let mut v: Vec<usize> = run
                .records
                .iter()
                .map(|r| r.g)
                .filter(|&g| g != 0)
                .collect();
            v.dedup();
            v
        };
        Self {
            config,
            records: run.records,
            verdict: run.verdict,
            off_line_indices,
            timing_seconds,
        }
    }

    /// Whether the stored verdict follows from the stored records.
    pub fn is_consistent(&self) -> bool {
        self.records.windows(2).all(|w| w[0].n < w[1].n)
            && verdict_from_records(&self.records) == self.verdict
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flattened records with the verdict and timing as leading comments.
    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut out = String::new();
        let _ = writeln!(out, "# verdict={}", self.verdict.as_str());
        let _ = writeln!(out, "# timing_seconds={}", self.timing_seconds);
        if let Some([re, im]) = self.config.inject_zero {
            let _ = writeln!(out, "# inject_zero={re}:{im}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "n",
            "gamma",
            "delta_lo",
            "delta_hi",
            "l",
            "m",
            "g",
            "status",
            "phase_raw_re",
            "quad_raw_re",
            "quad_raw_im",
            "quad_distance",
            "diagnostics",
        ])?;
        for r in &self.records {
            let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
            let (phase_re, quad_re, quad_im, quad_d) = match &r.windings {
                Some(wd) => (
                    format!("{:e}", wd.rectangle.phase.raw.re),
                    format!("{:e}", wd.rectangle.quadrature.raw.re),
                    format!("{:e}", wd.rectangle.quadrature.raw.im),
                    format!("{:e}", wd.rectangle.quadrature.distance),
                ),
                None => Default::default(),
            };
            let status = serde_json::to_value(r.status)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            w.write_record([
                r.n.to_string(),
                format_sig17(r.gamma),
                format_sig17(r.delta_lo),
                format_sig17(r.delta_hi),
                opt(r.l),
                opt(r.m),
                r.g.to_string(),
                status,
                phase_re,
                quad_re,
                quad_im,
                quad_d,
                r.diagnostics.join("; "),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| ReportError::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String, ReportError> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Z,
    Theta,
    XiAbs,
}

impl PlotKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlotKind::Z => "Z",
            PlotKind::Theta => "theta",
            PlotKind::XiAbs => "xi_abs",
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Z" | "z" => Ok(PlotKind::Z),
            "theta" => Ok(PlotKind::Theta),
            "xi_abs" => Ok(PlotKind::XiAbs),
            other => Err(ReportError::Range(format!(
                "unknown plot quantity '{other}'"
            ))),
        }
    }
}

/// Sample points a, a+h, ... up to b (inclusive within rounding).
pub fn plot_grid(a: f64, b: f64, h: f64) -> Result<Vec<f64>, ReportError> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(ReportError::Range(format!("need a <= b, got {a}:{b}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(ReportError::Range(format!("step {h} must be positive")));
    }
    let span = (b - a) / h;
    if span > MAX_PLOT_ROWS {
        return Err(ReportError::Range(format!(
            "{span:.0} rows exceeds the limit"
        )));
    }
    let rows = (span + 1e-9).floor() as usize + 1;
    Ok((0..rows).map(|k| a + k as f64 * h).collect())
}

/// (t, value) rows from the reference evaluators.
pub fn plot_rows(
    kind: PlotKind,
    a: f64,
    b: f64,
    h: f64,
    acc: &EvalAccuracy,
) -> Result<Vec<(f64, f64)>, ReportError> {
    let grid = plot_grid(a, b, h)?;
    if matches!(kind, PlotKind::Z | PlotKind::Theta) && a < T_MIN {
        return Err(ReportError::Range(format!(
            "{} needs t >= {T_MIN}, got a = {a}",
            kind.name()
        )));
    }
    use rayon::prelude::*;
    grid.par_iter()
        .map(|&t| {
            let v = match kind {
                PlotKind::Z => riemann_siegel::z_reference(t, acc)?.value,
                PlotKind::Theta => riemann_siegel::theta_exact(t)?.value,
                // |ξ(½ − it)| = |ξ(½ + it)|, so negative t is evaluated reflected
                PlotKind::XiAbs => special::xi(ComplexValue::new(0.5, t.abs()), acc)?.norm(),
            };
            Ok((t, v))
        })
        .collect()
}

pub fn plot_text(kind: PlotKind, a: f64, b: f64, h: f64, rows: &[(f64, f64)]) -> String {
    let mut out = format!(
        "# critline plot-data what={} a={a} b={b} step={h} rows={} columns=t,value\n",
        kind.name(),
        rows.len()
    );
    for (t, v) in rows {
        let _ = writeln!(out, "{} {:e}", format_sig17(*t), v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig17_formatting() {
        assert_eq!(format_sig17(14.134725141734693), "14.134725141734693");
        assert_eq!(format_sig17(1.0), "1.0000000000000000");
        assert_eq!(format_sig17(0.5), "0.50000000000000000");
        let x = 14.134725141734693f64;
        assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
    }

    proptest! {
        #[test]
        fn sig17_round_trips(x in 1.0f64..1e4) {
            prop_assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }

        #[test]
        fn cache_round_trips(gaps in proptest::collection::vec(0.01f64..5.0, 0..40), seed in 2.0f64..50.0) {
            let mut t = seed;
            let zeros: Vec<CriticalZero> = gaps.iter().enumerate().map(|(i, g)| {
                t += g;
                CriticalZero { index: i + 1, ordinate: t, width: g * 1e-10, multiplicity: if i % 3 == 0 { Some(1) } else { None } }
            }).collect();
            let text = zero_cache_text(&zeros).unwrap();
            let back = parse_zero_cache(&text, Path::new("mem")).unwrap();
            prop_assert_eq!(back, zeros);
        }
    }

    #[test]
    fn cache_rejects_disorder() {
        let text = "index,ordinate,width,multiplicity\n1,20.0,1e-9,\n2,15.0,1e-9,\n";
        assert!(parse_zero_cache(text, Path::new("x")).is_err());
        let text = "idx,ordinate,width,multiplicity\n";
        assert!(parse_zero_cache(text, Path::new("x")).is_err());
        let text = "index,ordinate,width,multiplicity\n";
        assert!(parse_zero_cache(text, Path::new("x")).unwrap().is_empty());
    }

    #[test]
    fn config_file_and_validation() {
        let mut c = RunConfig::default();
        c.apply_file_text(
            "# defaults\ntol = 1e-10\noversample=16\n\nreport_format = csv # trailing\n",
        )
        .unwrap();
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.oversample, 16);
        assert_eq!(c.report_format, ReportFormat::Csv);
        assert!(c.validate().is_err(), "no target set");
        c.n_max = Some(5);
        c.validate().unwrap();
        c.t_max = Some(10.0);
        assert!(c.validate().is_err(), "both targets set");
        c.t_max = None;
        c.em_terms = 3;
        assert!(c.validate().is_err());
        assert!(c.clone().apply_file_text("bogus = 1").is_err());
        assert!(c.clone().apply_file_text("no equals sign").is_err());
    }

    #[test]
    fn cache_dir_override() {
        let p = resolve_cache_path("data/zeros.csv", Some(PathBuf::from("/tmp/x")));
        assert_eq!(p, PathBuf::from("/tmp/x/zeros.csv"));
        assert_eq!(resolve_cache_path("z.csv", None), PathBuf::from("z.csv"));
    }

    #[test]
    fn plot_grid_counts() {
        assert_eq!(plot_grid(10.0, 30.0, 0.01).unwrap().len(), 2001);
        let tp = 2.0 * std::f64::consts::PI;
        assert_eq!(plot_grid(tp, tp, 0.1).unwrap().len(), 1);
        assert!(plot_grid(3.0, 2.0, 0.1).is_err());
        assert!(plot_grid(0.0, 1.0, 0.0).is_err());
        assert!(plot_grid(0.0, 1e8, 1.0).is_err());
    }

    #[test]
    fn xi_abs_rows_are_symmetric() {
        let acc = EvalAccuracy::default();
        let rows = plot_rows(PlotKind::XiAbs, -5.0, 5.0, 0.5, &acc).unwrap();
        let n = rows.len();
        for k in 0..n {
            let (t, v) = rows[k];
            let (t2, v2) = rows[n - 1 - k];
            assert!((t + t2).abs() < 1e-12);
            assert!((v - v2).abs() <= 1e-10);
        }
        assert!(plot_rows(PlotKind::Z, 1.0, 5.0, 0.5, &acc).is_err());
    }
}
