use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use critline::report::{
    plot_rows, plot_text, read_zero_cache, write_atomic, write_zero_cache, PlotKind,
    ReportDocument, ReportError, ReportFormat, RunConfig,
};
use critline::zeros::enumerate_first;
use critline::{
    enumerate_zeros, verify_range, ContourCounter, CriticalZero, PlantedZero, Verdict, XiTarget,
};

#[derive(Parser, Debug)]
#[command(
    name = "critline",
    version,
    about = "Critical-line zero enumeration and off-line zero detection"
)]
struct Cli {
    /// key=value file with run defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate zeros of Z(t) on (0, T] and write the zero cache.
    Enumerate {
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        oversample: Option<usize>,
    },
    /// Count zeros in the rectangles up to index N and write a report.
    Verify {
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Report path; defaults to report.<format> next to the cache.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, hide = true, value_parser = parse_point, allow_hyphen_values = true)]
        inject_zero: Option<[f64; 2]>,
    },
    /// Multiplicity of the n-th zero from shrinking circles.
    Multiplicity {
        #[arg(long)]
        index: usize,
    },
    /// Sample Z, theta or |xi| on a grid.
    PlotData {
        #[arg(long, value_enum)]
        what: WhatArg,
        /// a:b
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WhatArg {
    #[value(name = "Z", alias = "z")]
    Z,
    #[value(name = "theta")]
    Theta,
    #[value(name = "xi_abs")]
    XiAbs,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (re, im) = s.split_once(':').ok_or("expected re:im")?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| format!("bad real part '{re}'"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| format!("bad imaginary part '{im}'"))?;
    Ok([re, im])
}

fn parse_range(s: &str) -> Result<(f64, f64), ReportError> {
    let bad = || ReportError::Range(format!("expected a:b, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// Failure with its exit code: 2 for usage and configuration, 1 otherwise.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn usage(err: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            err: err.into(),
        }
    }

    fn run(err: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 1,
            err: err.into(),
        }
    }
}

fn base_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .with_context(|| format!("reading config {}", p.display()))
            .map_err(Failure::usage)?;
        cfg.apply_file_text(&text).map_err(Failure::usage)?;
    }
    Ok(cfg)
}

fn with_target(
    mut cfg: RunConfig,
    t_max: Option<f64>,
    n_max: Option<usize>,
) -> Result<RunConfig, Failure> {
    cfg.t_max = t_max;
    cfg.n_max = n_max;
    cfg.validate().map_err(Failure::usage)?;
    Ok(cfg)
}

/// Cached zeros if there are at least `count`, else a fresh enumeration
/// which replaces the cache.
fn load_or_build(cfg: &RunConfig, count: usize) -> Result<Vec<CriticalZero>, Failure> {
    let path = cfg.resolved_cache_path();
    if path.exists() {
        match read_zero_cache(&path) {
            Ok(z) if z.len() >= count => return Ok(z),
            Ok(_) => {}
            Err(e) => eprintln!("warning: ignoring cache: {e}"),
        }
    }
    let zeros = enumerate_first(count, &cfg.enumerator()).map_err(Failure::run)?;
    write_zero_cache(&path, &zeros).map_err(Failure::run)?;
    Ok(zeros)
}

fn enumerate(cfg: RunConfig) -> Result<u8, Failure> {
    let t_max = cfg.t_max.expect("validated");
    let zeros = enumerate_zeros(t_max, &cfg.enumerator()).map_err(Failure::run)?;
    let path = cfg.resolved_cache_path();
    write_zero_cache(&path, &zeros).map_err(Failure::run)?;
    println!("{} zeros ≤ {}", zeros.len(), t_max);
    Ok(0)
}

fn run_verify<T: XiTarget>(
    counter: &ContourCounter<T>,
    zeros: &[CriticalZero],
    n_max: usize,
) -> Result<critline::VerificationRun, Failure> {
    verify_range(counter, zeros, n_max).map_err(Failure::run)
}

fn verify(cfg: RunConfig, output: Option<PathBuf>) -> Result<u8, Failure> {
    let started = Instant::now();
    let n_max = cfg.n_max.expect("validated");
    let zeros = if n_max == 0 {
        Vec::new()
    } else {
        load_or_build(&cfg, n_max + 1)?
    };
    let counter = cfg.counter();
    let run = match cfg.injected_zero() {
        Some(rho) => {
            eprintln!(
                "warning: target altered by an injected zero at {}+{}i",
                rho.re, rho.im
            );
            let planted = ContourCounter::new(
                PlantedZero::new(counter.target, rho),
                counter.policy,
                counter.xi_floor,
            );
            run_verify(&planted, &zeros, n_max)?
        }
        None => run_verify(&counter, &zeros, n_max)?,
    };

    if cfg.inject_zero.is_none() && run.verdict == Verdict::VerifiedInRange && n_max > 0 {
        let mut annotated = zeros.clone();
        for r in &run.records {
            annotated[r.n - 1].multiplicity = r.l;
        }
        write_zero_cache(&cfg.resolved_cache_path(), &annotated).map_err(Failure::run)?;
    }

    let format = cfg.report_format;
    let doc = ReportDocument::new(cfg.clone(), run, started.elapsed().as_secs_f64());
    let path = output.unwrap_or_else(|| {
        let cache = cfg.resolved_cache_path();
        let ext = match format {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        };
        cache.with_file_name(format!("report.{ext}"))
    });
    let text = doc.render(format).map_err(Failure::run)?;
    write_atomic(&path, text.as_bytes()).map_err(Failure::run)?;

    println!("verdict: {}", doc.verdict.as_str());
    if !doc.off_line_indices.is_empty() {
        println!(
            "off-line zeros suspected in rectangles: {:?}",
            doc.off_line_indices
        );
    }
    for r in doc.records.iter().filter(|r| !r.diagnostics.is_empty()) {
        eprintln!("n={}: {}", r.n, r.diagnostics.join("; "));
    }
    println!("report: {}", path.display());
    Ok(if doc.verdict == Verdict::VerifiedInRange {
        0
    } else {
        1
    })
}

fn multiplicity(cfg: RunConfig, index: usize) -> Result<u8, Failure> {
    if index == 0 {
        return Err(Failure::usage(anyhow!("--index counts from 1")));
    }
    let zeros = load_or_build(&cfg, index + 1)?;
    let res = cfg
        .counter()
        .multiplicity(&zeros, index)
        .map_err(Failure::run)?;
    println!("gamma_{index} = {}", zeros[index - 1].ordinate);
    for (j, c) in &res.counts {
        println!("j = {j}: {c}");
    }
    println!("multiplicity {}", res.l);
    Ok(0)
}

fn plot_data(
    cfg: RunConfig,
    what: WhatArg,
    range: &str,
    step: f64,
    output: Option<PathBuf>,
) -> Result<u8, Failure> {
    let kind = match what {
        WhatArg::Z => PlotKind::Z,
        WhatArg::Theta => PlotKind::Theta,
        WhatArg::XiAbs => PlotKind::XiAbs,
    };
    let (a, b) = parse_range(range).map_err(Failure::usage)?;
    let rows = plot_rows(kind, a, b, step, &cfg.accuracy()).map_err(|e| match e {
        ReportError::Range(_) => Failure::usage(e),
        other => Failure::run(other),
    })?;
    let text = plot_text(kind, a, b, step, &rows);
    match output {
        Some(p) => write_atomic(&p, text.as_bytes()).map_err(Failure::run)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    let base = base_config(cli.config.as_deref())?;
    match cli.command {
        Command::Enumerate {
            tmax,
            tol,
            oversample,
        } => {
            let mut cfg = base;
            if let Some(t) = tol {
                cfg.tol = t;
            }
            if let Some(k) = oversample {
                cfg.oversample = k;
            }
            enumerate(with_target(cfg, Some(tmax), None)?)
        }
        Command::Verify {
            nmax,
            format,
            output,
            inject_zero,
        } => {
            let mut cfg = base;
            if let Some(f) = format {
                cfg.report_format = match f {
                    FormatArg::Json => ReportFormat::Json,
                    FormatArg::Csv => ReportFormat::Csv,
                };
            }
            cfg.inject_zero = inject_zero;
            verify(with_target(cfg, None, Some(nmax))?, output)
        }
        Command::Multiplicity { index } => {
            multiplicity(with_target(base, None, Some(index))?, index)
        }
        Command::PlotData {
            what,
            range,
            step,
            output,
        } => {
            let mut cfg = base;
            cfg.t_max = None;
            cfg.n_max = Some(0);
            cfg.validate().map_err(Failure::usage)?;
            plot_data(cfg, what, &range, step, output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
