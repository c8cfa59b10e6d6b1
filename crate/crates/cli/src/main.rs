//! `invode`: run invariant-scheme experiments from the command line.
//!
//! Settings are layered: `--preset`, then individual flags, then `--config`.
//! Exit status is 0 on success, 2 on a configuration error and 3 when a
//! reference solution was unavailable (the report is still written).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use invariant_ode::harness::emit::{to_json, write_csv};
use invariant_ode::harness::{
    emit, matched_spec, run_comparison, run_convergence, run_property_suite, run_singularity, solve, ExperimentReport,
    Format, SchemeKind, Settings,
};
use invariant_ode::Error;

#[derive(Parser)]
#[command(name = "invode", version, about = "Symmetry-preserving difference schemes for SL(2,R)-invariant ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem and record its error against the reference.
    Solve(Common),
    /// Endpoint errors over `--h-list` and the fitted convergence slope.
    Converge(Common),
    /// Compare the configured scheme with others at matched step counts.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Schemes to compare against, comma separated.
        #[arg(long, default_value = "standard_fd")]
        against: String,
    },
    /// Integrate through a fold and report the closest approach.
    Singularity(Common),
    /// Randomized invariance, equivariance and conservation checks.
    Props(Common),
}

#[derive(Args, Default)]
struct Common {
    /// Named parameter set: fig1, fig2, fig3 or convergence.
    #[arg(long)]
    preset: Option<String>,
    /// `key = value` file applied after the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// second_order, third_order or schwarzian.
    #[arg(long)]
    ode: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Constant right side of the Schwarzian equation.
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// Polynomial right side of the Schwarzian equation, `c0,c1,...`.
    #[arg(long, allow_hyphen_values = true)]
    f_coeffs: Option<String>,
    /// Initial data `x0,y0[,yp0[,ypp0]]`.
    #[arg(long, allow_hyphen_values = true)]
    ic: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    h_list: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<String>,
    /// Lower x bound when continuing through a fold.
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<String>,
    /// Continue along the second branch after a fold.
    #[arg(long)]
    through_fold: Option<String>,
    #[arg(long)]
    max_steps: Option<String>,
    /// Tolerance of the Runge-Kutta reference.
    #[arg(long)]
    rk_tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output path; without it the report goes to stdout.
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings, Error> {
        let base = match &self.preset {
            Some(p) => Settings::preset(p)?,
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        let pairs = [
            ("ode", &self.ode),
            ("scheme", &self.scheme),
            ("gamma", &self.gamma),
            ("alpha", &self.alpha),
            ("f", &self.f),
            ("f_coeffs", &self.f_coeffs),
            ("ic", &self.ic),
            ("h", &self.h),
            ("h_list", &self.h_list),
            ("x_max", &self.x_max),
            ("x_min", &self.x_min),
            ("through_fold", &self.through_fold),
            ("max_steps", &self.max_steps),
            ("rk_tol", &self.rk_tol),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, v)?;
            }
        }
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                Settings::from_kv(&text).map_err(|e| match e {
                    Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                    e => e,
                })?
            }
            None => Settings::default(),
        };
        Ok(base.overridden_by(flags).overridden_by(file))
    }
}

fn parse_schemes(list: &str) -> Result<Vec<SchemeKind>, Error> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

fn execute(command: &Command) -> Result<(ExperimentReport, Settings), Error> {
    let (common, against) = match command {
        Command::Solve(c) | Command::Converge(c) | Command::Singularity(c) | Command::Props(c) => (c, None),
        Command::Compare { common, against } => (common, Some(against)),
    };
    let s = common.settings()?;
    let report = match command {
        Command::Props(_) => run_property_suite(s.seed.unwrap_or(0)),
        Command::Solve(_) => solve(&s.problem()?)?,
        Command::Converge(_) => {
            let spec = s.problem()?;
            let h_list = s.h_list.clone().unwrap_or_else(|| vec![spec.h]);
            run_convergence(&spec, &h_list)?
        }
        Command::Singularity(_) => run_singularity(&s.problem()?)?,
        Command::Compare { .. } => {
            let spec = s.problem()?;
            let mut specs = vec![spec.clone()];
            for kind in parse_schemes(against.expect("compare has --against"))? {
                let other = matched_spec(&spec, kind)?;
                other.validate()?;
                specs.push(other);
            }
            run_comparison(&specs)?
        }
    };
    Ok((report, s))
}

fn summary(report: &ExperimentReport) -> Vec<String> {
    let mut lines = Vec::new();
    for r in &report.runs {
        let t = &r.trajectory;
        let err = r.max_error.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "n/a".into());
        lines.push(format!(
            "{}: {} samples, x reached {:.6}, max error {err}, {:?}",
            r.label,
            t.samples.len(),
            t.max_x(),
            t.termination
        ));
    }
    if let Some(c) = &report.convergence {
        let slope = c.slope.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into());
        let res = c.fit_residual.map(|v| format!("{v:.2e}")).unwrap_or_else(|| "n/a".into());
        lines.push(format!("convergence slope {slope} (fit residual {res}) at x = {}", c.x_end));
    }
    if let Some(c) = &report.comparison {
        for e in &c.entries {
            let err = e.max_error.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "n/a".into());
            let ratio = e.ratio_to_first.map(|v| format!("{v:.2}")).unwrap_or_else(|| "n/a".into());
            lines.push(format!(
                "{}: max error {err} on x <= {:.6}, {} steps, ratio to first {ratio}",
                e.label, c.x_common, e.steps
            ));
        }
    }
    if let Some(s) = &report.singularity {
        let est = s.estimate.map(|v| format!("{v:.6}")).unwrap_or_else(|| "none".into());
        let refx = s.reference_x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into());
        lines.push(format!("{:?}: closest approach {est}, reference {refx}", s.outcome));
    }
    if let Some(p) = &report.properties {
        for c in &p.checks {
            let status = if c.passed { "ok  " } else { "FAIL" };
            lines.push(format!(
                "{status} {}: {} trials, max violation {:.2e} (tol {:e})",
                c.name, c.trials, c.max_violation, c.tolerance
            ));
        }
    }
    lines.extend(report.notes.iter().cloned());
    lines
}

fn write_report(report: &ExperimentReport, s: &Settings) -> Result<(), Error> {
    let format = s.format.unwrap_or(Format::Json);
    if let Some(path) = &s.out {
        for p in emit(report, format, path)? {
            eprintln!("wrote {}", p.display());
        }
        return Ok(());
    }
    let stdout = PathBuf::from("<stdout>");
    let io_err = |source| Error::Io {
        path: stdout.clone(),
        source,
    };
    let mut out = io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", to_json(report)?).map_err(io_err),
        Format::Csv => {
            if report.runs.len() > 1 {
                return Err(Error::Config(format!(
                    "{} trajectories need --out for csv output",
                    report.runs.len()
                )));
            }
            write_csv(&mut out, report.runs.first()).map_err(|e| Error::Serialization(e.to_string()))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::OracleUnavailable(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli.command).and_then(|(report, settings)| {
        for line in summary(&report) {
            eprintln!("{line}");
        }
        write_report(&report, &settings)?;
        Ok(report.partial)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("invode: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
