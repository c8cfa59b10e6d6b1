//! Convergence, comparison and singularity experiments.

use super::oracle::Oracle;
use super::problem::{ProblemSpec, SchemeKind};
use super::report::{
    ComparisonEntry, ComparisonSummary, ConvergencePoint, ConvergenceSummary, ExperimentKind, ExperimentReport,
    RunRecord, SingularityOutcome, SingularitySummary,
};
use crate::error::{Error, Result};
use crate::invariant_schemes::Trajectory;
use crate::numerics::{interp_cubic, linear_fit, rel_diff};
use crate::ode::{InvariantRhs, Ode};
use crate::oracles::ThirdOrderImplicit;

/// Post-fold samples closer than this to the fold are not compared with the
/// second branch.
pub const POST_FOLD_MIN_DISTANCE: f64 = 0.5;

/// Reference for `spec`, or `None` with a note on the report when unavailable.
fn oracle_or_note(spec: &ProblemSpec, report: &mut ExperimentReport) -> Result<Option<Oracle>> {
    match Oracle::for_spec(spec) {
        Ok(o) => Ok(Some(o)),
        Err(Error::OracleUnavailable(msg)) => {
            report.partial = true;
            report.notes.push(format!("oracle unavailable: {msg}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn record(label: String, spec: &ProblemSpec, trajectory: Trajectory, oracle: Option<&Oracle>, x_hi: f64) -> RunRecord {
    let err_vs_oracle = oracle.map(|o| o.errors(&trajectory)).unwrap_or_else(|| vec![None; trajectory.samples.len()]);
    let n_forward = trajectory.forward_part().len();
    let max_error = oracle.and_then(|_| {
        trajectory.samples[..n_forward]
            .iter()
            .zip(&err_vs_oracle)
            .filter(|(s, _)| s.x <= x_hi)
            .filter_map(|(_, e)| *e)
            .reduce(f64::max)
    });
    RunRecord {
        label,
        spec: spec.clone(),
        trajectory,
        oracle: oracle.map(Oracle::id),
        err_vs_oracle,
        max_error,
    }
}

/// Integrates one problem and records its errors against the reference.
pub fn solve(spec: &ProblemSpec) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(ExperimentKind::Solve);
    let trajectory = spec.integrate()?;
    let oracle = oracle_or_note(spec, &mut report)?;
    report
        .runs
        .push(record(spec.scheme.name().to_string(), spec, trajectory, oracle.as_ref(), f64::INFINITY));
    Ok(report)
}

/// Errors at the common endpoint `spec.x_max` for each step in `h_list`, and
/// the least-squares slope of `ln error` against `ln h`.
///
/// Each trajectory is interpolated to the endpoint with a cubic through its
/// four nearest samples, since invariant lattices do not land on it.
pub fn run_convergence(spec: &ProblemSpec, h_list: &[f64]) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(ExperimentKind::Convergence);
    if h_list.is_empty() {
        return Ok(report);
    }
    let oracle = oracle_or_note(spec, &mut report)?;
    let x_end = spec.x_max;
    let reference = oracle.as_ref().and_then(|o| o.eval(x_end, false));
    if oracle.is_some() && reference.is_none() {
        report.partial = true;
        report.notes.push(format!("reference undefined at the endpoint x = {x_end}"));
    }
    let mut points = Vec::new();
    for &h in h_list {
        let s = spec.with_h(h);
        let traj = s.integrate()?;
        let fwd = traj.forward_part();
        let xs: Vec<f64> = fwd.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = fwd.iter().map(|p| p.y).collect();
        match (interp_cubic(&xs, &ys, x_end), reference) {
            (Some(y), Some(r)) => points.push(ConvergencePoint {
                h,
                steps: xs.iter().filter(|&&x| x < x_end).count(),
                error: (y - r).abs(),
            }),
            (None, _) => report.notes.push(format!(
                "h = {h}: run ended at x = {} before the endpoint ({:?})",
                traj.max_x(),
                traj.termination
            )),
            _ => {}
        }
        report
            .runs
            .push(record(format!("h={h}"), &s, traj, oracle.as_ref(), x_end));
    }
    let (lh, le): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.error > 0.0)
        .map(|p| (p.h.ln(), p.error.ln()))
        .unzip();
    let fit = linear_fit(&lh, &le);
    report.convergence = Some(ConvergenceSummary {
        x_end,
        points,
        slope: fit.map(|f| f.slope),
        fit_residual: fit.map(|f| f.residual),
    });
    Ok(report)
}

/// Uniform step giving a standard scheme the same number of steps over the
/// same x-range as `traj` (its forward part).
pub fn matched_step(traj: &Trajectory) -> Result<f64> {
    let n = traj.forward_steps();
    let x0 = traj.samples.first().map(|s| s.x).unwrap_or(f64::NAN);
    let h = (traj.max_x() - x0) / n as f64;
    if n == 0 || !(h > 0.0) {
        return Err(Error::Config("trajectory has no forward steps to match".into()));
    }
    Ok(h)
}

/// `spec` with `kind` in place of its scheme and the step chosen by [`matched_step`]
/// from a run of `spec` itself.
pub fn matched_spec(spec: &ProblemSpec, kind: SchemeKind) -> Result<ProblemSpec> {
    let h = matched_step(&spec.integrate()?)?;
    Ok(ProblemSpec {
        scheme: kind,
        h,
        ..spec.clone()
    })
}

fn unique_labels(specs: &[ProblemSpec]) -> Vec<String> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let name = s.scheme.name();
            if specs.iter().filter(|t| t.scheme == s.scheme).count() > 1 {
                format!("{name}_{i}")
            } else {
                name.to_string()
            }
        })
        .collect()
}

/// Runs every spec against the reference of the first one and reports the max
/// error of each over the x-range they all share with the reference.
pub fn run_comparison(specs: &[ProblemSpec]) -> Result<ExperimentReport> {
    let first = specs
        .first()
        .ok_or_else(|| Error::Config("comparison needs at least one problem".into()))?;
    if let Some(bad) = specs.iter().find(|s| s.ode != first.ode || s.ic != first.ic) {
        return Err(Error::Config(format!(
            "compared problems must share equation and initial data ({} differs)",
            bad.scheme
        )));
    }
    let mut report = ExperimentReport::new(ExperimentKind::Comparison);
    let oracle = oracle_or_note(first, &mut report)?;
    let trajs = specs.iter().map(ProblemSpec::integrate).collect::<Result<Vec<_>>>()?;
    let mut x_common = trajs.iter().map(Trajectory::max_x).fold(first.x_max, f64::min);
    if let Some(lim) = oracle.as_ref().and_then(Oracle::x_limit) {
        x_common = x_common.min(lim);
    }
    for ((label, spec), traj) in unique_labels(specs).into_iter().zip(specs).zip(trajs) {
        report.runs.push(record(label, spec, traj, oracle.as_ref(), x_common));
    }
    let first_err = report.runs[0].max_error;
    let entries = report
        .runs
        .iter()
        .map(|r| ComparisonEntry {
            label: r.label.clone(),
            max_error: r.max_error,
            max_x: r.trajectory.max_x(),
            steps: r.trajectory.forward_steps(),
            termination: r.trajectory.termination.clone(),
            ratio_to_first: match (r.max_error, first_err) {
                (Some(e), Some(f)) if f > 0.0 => Some(e / f),
                (Some(e), Some(f)) if e == f => Some(1.0),
                _ => None,
            },
        })
        .collect();
    report.comparison = oracle.as_ref().map(|o| ComparisonSummary {
        reference: o.id(),
        x_common,
        entries,
    });
    Ok(report)
}

/// Fold of the reference solution where one is known in closed form.
fn reference_fold(spec: &ProblemSpec, oracle: Option<&Oracle>) -> Option<f64> {
    match (&spec.ode, oracle) {
        (Ode::SecondOrder { .. }, Some(o)) => o.x_limit(),
        (
            Ode::ThirdOrder {
                rhs: InvariantRhs::PowerLaw { alpha },
            },
            _,
        ) => {
            let u = spec.initial_state().ok()?;
            ThirdOrderImplicit::fit_constants(*alpha, spec.ic.x0, u[0], u[1], u[2])
                .ok()?
                .fold_x()
        }
        _ => None,
    }
}

/// Integrates through a fold and classifies it: closest approach, the largest
/// slope seen, and agreement of the returning samples with the second branch.
///
/// Continuation through the fold is always requested; the run stops on the
/// way back at `spec.x_min`, or at `x0` when unset.
pub fn run_singularity(spec: &ProblemSpec) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(ExperimentKind::Singularity);
    let spec = ProblemSpec {
        continue_through_fold: true,
        x_min: Some(spec.x_min.unwrap_or(spec.ic.x0)),
        ..spec.clone()
    };
    let traj = spec.integrate()?;
    let oracle = oracle_or_note(&spec, &mut report)?;
    let estimate = traj.singularity_estimate();
    let reference_x = reference_fold(&spec, oracle.as_ref());
    let max_slope = traj
        .samples
        .windows(2)
        .filter(|w| w[1].x != w[0].x)
        .map(|w| ((w[1].y - w[0].y) / (w[1].x - w[0].x)).abs())
        .fold(0.0, f64::max);
    let mut post_fold_compared = 0;
    let mut post_fold_max_rel_error = None;
    if let (Some(fold), Some(o)) = (traj.fold, oracle.as_ref()) {
        for s in traj.post_fold() {
            if (fold.x - s.x).abs() < POST_FOLD_MIN_DISTANCE {
                continue;
            }
            if let Some(y) = o.eval(s.x, true) {
                let e = rel_diff(s.y, y, 0.0);
                post_fold_compared += 1;
                post_fold_max_rel_error = Some(post_fold_max_rel_error.map_or(e, |m: f64| m.max(e)));
            }
        }
    }
    if estimate.is_none() {
        report.notes.push(format!(
            "no singularity before x = {} ({:?})",
            traj.max_x(),
            traj.termination
        ));
    }
    report.singularity = Some(SingularitySummary {
        outcome: if estimate.is_some() {
            SingularityOutcome::Found
        } else {
            SingularityOutcome::NoSingularity
        },
        estimate,
        reference_x,
        relative_offset: estimate.zip(reference_x).map(|(e, r)| (e - r).abs() / r.abs()),
        max_slope,
        post_fold_compared,
        min_distance: POST_FOLD_MIN_DISTANCE,
        post_fold_max_rel_error,
    });
    report
        .runs
        .push(record(spec.scheme.name().to_string(), &spec, traj, oracle.as_ref(), f64::INFINITY));
    Ok(report)
}
