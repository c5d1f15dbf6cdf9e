//! One pipeline per task; each writes its artifacts and returns their paths.

use std::path::PathBuf;

use anyhow::Result;
use dsy_core::cascade::{cut, explosion_proxy, grow, GuardConfig};
use dsy_core::criteria::{scan_diagram, Verdict};
use dsy_core::estimators::{
    blowup_bound, derive_seed, estimate_majorant, estimate_mean_flow_2d, estimate_rho, geometry_checks, residual_rho,
    BlowupBound, GeometryReport, McEstimate, ResidualConfig, ResidualReport, RhoGrid,
};
use dsy_core::samplers::RngStream;
use dsy_core::solution::InitialData;
use dsy_core::{Params, WaveVector};
use serde::Serialize;

use crate::config::{OutputTarget, RunConfig, Task};
use crate::output::{curve_svg, num, opt, scatter_svg, write_csv, write_json, write_text};
use crate::validate;

/// Result of a completed task.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub summary: Vec<String>,
    /// Set when the artifacts were written but the run must still fail.
    pub failure: Option<ValidationFailed>,
}

/// Raised after the report is written when a validation suite fails.
#[derive(Debug)]
pub struct ValidationFailed {
    pub failed: Vec<String>,
}

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} check(s) failed: {}", self.failed.len(), self.failed.join(", "))
    }
}

impl std::error::Error for ValidationFailed {}

#[derive(Serialize)]
struct PointEstimate<'a> {
    t: f64,
    estimate: &'a McEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    heat_flow: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct PointReport<'a> {
    params: Params,
    xi: &'a [f64],
    n: usize,
    guard: GuardConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<&'a InitialData>,
    points: Vec<PointEstimate<'a>>,
}

#[derive(Serialize)]
struct GridReport<'a> {
    params: Params,
    n: usize,
    guard: GuardConfig,
    grid: &'a RhoGrid,
    residual: &'a ResidualReport,
}

#[derive(Serialize)]
struct BlowupReport<'a> {
    bound: &'a BlowupBound,
    geometry: &'a GeometryReport,
}

#[derive(Serialize)]
struct TreeSummary<'a> {
    params: Params,
    xi: &'a [f64],
    t: f64,
    guard: GuardConfig,
    nodes: usize,
    leaves: usize,
    internal: usize,
    depth: usize,
    guard_hit: bool,
    explosion_proxy: bool,
}

fn checked(p: &Params) -> Result<Params> {
    // configs loaded from disk skip the constructor
    Ok(Params::new(p.d, p.gamma)?)
}

pub fn execute(cfg: &RunConfig, out: &OutputTarget) -> Result<Outcome> {
    let mut o = Outcome::default();
    let seed = cfg.seed;
    match &cfg.task {
        Task::Diagram { ds, gamma_points, margin } => diagram(ds, *gamma_points, *margin, out, &mut o)?,
        Task::Rho { params, xi, times, n, guard } => {
            let p = checked(params)?;
            let w = WaveVector::new(xi)?;
            let ests = times
                .iter()
                .enumerate()
                .map(|(k, &t)| estimate_rho(&p, &w, t, *n, derive_seed(seed, k as u64), *guard))
                .collect::<dsy_core::Result<Vec<_>>>()?;
            scalar_points(p, xi, *n, *guard, None, times, &ests, out, &mut o)?;
        }
        Task::RhoGrid { params, radii, times, n, guard, residual_draws } => {
            let p = checked(params)?;
            let grid = RhoGrid::estimate(&p, radii, times, *n, seed, *guard)?;
            let task = (radii.len() * times.len()) as u64;
            let residual = residual_rho(&p, &grid, ResidualConfig { draws: *residual_draws, seed: derive_seed(seed, task) })?;
            let path = out.path("", "csv");
            let mut rows = Vec::new();
            for (i, &r) in radii.iter().enumerate() {
                for (j, &t) in times.iter().enumerate() {
                    rows.push(vec![num(r), num(t), num(grid.mean[i][j]), num(grid.stderr[i][j])]);
                }
            }
            write_csv(&path, &["radius", "t", "mean", "stderr"], &rows)?;
            o.written.push(path);
            let path = out.path("_residual", "csv");
            let rows: Vec<_> = residual
                .points
                .iter()
                .map(|q| vec![num(q.radius), num(q.t), num(q.lhs), num(q.rhs), num(q.residual), num(q.error)])
                .collect();
            write_csv(&path, &["radius", "t", "lhs", "rhs", "residual", "error"], &rows)?;
            o.written.push(path);
            let path = out.path("", "json");
            write_json(&path, &GridReport { params: p, n: *n, guard: *guard, grid: &grid, residual: &residual })?;
            o.written.push(path);
            o.summary.push(format!(
                "max residual {:e}, combined error {:e}, worst ratio {:.3}, {} of {} draws clamped",
                residual.max_residual, residual.combined_error, residual.worst_ratio, residual.clamped, residual.draws
            ));
        }
        Task::Meanflow { params, xi, times, n, guard, data, symmetrize } => {
            let p = checked(params)?;
            let w = WaveVector::new(xi)?;
            let ests = times
                .iter()
                .enumerate()
                .map(|(k, &t)| estimate_mean_flow_2d(&p, &w, t, data, *n, derive_seed(seed, k as u64), *guard, *symmetrize))
                .collect::<dsy_core::Result<Vec<_>>>()?;
            // the heat flow is the exact mean for radial vortex data
            let heat = |t: f64| -> Option<Vec<f64>> {
                data.check_vortex().ok()?;
                let a = data.vector_at(&w).ok()?;
                let decay = (-w.norm().powf(2.0 * p.gamma) * t).exp();
                Some(a.0.iter().flat_map(|c| [c.re * decay, c.im * decay]).collect())
            };
            let points: Vec<_> = times.iter().zip(&ests).map(|(&t, e)| PointEstimate { t, estimate: e, heat_flow: heat(t) }).collect();
            let labels = &ests[0].labels;
            let mut header = vec!["t".to_string()];
            for l in labels {
                header.push(l.clone());
                header.push(format!("{l}_stderr"));
            }
            header.push("guard_hit_fraction".into());
            let rows: Vec<_> = times
                .iter()
                .zip(&ests)
                .map(|(&t, e)| {
                    let mut row = vec![num(t)];
                    for (m, s) in e.mean.iter().zip(&e.stderr) {
                        row.push(num(*m));
                        row.push(num(*s));
                    }
                    row.push(num(e.guard_hit_fraction));
                    row
                })
                .collect();
            let path = out.path("", "csv");
            write_csv(&path, &header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)?;
            o.written.push(path);
            let path = out.path("", "json");
            write_json(&path, &PointReport { params: p, xi, n: *n, guard: *guard, data: Some(data), points })?;
            o.written.push(path);
            for (t, e) in times.iter().zip(&ests) {
                o.summary.push(format!("t = {t}: mean {:?} +- {:?}", e.mean, e.stderr));
            }
        }
        Task::Majorant { params, xi, times, n, guard, data } => {
            let p = checked(params)?;
            let w = WaveVector::new(xi)?;
            let ests = times
                .iter()
                .enumerate()
                .map(|(k, &t)| estimate_majorant(&p, &w, t, data, *n, derive_seed(seed, k as u64), *guard))
                .collect::<dsy_core::Result<Vec<_>>>()?;
            scalar_points(p, xi, *n, *guard, Some(data), times, &ests, out, &mut o)?;
        }
        Task::Blowup { gamma, m, points } => {
            let bound = blowup_bound(*m, *gamma)?;
            let geometry = geometry_checks(*gamma)?;
            let t_end = bound.tau.unwrap_or(4.0 / bound.beta);
            let curve: Vec<(f64, f64)> = (0..*points)
                .map(|i| {
                    let t = t_end * i as f64 / *points as f64;
                    (t, bound.p(t))
                })
                .collect();
            let path = out.path("", "json");
            write_json(&path, &BlowupReport { bound: &bound, geometry: &geometry })?;
            o.written.push(path);
            let path = out.path("", "csv");
            let rows: Vec<_> = curve.iter().map(|&(t, p)| vec![num(t), num(p)]).collect();
            write_csv(&path, &["t", "p"], &rows)?;
            o.written.push(path);
            let path = out.path("", "svg");
            let logs: Vec<_> = curve.iter().map(|&(t, p)| (t, p.log10())).collect();
            write_text(&path, &curve_svg("Riccati comparison p(t)", "t", "log10 p", &logs))?;
            o.written.push(path);
            o.summary.push(format!("beta = {}, T* = {:?}, tau = {:?}, flags {:?}", bound.beta, bound.t_star, bound.tau, bound.flags));
            o.summary.extend(geometry.notes.iter().cloned());
        }
        Task::Simulate { params, xi, t, guard, dump_tree } => {
            let p = checked(params)?;
            let w = WaveVector::new(xi)?;
            let tree = grow(&mut RngStream::new(derive_seed(seed, 0), 0), &p, &w, *t, *guard)?;
            let c = cut(&tree);
            let summary = TreeSummary {
                params: p,
                xi,
                t: *t,
                guard: *guard,
                nodes: tree.len(),
                leaves: c.leaves.len(),
                internal: c.internal.len(),
                depth: tree.depth(),
                guard_hit: tree.guard_hit,
                explosion_proxy: explosion_proxy(&tree),
            };
            let path = out.path("", "json");
            write_json(&path, &summary)?;
            o.written.push(path);
            if *dump_tree {
                let path = out.path("_tree", "json");
                write_json(&path, &tree)?;
                o.written.push(path);
            }
            o.summary.push(format!("{} nodes, {} leaves, guard hit: {}", summary.nodes, summary.leaves, summary.guard_hit));
        }
        Task::Validate { suite } => {
            let report = validate::run(*suite, seed);
            let path = out.path("", "json");
            write_json(&path, &report)?;
            o.written.push(path);
            for c in &report.checks {
                o.summary.push(format!("{} {}::{} ({})", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail));
            }
            let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| format!("{}::{}", c.suite, c.name)).collect();
            if !failed.is_empty() {
                o.failure = Some(ValidationFailed { failed });
            }
        }
    }
    Ok(o)
}

fn diagram(ds: &[usize], gamma_points: usize, margin: f64, out: &OutputTarget, o: &mut Outcome) -> Result<()> {
    let rows = scan_diagram(ds, gamma_points, margin)?;
    let table: Vec<_> = rows
        .iter()
        .map(|r| {
            let c = &r.classification;
            vec![
                r.d.to_string(),
                num(r.gamma),
                c.verdict.as_str().to_string(),
                num(c.e_rmax),
                num(c.e_rmax_err),
                opt(c.e_rbstar),
                opt(c.e_rbstar_err),
            ]
        })
        .collect();
    let path = out.path("", "csv");
    write_csv(&path, &["d", "gamma", "verdict", "e_rmax", "e_rmax_err", "e_rbstar", "e_rbstar_err"], &table)?;
    o.written.push(path);
    let points: Vec<_> = rows
        .iter()
        .map(|r| {
            let colour = match r.classification.verdict {
                Verdict::Explosive => "red",
                Verdict::NonExplosive => "black",
                Verdict::Undetermined => "gray",
            };
            (r.gamma, r.d as f64, colour)
        })
        .collect();
    let path = out.path("", "svg");
    write_text(&path, &scatter_svg("explosion diagram", "gamma", "d", &points))?;
    o.written.push(path);
    for v in [Verdict::Explosive, Verdict::NonExplosive, Verdict::Undetermined] {
        let k = rows.iter().filter(|r| r.classification.verdict == v).count();
        o.summary.push(format!("{}: {k} of {}", v.as_str(), rows.len()));
    }
    Ok(())
}

/// JSON and CSV for single-component estimates along a time list.
#[allow(clippy::too_many_arguments)]
fn scalar_points(
    p: Params,
    xi: &[f64],
    n: usize,
    guard: GuardConfig,
    data: Option<&InitialData>,
    times: &[f64],
    ests: &[McEstimate],
    out: &OutputTarget,
    o: &mut Outcome,
) -> Result<()> {
    let rate = WaveVector::new(xi)?.norm().powf(2.0 * p.gamma);
    let rows: Vec<_> = times
        .iter()
        .zip(ests)
        .map(|(&t, e)| {
            vec![
                num(t),
                num(e.mean[0]),
                num(e.stderr[0]),
                num((rate * t).exp() * e.mean[0]),
                num(e.guard_hit_fraction),
                opt(e.tail_mass),
                opt(e.max_sample),
                e.flags.join(";"),
            ]
        })
        .collect();
    let path = out.path("", "csv");
    write_csv(
        &path,
        &["t", "mean", "stderr", "rescaled_mean", "guard_hit_fraction", "tail_mass", "max_sample", "flags"],
        &rows,
    )?;
    o.written.push(path);
    let points = times.iter().zip(ests).map(|(&t, e)| PointEstimate { t, estimate: e, heat_flow: None }).collect();
    let path = out.path("", "json");
    write_json(&path, &PointReport { params: p, xi, n, guard, data, points })?;
    o.written.push(path);
    for (t, e) in times.iter().zip(ests) {
        o.summary.push(format!("t = {t}: mean {} +- {} (guard hits {})", e.mean[0], e.stderr[0], e.guard_hits));
    }
    Ok(())
}
