// SPDX-License-Identifier: Apache-2.0

//! Single runs, the two published parameter scans and the convergence study.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Mode, RunConfig};
use super::csv::{Cell, Table};
use crate::dynamics::{convergence_study, run_gate_ideal, run_gate_lossy, EvolutionConfig, GateOutcome};
use crate::error::{Error, Result};
use crate::model::{matched_mu, SystemParams};

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub mode: Mode,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub rows: usize,
    /// Rows whose status is not `ok`.
    pub flagged_rows: usize,
    pub summary: Value,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub table: Table,
    /// Fidelity surface, one row per `Δ₁` and one column per `δ` (fidelity-map sweep only).
    pub matrix: Option<Table>,
    pub metadata: Metadata,
}

impl SweepResult {
    fn new(cfg: &RunConfig, table: Table, matrix: Option<Table>, summary: Value, start: Instant) -> Self {
        let flagged_rows = match table.column("status") {
            Some(j) => table.rows.iter().filter(|r| r[j] != Cell::from("ok")).count(),
            None => 0,
        };
        let metadata = Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            mode: cfg.mode,
            config: cfg.clone(),
            wall_time_s: start.elapsed().as_secs_f64(),
            rows: table.rows.len(),
            flagged_rows,
            summary,
        };
        Self { table, matrix, metadata }
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.metadata).expect("metadata serializes")
    }
}

/// Maps `f` over `items` on a pool of `jobs` threads, keeping input order.
fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

fn outcome_cells(o: &GateOutcome) -> Vec<Cell> {
    vec![o.gate_time.into(), o.fidelity.into(), o.max_photons.into(), o.drift.into(), o.steps.into()]
}

fn failure_cells(e: &Error) -> Vec<Cell> {
    let status = if e.is_numerical() { "failed" } else { "invalid" };
    let mut cells = vec![Cell::Num(f64::NAN); 4];
    cells.push(Cell::Int(0));
    cells.push(status.into());
    cells.push(e.to_string().into());
    cells
}

fn run_one(params: &SystemParams, cfg: &RunConfig) -> Result<GateOutcome> {
    params.validate()?;
    let psi = cfg.input_state(&params.space()?)?;
    if params.is_lossless() {
        run_gate_ideal(params, &psi, &EvolutionConfig::for_state(params))
    } else {
        run_gate_lossy(params, &psi, &EvolutionConfig::for_density(params))
    }
}

const OUTCOME_COLUMNS: [&str; 7] = ["gate_time", "fidelity", "max_photons", "drift", "steps", "status", "note"];

fn columns(leading: &[&str]) -> Table {
    let cols: Vec<&str> = leading.iter().copied().chain(OUTCOME_COLUMNS).collect();
    Table::new(&cols)
}

/// One gate at the configured parameters: Schrödinger when every rate is
/// zero, master equation otherwise.
pub fn run_single(cfg: &RunConfig) -> Result<SweepResult> {
    let start = Instant::now();
    cfg.validate()?;
    let params = cfg.params()?;
    let outcome = run_one(&params, cfg)?;
    let engine = if params.is_lossless() { "schrodinger" } else { "lindblad" };
    let mut table = columns(&["engine", "delta1", "delta_cap", "mu"]);
    let mut row: Vec<Cell> = vec![engine.into(), params.delta1.into(), params.delta_cap.into(), params.mu.into()];
    row.extend(outcome_cells(&outcome));
    row.extend(["ok".into(), "".into()]);
    table.push(row);
    let summary = json!({ "fidelity": outcome.fidelity, "matching_residual": params.derive()?.matching_residual });
    Ok(SweepResult::new(cfg, table, None, summary, start))
}

/// Lossless fidelity over the `(Δ₁, δ)` grid with `Δ = Δ₁ - δ` and the
/// matched target coupling. Configured `mu` and rates are ignored. Points
/// without a valid parameter record become `invalid` rows.
pub fn run_fig2_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    let start = Instant::now();
    cfg.validate()?;
    let points: Vec<(f64, f64)> = cfg
        .delta1_grid
        .iter()
        .flat_map(|&d1| cfg.delta_small_grid.iter().map(move |&ds| (d1, ds)))
        .collect();
    let rows = par_map(cfg.jobs, &points, |&(d1, ds)| {
        let dc = d1 - ds;
        let mu = if ds == 0.0 { Err(Error::DegenerateDetunings) } else { matched_mu(d1, dc, cfg.mu1) };
        let mut row: Vec<Cell> = vec![d1.into(), ds.into(), dc.into(), mu.clone().unwrap_or(f64::NAN).into()];
        let result = mu.and_then(|mu| {
            let params = SystemParams::lossless(cfg.n_qutrits, cfg.mu1, mu, d1, dc);
            run_one(&params.with_cutoff(cfg.fock_cutoff), cfg)
        });
        match result {
            Ok(o) => {
                row.extend(outcome_cells(&o));
                row.extend(["ok".into(), "".into()]);
            }
            Err(e) => row.extend(failure_cells(&e)),
        }
        row
    })?;
    let mut table = columns(&["delta1", "delta_small", "delta_cap", "mu"]);
    rows.into_iter().for_each(|r| table.push(r));

    let fid = table.column("fidelity").expect("fidelity column");
    let mut header = vec!["delta1".to_string()];
    header.extend(cfg.delta_small_grid.iter().map(|ds| format!("delta_small={}", super::csv::format_sig(*ds, 9))));
    let mut matrix = Table { columns: header, rows: Vec::new() };
    for (i, &d1) in cfg.delta1_grid.iter().enumerate() {
        let w = cfg.delta_small_grid.len();
        let mut row = vec![Cell::Num(d1)];
        row.extend(table.rows[i * w..(i + 1) * w].iter().map(|r| r[fid].clone()));
        matrix.rows.push(row);
    }

    let best = table
        .values("fidelity")
        .iter()
        .zip(&points)
        .filter_map(|(f, p)| f.filter(|x| x.is_finite()).map(|f| (f, *p)))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let summary = match best {
        Some((f, (d1, ds))) => json!({ "best_fidelity": f, "best_delta1": d1, "best_delta_small": ds }),
        None => Value::Null,
    };
    Ok(SweepResult::new(cfg, table, Some(matrix), summary, start))
}

/// Master-equation fidelity along the uniform-`γ` curve: every relaxation
/// and dephasing rate equals `γ` except `f -> g`, which is `fg_ratio * γ`.
pub fn run_fig3_curve(cfg: &RunConfig) -> Result<SweepResult> {
    let start = Instant::now();
    cfg.validate()?;
    let base = cfg.params()?;
    let rows = par_map(cfg.jobs, &cfg.gamma_grid, |&gamma| {
        let params = base.with_uniform_noise(cfg.kappa, gamma, cfg.fg_ratio);
        let mut row: Vec<Cell> = vec![gamma.into(), cfg.kappa.into(), params.mu.into()];
        let result = params
            .validate()
            .and_then(|_| {
                let psi = cfg.input_state(&params.space()?)?;
                run_gate_lossy(&params, &psi, &EvolutionConfig::for_density(&params))
            });
        match result {
            Ok(o) => {
                row.extend(outcome_cells(&o));
                row.extend(["ok".into(), "".into()]);
            }
            Err(e) => row.extend(failure_cells(&e)),
        }
        row
    })?;
    let mut table = columns(&["gamma", "kappa", "mu"]);
    rows.into_iter().for_each(|r| table.push(r));
    let fids: Vec<f64> = table.values("fidelity").into_iter().flatten().collect();
    let monotone = fids.windows(2).all(|w| w[1] <= w[0]);
    let summary = json!({ "non_increasing": monotone });
    Ok(SweepResult::new(cfg, table, None, summary, start))
}

/// Fock-cutoff and tolerance refinement at the configured parameters.
pub fn run_convergence(cfg: &RunConfig) -> Result<SweepResult> {
    let start = Instant::now();
    cfg.validate()?;
    let params = cfg.params()?;
    let psi = cfg.input_state(&params.space()?)?;
    let report = convergence_study(&params, &psi)?;
    let mut table = Table::new(&["fock_cutoff", "rtol", "fidelity"]);
    for r in &report.rows {
        table.push(vec![r.fock_cutoff.into(), r.rtol.into(), r.fidelity.into()]);
    }
    let summary = json!({
        "converged": report.converged.map(|(c, rtol)| json!({ "fock_cutoff": c, "rtol": rtol })),
        "tolerance_sensitivity": report.tolerance_sensitivity,
    });
    Ok(SweepResult::new(cfg, table, None, summary, start))
}

/// Dispatches on `cfg.mode`; `validate` is not a sweep and is rejected.
pub fn run(cfg: &RunConfig) -> Result<SweepResult> {
    match cfg.mode {
        Mode::Single => run_single(cfg),
        Mode::Fig2Sweep => run_fig2_sweep(cfg),
        Mode::Fig3Curve => run_fig3_curve(cfg),
        Mode::Converge => run_convergence(cfg),
        Mode::Validate => Err(Error::Config("validate mode produces a report, not a table".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_fig2() -> RunConfig {
        RunConfig {
            mode: Mode::Fig2Sweep,
            fock_cutoff: 1,
            delta1_grid: vec![10.7, 8.0],
            delta_small_grid: vec![2.3, 0.0, 8.0, 10.7],
            ..RunConfig::default()
        }
    }

    #[test]
    fn fig2_rows_follow_grid_order() {
        let r = run_fig2_sweep(&small_fig2()).unwrap();
        let d1: Vec<f64> = r.table.values("delta1").into_iter().flatten().collect();
        let ds: Vec<f64> = r.table.values("delta_small").into_iter().flatten().collect();
        assert_eq!(d1, vec![10.7, 10.7, 10.7, 10.7, 8.0, 8.0, 8.0, 8.0]);
        assert_eq!(ds, vec![2.3, 0.0, 8.0, 10.7, 2.3, 0.0, 8.0, 10.7]);
        let status = r.table.column("status").unwrap();
        let flags: Vec<&Cell> = r.table.rows.iter().map(|row| &row[status]).collect();
        // δ = 0 is degenerate, δ >= Δ₁ leaves Δ <= 0
        let ok = Cell::from("ok");
        let invalid = Cell::from("invalid");
        let expected = [&ok, &invalid, &ok, &invalid, &ok, &invalid, &invalid, &invalid];
        assert_eq!(flags, expected);
        assert_eq!(r.metadata.flagged_rows, 5);
        let m = r.matrix.unwrap();
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.columns.len(), 5);
    }

    #[test]
    fn fig2_parallel_output_is_identical() {
        let mut cfg = small_fig2();
        let serial = run_fig2_sweep(&cfg).unwrap();
        cfg.jobs = 4;
        let parallel = run_fig2_sweep(&cfg).unwrap();
        assert_eq!(serial.table.to_csv(), parallel.table.to_csv());
        assert_eq!(serial.matrix.unwrap().to_csv(), parallel.matrix.unwrap().to_csv());
    }

    #[test]
    fn fig3_zero_rate_point_matches_single() {
        let cfg = RunConfig {
            mode: Mode::Fig3Curve,
            fock_cutoff: 1,
            kappa: 0.0,
            gamma_grid: vec![0.0],
            ..RunConfig::default()
        };
        let curve = run_fig3_curve(&cfg).unwrap();
        let single = run_single(&RunConfig { mode: Mode::Single, fock_cutoff: 1, ..RunConfig::default() }).unwrap();
        let a = curve.table.values("fidelity")[0].unwrap();
        let b = single.table.values("fidelity")[0].unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}
