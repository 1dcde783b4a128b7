//! Experiment orchestration and report files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coordinator::{self, IterationRecord, Mode, ProsumerCost, RunConfig};
use crate::error::{CoreError, Result};
use crate::model::ScheduleDecision;
use crate::network::NetworkState;
use crate::oracle::solve_centralized;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    Sync,
    Async,
    Oracle,
    OracleNotrade,
}

impl ExperimentMode {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentMode::Sync => "sync",
            ExperimentMode::Async => "async",
            ExperimentMode::Oracle => "oracle",
            ExperimentMode::OracleNotrade => "oracle-notrade",
        }
    }
}

impl fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sync" => Ok(ExperimentMode::Sync),
            "async" => Ok(ExperimentMode::Async),
            "oracle" => Ok(ExperimentMode::Oracle),
            "oracle-notrade" => Ok(ExperimentMode::OracleNotrade),
            other => Err(format!(
                "unknown mode `{other}` (expected sync, async, oracle or oracle-notrade)"
            )),
        }
    }
}

/// Outcome of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOutcome {
    pub mode: ExperimentMode,
    pub decisions: Vec<ScheduleDecision>,
    pub costs: Vec<ProsumerCost>,
    pub objective: f64,
    pub network: NetworkState,
    /// ADMM modes only.
    pub trace: Vec<IterationRecord>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn run_mode(
    scenario: &Scenario,
    mode: ExperimentMode,
    config: &RunConfig,
) -> Result<ModeOutcome> {
    match mode {
        ExperimentMode::Oracle | ExperimentMode::OracleNotrade => {
            let sol = solve_centralized(scenario, mode == ExperimentMode::Oracle)?;
            Ok(ModeOutcome {
                mode,
                decisions: sol.decisions,
                costs: sol.costs,
                objective: sol.objective,
                network: sol.network,
                trace: Vec::new(),
                iterations: sol.iterations,
                converged: true,
            })
        }
        ExperimentMode::Sync | ExperimentMode::Async => {
            let mut cfg = *config;
            if mode == ExperimentMode::Sync {
                cfg.mode = Mode::Sync;
            } else {
                cfg.mode = Mode::Async;
            }
            let r = coordinator::run(scenario, cfg)?;
            Ok(ModeOutcome {
                mode,
                decisions: r.decisions,
                costs: r.costs,
                objective: r.objective,
                network: r.network,
                trace: r.trace,
                iterations: r.iterations,
                converged: r.converged,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsumerComparison {
    pub id: usize,
    pub cost_without: f64,
    pub cost_with: f64,
    pub reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostComparison {
    pub mode: ExperimentMode,
    pub prosumers: Vec<ProsumerComparison>,
    pub total_without: f64,
    pub total_with: f64,
    pub total_reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub baseline: ExperimentMode,
    pub comparisons: Vec<CostComparison>,
}

/// `100·(without - with)/|without|`, zero when the baseline is zero.
pub fn reduction_pct(without: f64, with: f64) -> f64 {
    if without == 0.0 {
        0.0
    } else {
        100.0 * (without - with) / without.abs()
    }
}

pub fn compare_costs(baseline: &[ProsumerCost], outcome: &ModeOutcome) -> CostComparison {
    let prosumers: Vec<ProsumerComparison> = baseline
        .iter()
        .zip(&outcome.costs)
        .map(|(b, w)| ProsumerComparison {
            id: b.id,
            cost_without: b.total,
            cost_with: w.total,
            reduction_pct: reduction_pct(b.total, w.total),
        })
        .collect();
    let total_without: f64 = baseline.iter().map(|c| c.total).sum();
    let total_with: f64 = outcome.costs.iter().map(|c| c.total).sum();
    CostComparison {
        mode: outcome.mode,
        prosumers,
        total_without,
        total_with,
        total_reduction_pct: reduction_pct(total_without, total_with),
    }
}

pub const TRACE_COLUMNS: [&str; 5] = ["iter", "active", "primal_res", "dual_res", "objective"];
pub const SCHEDULE_COLUMNS: [&str; 9] = [
    "slot", "p_G", "p_S", "p_feedin", "p_ch", "p_dis", "p_hvac", "p_trade", "T_in",
];

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CoreError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CoreError + '_ {
    move |e| CoreError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn write_trace(path: &Path, trace: &[IterationRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TRACE_COLUMNS).map_err(csv_err(path))?;
    for r in trace {
        w.write_record([
            r.k.to_string(),
            r.active.to_string(),
            r.primal.to_string(),
            r.dual.to_string(),
            r.objective.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_schedule(path: &Path, d: &ScheduleDecision) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SCHEDULE_COLUMNS).map_err(csv_err(path))?;
    for t in 0..d.horizon() {
        let row = [
            d.grid[t],
            d.solar[t],
            d.feedin[t],
            d.charge[t],
            d.discharge[t],
            d.hvac[t],
            d.trade[t],
            d.indoor_temp[t],
        ];
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush()?;
    Ok(())
}

/// One row per slot and node: `slot,node,p_inj,q_inj,voltage`.
pub fn write_network_state(path: &Path, s: &NetworkState) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["slot", "node", "p_inj", "q_inj", "voltage"])
        .map_err(csv_err(path))?;
    for t in 0..s.p_injection.len() {
        for j in 0..s.p_injection[t].len() {
            w.write_record([
                t.to_string(),
                j.to_string(),
                s.p_injection[t][j].to_string(),
                s.q_injection[t][j].to_string(),
                s.voltage[t][j].to_string(),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn summary_line(o: &ModeOutcome) -> String {
    match o.mode {
        ExperimentMode::Sync | ExperimentMode::Async => {
            let status = if o.converged {
                "converged"
            } else {
                "not converged"
            };
            format!(
                "{}: {status} after {} iterations, objective {:.6}",
                o.mode, o.iterations, o.objective
            )
        }
        _ => format!("{}: objective {:.6}", o.mode, o.objective),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub outcomes: Vec<ModeOutcome>,
    pub costs: CostReport,
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Runs every requested mode and writes schedules, the cost report (against
/// the no-trading oracle baseline), a summary and, with `traces`, the
/// per-iteration convergence traces into `out_dir`.
pub fn run_experiment(
    scenario: &Scenario,
    modes: &[ExperimentMode],
    config: &RunConfig,
    out_dir: &Path,
    traces: bool,
) -> Result<ExperimentReport> {
    fs::create_dir_all(out_dir)?;
    let mut outcomes = Vec::with_capacity(modes.len());
    for &mode in modes {
        let o = run_mode(scenario, mode, config).map_err(|e| match e {
            CoreError::Scenario(m) => CoreError::Scenario(format!("mode {mode}: {m}")),
            other => other,
        })?;
        outcomes.push(o);
    }
    let baseline = match outcomes
        .iter()
        .find(|o| o.mode == ExperimentMode::OracleNotrade)
    {
        Some(o) => o.costs.clone(),
        None => solve_centralized(scenario, false)?.costs,
    };

    let mut files = Vec::new();
    let mut summary = Vec::new();
    for o in &outcomes {
        if traces && !o.trace.is_empty() {
            let path = out_dir.join(format!("trace_{}.csv", o.mode));
            write_trace(&path, &o.trace)?;
            files.push(path);
        }
        for (i, d) in o.decisions.iter().enumerate() {
            let path = out_dir.join(format!("schedule_{}_p{i:02}.csv", o.mode));
            write_schedule(&path, d)?;
            files.push(path);
        }
        let path = out_dir.join(format!("network_{}.csv", o.mode));
        write_network_state(&path, &o.network)?;
        files.push(path);
        summary.push(summary_line(o));
    }
    let costs = CostReport {
        baseline: ExperimentMode::OracleNotrade,
        comparisons: outcomes
            .iter()
            .filter(|o| o.mode != ExperimentMode::OracleNotrade)
            .map(|o| compare_costs(&baseline, o))
            .collect(),
    };
    let report_path = out_dir.join("cost_report.json");
    fs::write(
        &report_path,
        serde_json::to_string_pretty(&costs).expect("report serializes"),
    )?;
    files.push(report_path);
    let summary_path = out_dir.join("summary.txt");
    fs::write(&summary_path, summary.join("\n") + "\n")?;
    files.push(summary_path);
    Ok(ExperimentReport {
        outcomes,
        costs,
        summary,
        files,
    })
}
