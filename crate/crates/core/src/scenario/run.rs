//! End-to-end scenario runs: phases, oracle verification, revenues, auction
//! and the figure tables.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::config::{Output, ScenarioConfig};
use super::svg::LineChart;
use super::table::{num, Table};
use crate::asym::{solve_asymmetric, AsymSolution, SolverOptions};
use crate::auction::{run_auction, AuctionInputs, AuctionOutcome};
use crate::equilibrium::PhaseTrajectory;
use crate::error::{Error, Result};
use crate::model::{MarketParams, Operator, Phase};
use crate::oracle::{compare_with_oracle, residual_report, OracleComparison, ResidualReport};
use crate::revenue::{aggregate_revenues, RevenueReport};
use crate::sym::{solve_symmetric, SymSolution};

/// Both phases of one deployment time, operator 1 holding A.
#[derive(Debug, Clone)]
pub struct ScenarioPhases {
    pub horizon: f64,
    pub asym: AsymSolution,
    pub asym_traj: PhaseTrajectory,
    pub sym: SymSolution,
    pub sym_traj: PhaseTrajectory,
}

pub fn solve_phases(
    params: &MarketParams,
    x1_0: f64,
    horizon: f64,
    tail: f64,
    opts: &SolverOptions,
) -> Result<ScenarioPhases> {
    let (asym, asym_traj) = solve_asymmetric(params, Operator::One, x1_0, horizon, opts)?;
    let (sym, sym_traj) = solve_symmetric(params, Operator::One, asym.x1_terminal(), horizon, tail, opts)?;
    Ok(ScenarioPhases {
        horizon,
        asym,
        asym_traj,
        sym,
        sym_traj,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCheck {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub phase: Phase,
    pub comparison: OracleComparison,
    pub residuals: ResidualReport,
    pub oracle_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub checks: Vec<PhaseCheck>,
    pub pass: bool,
}

impl Verification {
    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "T={} {:?}: coefficient {:.3e} trajectory {:.3e} foc {:.3e} adjoint {:.3e} boundary {:.3e} ode {:.3e} -> {}\n",
                c.horizon,
                c.phase,
                c.comparison.coefficient_error(),
                c.comparison.trajectory_error(),
                c.residuals.foc,
                c.residuals.adjoint,
                c.residuals.boundary,
                c.residuals.ode,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!("oracle: {}\n", self.status()));
        out
    }
}

fn check(
    cfg: &ScenarioConfig,
    horizon: f64,
    phase: Phase,
    comparison: OracleComparison,
    residuals: ResidualReport,
) -> PhaseCheck {
    let t = &cfg.tolerances;
    let oracle_pass = comparison.passes(t.oracle_coefficient, t.oracle_trajectory);
    PhaseCheck {
        horizon,
        phase,
        comparison,
        residuals,
        oracle_pass,
        pass: oracle_pass && residuals.pass,
    }
}

/// Oracle comparison and residual report of every phase of every `T`.
pub fn verify(cfg: &ScenarioConfig) -> Result<Verification> {
    cfg.validate()?;
    let opts = cfg.solver_options();
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    for &horizon in &cfg.t_values {
        let ph = solve_phases(&cfg.params, cfg.x1_0, horizon, cfg.sym_tail, &opts)?;
        if horizon > 0.0 {
            let cmp = compare_with_oracle(&ph.asym, tol.oracle_dt, 0.0)?;
            let res = residual_report(&ph.asym_traj, &ph.asym, &tol.residual);
            checks.push(check(cfg, horizon, Phase::Asymmetric, cmp, res));
        }
        let cmp = compare_with_oracle(&ph.sym, tol.oracle_dt, cfg.sym_tail)?;
        let res = residual_report(&ph.sym_traj, &ph.sym, &tol.residual);
        checks.push(check(cfg, horizon, Phase::Symmetric, cmp, res));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(Verification { checks, pass })
}

/// Named file contents, ordered by name.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactBundle {
    pub files: BTreeMap<String, String>,
    pub verification: Verification,
}

impl ArtifactBundle {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let io = |e: std::io::Error| Error::Output(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut written = Vec::new();
        for (name, body) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::Output(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub allow_unverified: bool,
    pub svg: bool,
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Asymmetric => "asymmetric",
        Phase::Symmetric => "symmetric",
    }
}

fn table(cfg: &ScenarioConfig, v: &Verification, schema: &'static str, header: Vec<&'static str>) -> Table {
    Table::new(schema, header)
        .meta("config_hash", cfg.hash())
        .meta("oracle", v.status())
        .meta("quad_mode", cfg.quad_mode.name())
}

/// Gains, bids and profits of one `(params, x1_0, T, gamma)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    pub revenues: RevenueReport,
    pub gain: f64,
    pub auction: AuctionOutcome,
}

/// Auction inputs from a revenue report: `R_i^A` when `i` holds A and
/// `R_i^B` when it does not.
pub fn auction_inputs(cfg: &ScenarioConfig, rev: &RevenueReport, gamma: f64) -> Result<AuctionInputs> {
    AuctionInputs::new(
        rev.aggregate(Operator::One, true),
        rev.aggregate(Operator::Two, true),
        rev.aggregate(Operator::One, false),
        rev.aggregate(Operator::Two, false),
        cfg.c_a,
        cfg.c_b,
        cfg.c_bs,
        gamma,
    )
}

pub fn evaluate_cell(
    cfg: &ScenarioConfig,
    params: &MarketParams,
    x1_0: f64,
    horizon: f64,
    gamma: f64,
) -> Result<CellResult> {
    let revenues = aggregate_revenues(params, x1_0, horizon, &cfg.solver_options())?;
    let gain = revenues.gain_for(Operator::One)?;
    let auction = run_auction(&auction_inputs(cfg, &revenues, gamma)?);
    Ok(CellResult {
        revenues,
        gain,
        auction,
    })
}

/// Revenue reports keyed by `(eta, x1_0, T)` bit patterns.
struct RevenueCache<'a> {
    cfg: &'a ScenarioConfig,
    map: BTreeMap<(u64, u64, u64), RevenueReport>,
}

impl<'a> RevenueCache<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        RevenueCache {
            cfg,
            map: BTreeMap::new(),
        }
    }

    fn get(&mut self, eta: f64, x1_0: f64, horizon: f64) -> Result<RevenueReport> {
        let key = (eta.to_bits(), x1_0.to_bits(), horizon.to_bits());
        if let Some(r) = self.map.get(&key) {
            return Ok(*r);
        }
        let params = self.cfg.params.with_eta(eta)?;
        let r = aggregate_revenues(&params, x1_0, horizon, &self.cfg.solver_options())?;
        self.map.insert(key, r);
        Ok(r)
    }
}

fn trajectory_rows(ph: &ScenarioPhases) -> impl Iterator<Item = (&PhaseTrajectory, usize)> {
    [&ph.asym_traj, &ph.sym_traj]
        .into_iter()
        .flat_map(|tr| (0..tr.len()).map(move |i| (tr, i)))
}

#[derive(Serialize)]
struct RevenueRow {
    #[serde(rename = "T")]
    horizon: f64,
    r1_a: f64,
    r2_a: f64,
    r1_b: f64,
    r2_b: f64,
    gain: f64,
    quadrature_error: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    config_hash: String,
    quad_mode: &'static str,
    oracle: &'static str,
    allow_unverified: bool,
    validity_issues: usize,
    revenues: Vec<RevenueRow>,
    checks: &'a [PhaseCheck],
}

/// Runs the scenario and renders every requested output. An oracle FAIL
/// aborts with [`Error::OracleFailed`] unless `allow_unverified` is set.
pub fn run_scenario(cfg: &ScenarioConfig, run: RunOptions) -> Result<ArtifactBundle> {
    cfg.validate()?;
    let verification = verify(cfg)?;
    if !verification.pass && !run.allow_unverified {
        return Err(Error::OracleFailed(verification.summary()));
    }
    let opts = cfg.solver_options();
    let mut files = BTreeMap::new();
    let mut revenues = RevenueCache::new(cfg);
    let wants = |o: Output| cfg.outputs.contains(&o);

    let needs_phases = wants(Output::Fig3) || wants(Output::Trajectories) || wants(Output::Report);
    let mut issues = 0;
    if needs_phases {
        for &horizon in &cfg.t_values {
            let ph = solve_phases(&cfg.params, cfg.x1_0, horizon, cfg.sym_tail, &opts)?;
            issues += ph.asym_traj.issues.len() + ph.sym_traj.issues.len();
            if wants(Output::Fig3) {
                let mut t = table(cfg, &verification, "fig3", vec!["t", "p1", "p2", "x1", "x2", "phase"])
                    .meta("T", num(horizon));
                for (tr, i) in trajectory_rows(&ph) {
                    t.push(vec![
                        num(tr.times[i]),
                        num(tr.p1[i]),
                        num(tr.p2[i]),
                        num(tr.x1[i]),
                        num(1.0 - tr.x1[i]),
                        phase_name(tr.phase.phase).into(),
                    ]);
                }
                files.insert(format!("fig3_T{horizon}.csv"), t.render()?);
                if run.svg {
                    files.insert(format!("fig3_T{horizon}.svg"), fig3_chart(&t, horizon).render());
                }
            }
            if wants(Output::Trajectories) {
                let mut t = table(
                    cfg,
                    &verification,
                    "trajectories",
                    vec!["t", "phase", "p1", "p2", "x1", "x2", "lambda1", "lambda2", "valid"],
                )
                .meta("T", num(horizon));
                for (tr, i) in trajectory_rows(&ph) {
                    t.push(vec![
                        num(tr.times[i]),
                        phase_name(tr.phase.phase).into(),
                        num(tr.p1[i]),
                        num(tr.p2[i]),
                        num(tr.x1[i]),
                        num(1.0 - tr.x1[i]),
                        num(tr.lambda1[i]),
                        num(tr.lambda2[i]),
                        tr.validity_flags[i].to_string(),
                    ]);
                }
                files.insert(format!("trajectories_T{horizon}.csv"), t.render()?);
            }
        }
    }

    if wants(Output::Fig4) {
        let mut t = table(cfg, &verification, "fig4", vec!["T", "eta", "x1_0", "gain"]);
        for &horizon in &cfg.t_values {
            for eta in cfg.etas() {
                for x0 in cfg.x1_0s() {
                    let r = revenues.get(eta, x0, horizon)?;
                    t.push(vec![num(horizon), num(eta), num(x0), num(r.gain_for(Operator::One)?)]);
                }
            }
        }
        if run.svg {
            files.insert("fig4.svg".into(), fig4_chart(&t).render());
        }
        files.insert("fig4.csv".into(), t.render()?);
    }

    if wants(Output::Fig5) || wants(Output::Fig6) {
        let mut t5 = table(cfg, &verification, "fig5", vec!["gamma", "T", "b1", "b2"]);
        let mut t6 = table(cfg, &verification, "fig6", vec!["gamma", "T", "profit1", "profit2", "winner"]);
        for gamma in cfg.gammas() {
            for &horizon in &cfg.t_values {
                let r = revenues.get(cfg.params.eta(), cfg.x1_0, horizon)?;
                let out = run_auction(&auction_inputs(cfg, &r, gamma)?);
                t5.push(vec![num(gamma), num(horizon), num(out.b1_star), num(out.b2_star)]);
                t6.push(vec![
                    num(gamma),
                    num(horizon),
                    num(out.realized_profit_1),
                    num(out.realized_profit_2),
                    out.winner.number().to_string(),
                ]);
            }
        }
        if wants(Output::Fig5) {
            if run.svg {
                files.insert("fig5.svg".into(), by_gamma_chart(&t5, "Equilibrium bids", &[("b1", "b1"), ("b2", "b2")]).render());
            }
            files.insert("fig5.csv".into(), t5.render()?);
        }
        if wants(Output::Fig6) {
            if run.svg {
                files.insert(
                    "fig6.svg".into(),
                    by_gamma_chart(&t6, "Realized profits", &[("profit1", "operator 1"), ("profit2", "operator 2")]).render(),
                );
            }
            files.insert("fig6.csv".into(), t6.render()?);
        }
    }

    if wants(Output::Report) {
        let mut rows = Vec::new();
        for &horizon in &cfg.t_values {
            let r = revenues.get(cfg.params.eta(), cfg.x1_0, horizon)?;
            rows.push(RevenueRow {
                horizon,
                r1_a: r.aggregate(Operator::One, true),
                r2_a: r.aggregate(Operator::Two, true),
                r1_b: r.aggregate(Operator::One, false),
                r2_b: r.aggregate(Operator::Two, false),
                gain: r.gain_for(Operator::One)?,
                quadrature_error: r.quadrature_error,
            });
        }
        let report = Report {
            schema: "report v1",
            config_hash: cfg.hash(),
            quad_mode: cfg.quad_mode.name(),
            oracle: verification.status(),
            allow_unverified: run.allow_unverified,
            validity_issues: issues,
            revenues: rows,
            checks: &verification.checks,
        };
        let text = toml::to_string(&report).map_err(|e| Error::Output(e.to_string()))?;
        files.insert("report.toml".into(), text);
    }

    Ok(ArtifactBundle { files, verification })
}

fn fig3_chart(t: &Table, horizon: f64) -> LineChart {
    let ts = t.numbers("t").unwrap_or_default();
    let col = |name: &str| -> Vec<(f64, f64)> {
        ts.iter().copied().zip(t.numbers(name).unwrap_or_default()).collect()
    };
    LineChart::new(&format!("Prices, T = {horizon}"), "t", "price")
        .series("p1", col("p1"))
        .series("p2", col("p2"))
}

fn fig4_chart(t: &Table) -> LineChart {
    let (ts, etas, xs, gains) = (
        t.numbers("T").unwrap_or_default(),
        t.numbers("eta").unwrap_or_default(),
        t.numbers("x1_0").unwrap_or_default(),
        t.numbers("gain").unwrap_or_default(),
    );
    let mut chart = LineChart::new("Revenue gain", "T", "gain");
    for i in 0..ts.len() {
        let name = format!("eta={} x0={}", etas[i], xs[i]);
        match chart.series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push((ts[i], gains[i])),
            None => chart = chart.series(&name, vec![(ts[i], gains[i])]),
        }
    }
    chart
}

fn by_gamma_chart(t: &Table, title: &str, cols: &[(&str, &str)]) -> LineChart {
    let (gs, ts) = (t.numbers("gamma").unwrap_or_default(), t.numbers("T").unwrap_or_default());
    let mut horizons: Vec<f64> = Vec::new();
    for &h in &ts {
        if !horizons.contains(&h) {
            horizons.push(h);
        }
    }
    let mut chart = LineChart::new(title, "gamma", "value");
    for (col, label) in cols {
        let vals = t.numbers(col).unwrap_or_default();
        for &h in &horizons {
            let pts = (0..gs.len()).filter(|&i| ts[i] == h).map(|i| (gs[i], vals[i])).collect();
            chart = chart.series(&format!("{label} T={h}"), pts);
        }
    }
    chart
}
