//! Cross-product parameter sweeps in long format.
//!
//! Axes not swept take their base value: `T_values[0]`, `gamma_values[0]`
//! (0 when empty), and `eta`, `rho`, `x1_0` from the config.

use super::config::{config_err, Axis, ScenarioConfig};
use super::run::{evaluate_cell, CellResult, Verification};
use super::table::{num, Table};
use crate::error::Result;
use crate::model::Operator;

/// Coordinates of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub horizon: f64,
    pub eta: f64,
    pub gamma: f64,
    pub x1_0: f64,
    pub rho: f64,
}

impl Cell {
    fn set(&mut self, axis: Axis, v: f64) {
        match axis {
            Axis::T => self.horizon = v,
            Axis::Eta => self.eta = v,
            Axis::Gamma => self.gamma = v,
            Axis::X10 => self.x1_0 = v,
            Axis::Rho => self.rho = v,
        }
    }

    fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::T => self.horizon,
            Axis::Eta => self.eta,
            Axis::Gamma => self.gamma,
            Axis::X10 => self.x1_0,
            Axis::Rho => self.rho,
        }
    }
}

fn values(cfg: &ScenarioConfig, axis: Axis) -> Vec<f64> {
    match axis {
        Axis::T => cfg.t_values.clone(),
        Axis::Eta => cfg.etas(),
        Axis::Gamma => cfg.gammas(),
        Axis::X10 => cfg.x1_0s(),
        Axis::Rho => cfg.rhos(),
    }
}

/// Cells in lexicographic order: the last axis varies fastest.
pub fn cells(cfg: &ScenarioConfig, axes: &[Axis]) -> Result<Vec<Cell>> {
    if axes.is_empty() {
        return Err(config_err("sweep_axes", "at least one axis is required"));
    }
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].contains(a) {
            return Err(config_err("sweep_axes", format!("axis `{}` listed twice", a.name())));
        }
    }
    let base = Cell {
        horizon: cfg.t_values[0],
        eta: cfg.params.eta(),
        gamma: cfg.gammas()[0],
        x1_0: cfg.x1_0,
        rho: cfg.params.rho(),
    };
    let mut out = vec![base];
    for &axis in axes {
        let vs = values(cfg, axis);
        out = out
            .into_iter()
            .flat_map(|c| {
                vs.iter().map(move |&v| {
                    let mut c = c;
                    c.set(axis, v);
                    c
                })
            })
            .collect();
    }
    Ok(out)
}

pub fn evaluate(cfg: &ScenarioConfig, cell: &Cell) -> Result<CellResult> {
    let params = cfg.params.with_eta(cell.eta)?.with_rho(cell.rho)?;
    evaluate_cell(cfg, &params, cell.x1_0, cell.horizon, cell.gamma)
}

#[cfg(feature = "parallel")]
fn evaluate_all(cfg: &ScenarioConfig, cells: &[Cell]) -> Vec<Result<CellResult>> {
    use rayon::prelude::*;
    cells.par_iter().map(|c| evaluate(cfg, c)).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(cfg: &ScenarioConfig, cells: &[Cell]) -> Vec<Result<CellResult>> {
    cells.iter().map(|c| evaluate(cfg, c)).collect()
}

const OUTPUT_COLUMNS: [&str; 10] = [
    "r1_a", "r2_b", "gain", "b1", "b2", "profit1", "profit2", "winner", "tie", "error",
];

/// One row per cell; failing cells keep their coordinates and fill `error`.
pub fn sweep(cfg: &ScenarioConfig, axes: &[Axis], verification: Option<&Verification>) -> Result<Table> {
    cfg.validate()?;
    let cells = cells(cfg, axes)?;
    let results = evaluate_all(cfg, &cells);
    let mut header: Vec<&'static str> = axes.iter().map(|a| a.name()).collect();
    header.extend(OUTPUT_COLUMNS);
    let mut t = Table::new("sweep", header)
        .meta("config_hash", cfg.hash())
        .meta("oracle", verification.map_or("not-run", |v| v.status()))
        .meta("quad_mode", cfg.quad_mode.name());
    for (cell, res) in cells.iter().zip(results) {
        let mut row: Vec<String> = axes.iter().map(|&a| num(cell.get(a))).collect();
        match res {
            Ok(r) => row.extend([
                num(r.revenues.aggregate(Operator::One, true)),
                num(r.revenues.aggregate(Operator::Two, false)),
                num(r.gain),
                num(r.auction.b1_star),
                num(r.auction.b2_star),
                num(r.auction.realized_profit_1),
                num(r.auction.realized_profit_2),
                r.auction.winner.number().to_string(),
                r.auction.tie.to_string(),
                String::new(),
            ]),
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), OUTPUT_COLUMNS.len() - 1));
                row.push(e.to_string());
            }
        }
        t.push(row);
    }
    Ok(t)
}
