//! Browser bindings: each export solves a small scenario and returns an SVG chart.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use spectrum_duopoly::scenario::run::{auction_inputs, solve_phases};
use spectrum_duopoly::scenario::svg::LineChart;
use spectrum_duopoly::scenario::ScenarioConfig;
use spectrum_duopoly::{aggregate_revenues, run_auction, Error, MarketParams, Operator, QuadMode, Result};
use wasm_bindgen::prelude::*;

const GRID: usize = 161;

fn config(eta: f64, rho: f64, x1_0: f64, mode: &str) -> Result<ScenarioConfig> {
    let p = MarketParams::reference();
    let cfg = ScenarioConfig {
        params: MarketParams::new(p.u0(), eta, rho, p.s_lo(), p.s_hi())?,
        x1_0,
        quad_mode: mode.parse::<QuadMode>()?,
        grid: GRID,
        ..ScenarioConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn trajectory_chart(eta: f64, rho: f64, x1_0: f64, horizon: f64, tail: f64, mode: &str) -> Result<String> {
    let cfg = config(eta, rho, x1_0, mode)?;
    let ph = solve_phases(&cfg.params, x1_0, horizon, tail, &cfg.solver_options())?;
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    let mut x1 = Vec::new();
    for tr in [&ph.asym_traj, &ph.sym_traj] {
        for i in 0..tr.len() {
            p1.push((tr.times[i], tr.p1[i]));
            p2.push((tr.times[i], tr.p2[i]));
            x1.push((tr.times[i], 10.0 * tr.x1[i]));
        }
    }
    Ok(LineChart::new(&format!("Prices and share, T = {horizon}"), "t", "price")
        .series("p1", p1)
        .series("p2", p2)
        .series("10 x1", x1)
        .render())
}

pub fn gain_chart(eta: f64, rho: f64, x1_0: f64, t_max: f64, mode: &str) -> Result<String> {
    let cfg = config(eta, rho, x1_0, mode)?;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter {
            field: "t_max",
            reason: format!("must be positive, got {t_max}"),
        });
    }
    let mut pts = Vec::new();
    for i in 0..=20 {
        let t = t_max * i as f64 / 20.0;
        let r = aggregate_revenues(&cfg.params, x1_0, t, &cfg.solver_options())?;
        pts.push((t, r.gain_for(Operator::One)?));
    }
    Ok(LineChart::new("Revenue gain of the block-A holder", "T", "gain")
        .series("gain", pts)
        .render())
}

pub fn bids_chart(eta: f64, x1_0: f64, horizon: f64, c_a: f64, c_b: f64, c_bs: f64) -> Result<String> {
    let mut cfg = config(eta, MarketParams::reference().rho(), x1_0, "feedback")?;
    cfg.c_a = c_a;
    cfg.c_b = c_b;
    cfg.c_bs = c_bs;
    cfg.validate()?;
    let r = aggregate_revenues(&cfg.params, x1_0, horizon, &cfg.solver_options())?;
    let mut b1 = Vec::new();
    let mut b2 = Vec::new();
    for i in 0..=20 {
        let g = i as f64 / 20.0;
        let o = run_auction(&auction_inputs(&cfg, &r, g)?);
        b1.push((g, o.b1_star));
        b2.push((g, o.b2_star));
    }
    Ok(LineChart::new(&format!("Equilibrium bids, T = {horizon}"), "gamma", "bid")
        .series("b1", b1)
        .series("b2", b2)
        .render())
}

fn js(r: Result<String>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = trajectorySvg)]
pub fn trajectory_svg(eta: f64, rho: f64, x1_0: f64, horizon: f64, mode: &str) -> std::result::Result<String, JsValue> {
    js(trajectory_chart(eta, rho, x1_0, horizon, 8.0, mode))
}

#[wasm_bindgen(js_name = gainSvg)]
pub fn gain_svg(eta: f64, rho: f64, x1_0: f64, t_max: f64, mode: &str) -> std::result::Result<String, JsValue> {
    js(gain_chart(eta, rho, x1_0, t_max, mode))
}

#[wasm_bindgen(js_name = bidsSvg)]
pub fn bids_svg(eta: f64, x1_0: f64, horizon: f64, c_a: f64, c_b: f64, c_bs: f64) -> std::result::Result<String, JsValue> {
    js(bids_chart(eta, x1_0, horizon, c_a, c_b, c_bs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_render() {
        for svg in [
            trajectory_chart(0.5, 0.5, 0.5, 1.5, 8.0, "feedback").unwrap(),
            gain_chart(0.5, 0.5, 0.5, 2.0, "matched").unwrap(),
            bids_chart(0.5, 0.6, 1.5, 0.1, 0.2, 1.0).unwrap(),
        ] {
            assert!(svg.starts_with("<svg"));
            assert!(!svg.contains("NaN"));
        }
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(trajectory_chart(1.5, 0.5, 0.5, 1.5, 8.0, "feedback").is_err());
        assert!(trajectory_chart(0.5, 0.5, 0.5, 1.5, 8.0, "nope").is_err());
        assert!(gain_chart(0.5, 0.5, 0.5, 0.0, "feedback").is_err());
    }
}
