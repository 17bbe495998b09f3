//! Infinite-horizon equilibrium of the symmetric phase `[T, inf)`: constant
//! costate coefficients and an exponential share path towards one half.

use serde::{Deserialize, Serialize};

use crate::asym::SolverOptions;
use crate::equilibrium::{uniform_grid, FeedbackEquilibrium, PhaseTrajectory};
use crate::error::{invalid, Error, Result};
use crate::mode::QuadMode;
use crate::model::{MarketParams, Operator, PhaseKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymCoefficients {
    pub k: f64,
    pub e1: f64,
    pub e2: f64,
    /// `e1 - e2`.
    pub z: f64,
    /// Exponent of the share's approach to one half, per unit time.
    pub decay: f64,
    pub mode: QuadMode,
}

/// Postcondition bound on `|k + e1 + e2|`, relative to the offsets' size.
const BALANCE_TOL: f64 = 1e-8;

pub fn solve_symmetric_coeffs(params: &MarketParams, mode: QuadMode) -> Result<SymCoefficients> {
    let (k, _) = mode.steady_riccati(params).roots()?;
    let (m, n, l) = mode.offset_weights();
    let (s_lo, s_hi, s1, s2, rho) = (params.s_lo(), params.s_hi(), params.s1(), params.s2(), params.rho());
    let denom = 9.0 * rho * s1 + 13.0 * s_lo + 5.0 * s_hi - m * k;
    if denom == 0.0 {
        return Err(Error::DegenerateParameters(
            "costate offset denominator vanishes".into(),
        ));
    }
    let z = (2.0 * s2 + l * k) / (3.0 * (1.0 + rho));
    let w = 2.0 * s_lo + s_hi;
    let e1 = (2.0 * s2 + n * k) * (w - z) / denom;
    let e2 = e1 - z;
    let decay = 2.0 * (k - s_lo - s1) / (3.0 * s1);
    if !(decay < 0.0) {
        return Err(Error::DegenerateParameters(format!(
            "smallest root k = {k} gives nonnegative share decay {decay}"
        )));
    }
    let imbalance = (k + e1 + e2).abs();
    if imbalance > BALANCE_TOL * (1.0 + e1.abs() + e2.abs()) {
        return Err(Error::DegenerateParameters(format!(
            "k + e1 + e2 = {imbalance:e} breaks the symmetric fixed point"
        )));
    }
    Ok(SymCoefficients {
        k,
        e1,
        e2,
        z,
        decay,
        mode,
    })
}

impl SymCoefficients {
    /// Affine prices `(p1, p2)` at share `x1`.
    pub fn prices(&self, params: &MarketParams, x1: f64) -> (f64, f64) {
        let s1 = params.s1();
        let slope = (params.s2() - self.k) / 3.0;
        (
            (s1 + params.s_lo() + self.e2 - 2.0 * self.e1) / 3.0 + slope * x1,
            (s1 + params.s_hi() - self.e1 + 2.0 * self.e2) / 3.0 - slope * x1,
        )
    }
}

pub fn equilibrium_prices_sym(coeffs: &SymCoefficients, params: &MarketParams, x1: f64) -> (f64, f64) {
    coeffs.prices(params, x1)
}

/// `x1(t) = 1/2 + (x1_T - 1/2) exp(decay (t - T))` for `t >= T`.
pub fn share_trajectory_sym(coeffs: &SymCoefficients, x1_t: f64, start: f64, t: f64) -> Result<f64> {
    if t < start {
        return Err(Error::TimeOutOfRange {
            t,
            lo: start,
            hi: f64::INFINITY,
        });
    }
    Ok(0.5 + (x1_t - 0.5) * (coeffs.decay * (t - start)).exp())
}

/// Solved symmetric phase starting at `start` from share `x1_start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymSolution {
    params: MarketParams,
    coeffs: SymCoefficients,
    advantaged: Operator,
    start: f64,
    x1_start: f64,
}

impl SymSolution {
    pub fn new(
        params: MarketParams,
        coeffs: SymCoefficients,
        advantaged: Operator,
        start: f64,
        x1_start: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&x1_start) {
            return Err(invalid("x1_T", format!("must lie in [0, 1], got {x1_start}")));
        }
        if !start.is_finite() || start < 0.0 {
            return Err(invalid("T", format!("must be finite and nonnegative, got {start}")));
        }
        Ok(SymSolution {
            params,
            coeffs,
            advantaged,
            start,
            x1_start,
        })
    }

    pub fn coefficients(&self) -> &SymCoefficients {
        &self.coeffs
    }
    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn x1_start(&self) -> f64 {
        self.x1_start
    }
}

impl FeedbackEquilibrium for SymSolution {
    fn params(&self) -> &MarketParams {
        &self.params
    }
    fn kind(&self) -> PhaseKind {
        PhaseKind::symmetric(self.advantaged)
    }
    fn window(&self) -> (f64, Option<f64>) {
        (self.start, None)
    }
    fn k(&self, _t: f64) -> f64 {
        self.coeffs.k
    }
    fn offsets(&self, _t: f64) -> (f64, f64) {
        (self.coeffs.e1, self.coeffs.e2)
    }
    fn share(&self, t: f64) -> f64 {
        0.5 + (self.x1_start - 0.5) * (self.coeffs.decay * (t - self.start)).exp()
    }
}

/// Solves the symmetric phase from `(start, x1_start)` and samples
/// `[start, start + tail]` on `opts.grid` points.
pub fn solve_symmetric(
    params: &MarketParams,
    advantaged: Operator,
    x1_start: f64,
    start: f64,
    tail: f64,
    opts: &SolverOptions,
) -> Result<(SymSolution, PhaseTrajectory)> {
    opts.validate()?;
    if !(tail > 0.0) || !tail.is_finite() {
        return Err(invalid("sym_tail", format!("must be positive and finite, got {tail}")));
    }
    let coeffs = solve_symmetric_coeffs(params, opts.mode)?;
    let sol = SymSolution::new(*params, coeffs, advantaged, start, x1_start)?;
    let traj = sol.sample(&uniform_grid(start, start + tail, opts.grid), opts.validity)?;
    Ok((sol, traj))
}
