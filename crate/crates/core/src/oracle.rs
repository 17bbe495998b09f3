//! Independent checks of the closed forms.
//!
//! * [`backward_induction`] discretizes the pricing game in time (explicit
//!   Euler on the share, exact stage Nash, quadratic value functions) and
//!   recovers the costate coefficients as `k = dV/dx` slopes.
//! * [`residual_report`] evaluates the necessary conditions (maximum
//!   condition, adjoint equation, boundary condition, state equation) on a
//!   sampled trajectory.
//! * [`auction_best_response`] maximizes the expected spiteful payoff on a
//!   bid grid.

use serde::{Deserialize, Serialize};

use crate::auction::AuctionInputs;
use crate::equilibrium::{FeedbackEquilibrium, PhaseTrajectory};
use crate::error::{invalid, Error, Result};
use crate::model::{share_rate_unchecked, MarketParams, Operator, Phase, PhaseKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(f64),
    /// Value iteration until the largest coefficient change drops below `tol`.
    Infinite { tol: f64, max_steps: usize },
}

impl Horizon {
    pub fn infinite() -> Self {
        Horizon::Infinite {
            tol: 1e-10,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteGameSetup {
    pub params: MarketParams,
    pub phase: PhaseKind,
    pub dt: f64,
    pub horizon: Horizon,
}

impl DiscreteGameSetup {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        match self.horizon {
            Horizon::Finite(t) => {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(invalid("T", format!("must be positive, got {t}")));
                }
                if self.dt > t / 64.0 {
                    return Err(invalid("dt", format!("must not exceed T/64 = {}", t / 64.0)));
                }
            }
            Horizon::Infinite { tol, max_steps } => {
                if !(tol > 0.0) || max_steps == 0 {
                    return Err(invalid("horizon", "tolerance and step budget must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// `V(x1) = a x1^2 + b x1 + c`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadraticValue {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticValue {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }
    /// Slope `dV/dx1`, the discrete analogue of the costate.
    pub fn slope(&self, x: f64) -> f64 {
        2.0 * self.a * x + self.b
    }
    fn max_change(&self, o: &QuadraticValue) -> f64 {
        (self.a - o.a).abs().max((self.b - o.b).abs()).max((self.c - o.c).abs())
    }
    fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }
}

/// `p(x1) = intercept + slope x1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AffinePrice {
    pub intercept: f64,
    pub slope: f64,
}

impl AffinePrice {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Values to go at the start of a step and the stage-Nash policy used on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleStep {
    pub t: f64,
    pub values: [QuadraticValue; 2],
    pub policy: [AffinePrice; 2],
}

impl OracleStep {
    pub fn k_hat(&self, op: Operator) -> f64 {
        2.0 * self.values[op.index()].a
    }
    pub fn e_hat(&self, op: Operator) -> f64 {
        self.values[op.index()].b
    }
    pub fn prices(&self, x: f64) -> (f64, f64) {
        (self.policy[0].eval(x), self.policy[1].eval(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardInduction {
    pub setup: DiscreteGameSetup,
    /// Effective step (the finite horizon is split into a whole number of steps).
    pub dt: f64,
    /// Forward in time; a single stationary step for the infinite horizon.
    pub steps: Vec<OracleStep>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePath {
    pub times: Vec<f64>,
    pub x1: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl BackwardInduction {
    pub fn first(&self) -> &OracleStep {
        &self.steps[0]
    }

    pub fn step_at(&self, t: f64) -> &OracleStep {
        if self.steps.len() == 1 {
            return &self.steps[0];
        }
        let i = ((t / self.dt).floor().max(0.0) as usize).min(self.steps.len() - 1);
        &self.steps[i]
    }

    /// Rolls the share forward under the stage policies from `x0` at time
    /// `start`, for `n` steps.
    pub fn simulate(&self, x0: f64, start: f64, n: usize) -> OraclePath {
        let p = &self.setup.params;
        let kind = self.setup.phase;
        let mut out = OraclePath {
            times: Vec::with_capacity(n + 1),
            x1: Vec::with_capacity(n + 1),
            p1: Vec::with_capacity(n + 1),
            p2: Vec::with_capacity(n + 1),
        };
        let mut x = x0;
        for i in 0..=n {
            let t = start + i as f64 * self.dt;
            let step = if self.steps.len() == 1 {
                &self.steps[0]
            } else {
                &self.steps[i.min(self.steps.len() - 1)]
            };
            let (p1, p2) = step.prices(x);
            out.times.push(t);
            out.x1.push(x);
            out.p1.push(p1);
            out.p2.push(p2);
            x += self.dt * share_rate_unchecked(p, kind, x, p1, p2);
        }
        out
    }
}

const DIVERGENCE: f64 = 1e12;

/// Affine form `[p1, p2, 1, x]`.
type Lin = [f64; 4];

fn lin_add(u: Lin, v: Lin, s: f64) -> Lin {
    [u[0] + s * v[0], u[1] + s * v[1], u[2] + s * v[2], u[3] + s * v[3]]
}

/// Product of two affine functions of `x` given as `(constant, slope)`.
fn product(u: (f64, f64), v: (f64, f64)) -> QuadraticValue {
    QuadraticValue {
        a: u.1 * v.1,
        b: u.0 * v.1 + u.1 * v.0,
        c: u.0 * v.0,
    }
}

/// `V(w(x))` for affine `w = (constant, slope)`.
fn compose(v: &QuadraticValue, w: (f64, f64)) -> QuadraticValue {
    let sq = product(w, w);
    QuadraticValue {
        a: v.a * sq.a,
        b: v.a * sq.b + v.b * w.1,
        c: v.a * sq.c + v.b * w.0 + v.c,
    }
}

fn stage(
    params: &MarketParams,
    kind: PhaseKind,
    dt: f64,
    discount: f64,
    next: &[QuadraticValue; 2],
    step: usize,
) -> Result<([QuadraticValue; 2], [AffinePrice; 2])> {
    let s1 = params.s1();
    let g = (kind.utility_edge(params) + params.s_lo()) / s1;
    let h = -2.0 * params.s_lo() / s1;
    let xdot: Lin = [-1.0 / s1, 1.0 / s1, g, h];
    let xnext = lin_add([0.0, 0.0, 0.0, 1.0], xdot, dt);
    let [v1, v2] = next;
    // d/dp1 of p1 (x + xdot) dt + beta V1(x'), divided by dt
    let mut foc1 = lin_add([0.0, 0.0, 0.0, 1.0], xdot, 1.0);
    foc1[0] -= 1.0 / s1;
    let mut tail1 = lin_add([0.0; 4], xnext, 2.0 * v1.a);
    tail1[2] += v1.b;
    foc1 = lin_add(foc1, tail1, -discount / s1);
    // d/dp2 of p2 (1 - x - xdot) dt + beta V2(x'), divided by dt
    let mut foc2 = lin_add([0.0, 0.0, 1.0, -1.0], xdot, -1.0);
    foc2[1] -= 1.0 / s1;
    let mut tail2 = lin_add([0.0; 4], xnext, 2.0 * v2.a);
    tail2[2] += v2.b;
    foc2 = lin_add(foc2, tail2, discount / s1);

    let det = foc1[0] * foc2[1] - foc1[1] * foc2[0];
    if !(det.abs() > 1e-14) {
        return Err(Error::SingularStage { step });
    }
    let solve = |col: usize| {
        let (r1, r2) = (-foc1[col], -foc2[col]);
        (
            (r1 * foc2[1] - foc1[1] * r2) / det,
            (foc1[0] * r2 - r1 * foc2[0]) / det,
        )
    };
    let (c1, c2) = solve(2);
    let (m1, m2) = solve(3);
    let p1 = (c1, m1);
    let p2 = (c2, m2);
    let xd = (
        g + xdot[0] * c1 + xdot[1] * c2,
        h + xdot[0] * m1 + xdot[1] * m2,
    );
    let xn = (dt * xd.0, 1.0 + dt * xd.1);
    let r1 = product(p1, (xd.0, 1.0 + xd.1));
    let r2 = product(p2, (1.0 - xd.0, -1.0 - xd.1));
    let n1 = compose(v1, xn);
    let n2 = compose(v2, xn);
    let values = [
        QuadraticValue {
            a: dt * r1.a + discount * n1.a,
            b: dt * r1.b + discount * n1.b,
            c: dt * r1.c + discount * n1.c,
        },
        QuadraticValue {
            a: dt * r2.a + discount * n2.a,
            b: dt * r2.b + discount * n2.b,
            c: dt * r2.c + discount * n2.c,
        },
    ];
    for v in &values {
        if !v.is_finite() || v.a.abs() > DIVERGENCE {
            return Err(Error::ValueDivergence {
                step,
                magnitude: v.a.abs(),
            });
        }
    }
    let policy = [
        AffinePrice {
            intercept: c1,
            slope: m1,
        },
        AffinePrice {
            intercept: c2,
            slope: m2,
        },
    ];
    Ok((values, policy))
}

/// Discrete-time feedback Nash equilibrium by backward induction.
pub fn backward_induction(setup: &DiscreteGameSetup) -> Result<BackwardInduction> {
    setup.validate()?;
    let p = &setup.params;
    match setup.horizon {
        Horizon::Finite(t_end) => {
            let n = (t_end / setup.dt).round().max(1.0) as usize;
            let dt = t_end / n as f64;
            let discount = (-p.rho() * dt).exp();
            let mut values = [QuadraticValue::default(); 2];
            let mut steps = Vec::with_capacity(n);
            for i in (0..n).rev() {
                let (v, policy) = stage(p, setup.phase, dt, discount, &values, n - i)?;
                values = v;
                steps.push(OracleStep {
                    t: i as f64 * dt,
                    values,
                    policy,
                });
            }
            steps.reverse();
            Ok(BackwardInduction {
                setup: *setup,
                dt,
                steps,
                iterations: n,
            })
        }
        Horizon::Infinite { tol, max_steps } => {
            let dt = setup.dt;
            let discount = (-p.rho() * dt).exp();
            let mut values = [QuadraticValue::default(); 2];
            let mut change = f64::INFINITY;
            for i in 1..=max_steps {
                let (v, policy) = stage(p, setup.phase, dt, discount, &values, i)?;
                change = v[0].max_change(&values[0]).max(v[1].max_change(&values[1]));
                values = v;
                if change < tol {
                    return Ok(BackwardInduction {
                        setup: *setup,
                        dt,
                        steps: vec![OracleStep {
                            t: 0.0,
                            values,
                            policy,
                        }],
                        iterations: i,
                    });
                }
            }
            Err(Error::NotConverged {
                steps: max_steps,
                change,
            })
        }
    }
}

/// `k_hat(0)` for a sequence of steps plus the first-order error estimate
/// `|k_hat(dt) - k_hat(2 dt)|` of the finest pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub dts: Vec<f64>,
    pub k0: Vec<f64>,
    pub extrapolated: f64,
    pub extrapolated_error: f64,
}

pub fn convergence_study(base: &DiscreteGameSetup, dts: &[f64]) -> Result<ConvergenceStudy> {
    if dts.len() < 2 {
        return Err(invalid("dts", "at least two step sizes required"));
    }
    let k0 = dts
        .iter()
        .map(|&dt| {
            let run = backward_induction(&DiscreteGameSetup { dt, ..*base })?;
            Ok(run.first().k_hat(Operator::One))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = k0.len();
    let (fine, coarse) = (k0[n - 1], k0[n - 2]);
    let ratio = dts[n - 2] / dts[n - 1];
    Ok(ConvergenceStudy {
        dts: dts.to_vec(),
        extrapolated: fine + (fine - coarse) / (ratio - 1.0),
        extrapolated_error: (fine - coarse).abs(),
        k0,
    })
}

/// Largest closed-form vs oracle gaps over a phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub dt: f64,
    pub k_error: f64,
    pub offset_error: f64,
    pub price_error: f64,
    pub share_error: f64,
}

impl OracleComparison {
    pub fn coefficient_error(&self) -> f64 {
        self.k_error.max(self.offset_error)
    }
    pub fn trajectory_error(&self) -> f64 {
        self.price_error.max(self.share_error)
    }
    pub fn passes(&self, coefficient_tol: f64, trajectory_tol: f64) -> bool {
        self.coefficient_error() <= coefficient_tol && self.trajectory_error() <= trajectory_tol
    }
}

const COMPARE_POINTS: usize = 2000;

/// Compares a solved phase with the discrete game at step `dt`. The finite
/// phase uses the same horizon; the symmetric phase uses the stationary
/// infinite-horizon oracle over `tail` time units from the phase start.
pub fn compare_with_oracle<E: FeedbackEquilibrium>(eq: &E, dt: f64, tail: f64) -> Result<OracleComparison> {
    let (start, end) = eq.window();
    let horizon = match end {
        Some(t_end) => Horizon::Finite(t_end - start),
        None => Horizon::infinite(),
    };
    let setup = DiscreteGameSetup {
        params: *eq.params(),
        phase: eq.kind(),
        dt,
        horizon,
    };
    let run = backward_induction(&setup)?;
    let span = end.map_or(tail, |t_end| t_end - start);
    let n = (span / run.dt).round() as usize;
    let path = run.simulate(eq.share(start), 0.0, n);
    let stride = (n / COMPARE_POINTS).max(1);
    let mut cmp = OracleComparison {
        dt: run.dt,
        k_error: 0.0,
        offset_error: 0.0,
        price_error: 0.0,
        share_error: 0.0,
    };
    for i in (0..n).step_by(stride) {
        let t = start + path.times[i];
        let step = if run.steps.len() == 1 { &run.steps[0] } else { &run.steps[i] };
        let (e1, e2) = eq.offsets(t);
        let k = eq.k(t);
        cmp.k_error = cmp
            .k_error
            .max((step.k_hat(Operator::One) - k).abs())
            .max((step.k_hat(Operator::Two) - k).abs());
        cmp.offset_error = cmp
            .offset_error
            .max((step.e_hat(Operator::One) - e1).abs())
            .max((step.e_hat(Operator::Two) - e2).abs());
        let x = path.x1[i];
        let (p1, p2) = eq.prices(t, x);
        cmp.price_error = cmp
            .price_error
            .max((p1 - path.p1[i]).abs())
            .max((p2 - path.p2[i]).abs());
        cmp.share_error = cmp.share_error.max((eq.share(t) - x).abs());
    }
    Ok(cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualTolerances {
    pub foc: f64,
    pub adjoint: f64,
    pub boundary: f64,
    pub ode: f64,
}

impl Default for ResidualTolerances {
    fn default() -> Self {
        ResidualTolerances {
            foc: 1e-5,
            adjoint: 1e-5,
            boundary: 1e-10,
            ode: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub phase: Phase,
    pub foc: f64,
    pub adjoint: f64,
    pub boundary: f64,
    pub ode: f64,
    pub tolerances: ResidualTolerances,
    pub pass: bool,
}

const FOC_STEP: f64 = 1e-4;
const ADJOINT_STEP: f64 = 1e-4;
const ODE_STEP: f64 = 1e-3;

/// `H_i = r_i + lambda_i dx1/dt` with both costates taken against `x1`.
fn hamiltonians(params: &MarketParams, kind: PhaseKind, x: f64, p1: f64, p2: f64, l1: f64, l2: f64) -> (f64, f64) {
    let xd = share_rate_unchecked(params, kind, x, p1, p2);
    (p1 * (x + xd) + l1 * xd, p2 * (1.0 - x - xd) + l2 * xd)
}

/// Necessary-condition residuals of `traj` against the equilibrium `eq` it
/// was sampled from.
pub fn residual_report<E: FeedbackEquilibrium>(
    traj: &PhaseTrajectory,
    eq: &E,
    tol: &ResidualTolerances,
) -> ResidualReport {
    let params = *eq.params();
    let kind = traj.phase;
    let s1 = params.s1();
    let h = -2.0 * params.s_lo() / s1;
    let rho = params.rho();
    let (start, end) = eq.window();
    let mut foc: f64 = 0.0;
    let mut adjoint: f64 = 0.0;
    let mut ode: f64 = 0.0;
    for i in 0..traj.len() {
        let (t, x, p1, p2, l1, l2) = (
            traj.times[i],
            traj.x1[i],
            traj.p1[i],
            traj.p2[i],
            traj.lambda1[i],
            traj.lambda2[i],
        );
        let d = FOC_STEP;
        let dh1 = (hamiltonians(&params, kind, x, p1 + d, p2, l1, l2).0
            - hamiltonians(&params, kind, x, p1 - d, p2, l1, l2).0)
            / (2.0 * d);
        let dh2 = (hamiltonians(&params, kind, x, p1, p2 + d, l1, l2).1
            - hamiltonians(&params, kind, x, p1, p2 - d, l1, l2).1)
            / (2.0 * d);
        foc = foc.max(dh1.abs()).max(dh2.abs());

        let interior = t - ODE_STEP >= start && end.is_none_or(|e| t + ODE_STEP <= e);
        if !interior {
            continue;
        }
        let (m1, m2) = eq.price_slopes(t);
        let dh1_dx = p1 * (1.0 + h) + l1 * h;
        let dh2_dx = -p2 * (1.0 + h) + l2 * h;
        let dh1_dp2 = (p1 + l1) / s1;
        let dh2_dp1 = (p2 - l2) / s1;
        let along = |dt: f64| {
            let tt = t + dt;
            eq.costates(tt, eq.share(tt))
        };
        let (fwd, bwd) = (along(ADJOINT_STEP), along(-ADJOINT_STEP));
        let dl1 = (fwd.0 - bwd.0) / (2.0 * ADJOINT_STEP);
        let dl2 = (fwd.1 - bwd.1) / (2.0 * ADJOINT_STEP);
        adjoint = adjoint
            .max((dl1 - (rho * l1 - dh1_dx - dh1_dp2 * m2)).abs())
            .max((dl2 - (rho * l2 - dh2_dx - dh2_dp1 * m1)).abs());

        let dx = (eq.share(t + ODE_STEP) - eq.share(t - ODE_STEP)) / (2.0 * ODE_STEP);
        ode = ode
            .max((dx - share_rate_unchecked(&params, kind, x, p1, p2)).abs())
            .max((x - eq.share(t)).abs());
    }
    let boundary = match end {
        Some(t_end) => {
            let (l1, l2) = eq.costates(t_end, eq.share(t_end));
            l1.abs().max(l2.abs())
        }
        None => {
            let sup = traj
                .lambda1
                .iter()
                .chain(&traj.lambda2)
                .fold(0.0f64, |m, l| m.max(l.abs()));
            let probe = start + 100.0 / rho;
            let (l1, l2) = eq.costates(probe, eq.share(probe));
            (-rho * probe).exp() * sup.max(l1.abs()).max(l2.abs())
        }
    };
    let pass = foc <= tol.foc && adjoint <= tol.adjoint && boundary <= tol.boundary && ode <= tol.ode;
    ResidualReport {
        phase: kind.phase,
        foc,
        adjoint,
        boundary,
        ode,
        tolerances: *tol,
        pass,
    }
}

/// Grid maximization of the expected spiteful payoff against a uniform rival bid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub bid: f64,
    pub payoff: f64,
    /// Grid spacing.
    pub step: f64,
    pub lo: f64,
    /// Payoff at `lo + i * step`.
    pub curve: Vec<f64>,
}

pub const MIN_BID_GRID: usize = 10_000;

pub fn auction_best_response(inputs: &AuctionInputs, bidder: Operator, grid_n: usize) -> Result<BestResponse> {
    if grid_n < MIN_BID_GRID {
        return Err(invalid("grid_n", format!("at least {MIN_BID_GRID} required, got {grid_n}")));
    }
    let lo = inputs.c_a;
    let hi = inputs.revenue_a(bidder.other());
    if !(hi > lo) {
        return Err(Error::DegenerateSupport { reserve: lo, upper: hi });
    }
    let step = (hi - lo) / grid_n as f64;
    let curve: Vec<f64> = (0..=grid_n)
        .map(|i| inputs.expected_payoff(bidder, lo + step * i as f64))
        .collect();
    let (best, payoff) = curve
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(BestResponse {
        bid: lo + step * best as f64,
        payoff,
        step,
        lo,
        curve,
    })
}
