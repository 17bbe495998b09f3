//! Discounted revenues `int e^{-rho t} p_i (x_i + dx_i/dt) dt` per phase, their
//! aggregation over both phases and both allocations of block A, and the
//! revenue gain of the A-holder.

use serde::{Deserialize, Serialize};

use crate::asym::{solve_asymmetric, AsymSolution, SolverOptions};
use crate::equilibrium::FeedbackEquilibrium;
use crate::error::{Error, Result};
use crate::model::{MarketParams, Operator};
use crate::quad::{integrate, Estimate, Tolerance};
use crate::sym::{solve_symmetric_coeffs, SymSolution};

/// Undiscounted revenue rate `p_i (x_i + dx_i/dt)` along the equilibrium path.
pub fn revenue_rate<E: FeedbackEquilibrium>(eq: &E, op: Operator, t: f64) -> f64 {
    let x = eq.share(t);
    let (p1, p2) = eq.prices(t, x);
    let xd = eq.share_rate(t);
    match op {
        Operator::One => p1 * (x + xd),
        Operator::Two => p2 * (1.0 - x - xd),
    }
}

/// `int_a^b e^{-rho t} r_i(t) dt` by adaptive quadrature, with an arbitrary
/// discount rate applied to the same path.
pub fn discounted_revenue<E: FeedbackEquilibrium>(
    eq: &E,
    op: Operator,
    rho: f64,
    a: f64,
    b: f64,
    tol: &Tolerance,
) -> Result<Estimate> {
    integrate(|t| (-rho * t).exp() * revenue_rate(eq, op, t), a, b, tol)
}

/// Revenue of the asymmetric phase over `[0, T]`.
pub fn asymmetric_phase_revenue(sol: &AsymSolution, op: Operator, tol: &Tolerance) -> Result<Estimate> {
    let (start, end) = sol.window();
    discounted_revenue(sol, op, sol.params().rho(), start, end.unwrap_or(start), tol)
}

/// Revenue of the symmetric phase over `[T, inf)`, in closed form.
///
/// With `e = exp(decay (t - T))` the share is `1/2 + c e`, prices are affine in
/// it, so the integrand is a quadratic in `e` times the discount factor.
pub fn symmetric_phase_revenue(sol: &SymSolution, op: Operator) -> f64 {
    let p = sol.params();
    let rho = p.rho();
    let lam = sol.coefficients().decay;
    let start = sol.start();
    let (half1, half2) = sol.prices(start, 0.5);
    let m = (p.s2() - sol.coefficients().k) / 3.0;
    let c0 = sol.x1_start() - 0.5;
    let (base, c) = match op {
        Operator::One => (half1, c0),
        Operator::Two => (half2, -c0),
    };
    let a0 = base / 2.0;
    let a1 = base * c * (1.0 + lam) + m * c / 2.0;
    let a2 = m * c * c * (1.0 + lam);
    (-rho * start).exp() * (a0 / rho + a1 / (rho - lam) + a2 / (rho - 2.0 * lam))
}

/// Brute-force counterpart of [`symmetric_phase_revenue`]: quadrature up to
/// the time where the discounted integrand bound drops below `cutoff`.
pub fn symmetric_phase_revenue_truncated(
    sol: &SymSolution,
    op: Operator,
    cutoff: f64,
    tol: &Tolerance,
) -> Result<Estimate> {
    let p = sol.params();
    let rho = p.rho();
    let start = sol.start();
    let bound = {
        let caps = sol.kind().price_caps(p);
        caps[0].max(caps[1]) * 2.0
    };
    let end = start.max((bound / cutoff).ln() / rho);
    let mut total = Estimate {
        value: 0.0,
        error: 0.0,
    };
    let pieces = ((end - start) / 5.0).ceil().max(1.0) as usize;
    let h = (end - start) / pieces as f64;
    for i in 0..pieces {
        let a = start + h * i as f64;
        total = total + discounted_revenue(sol, op, rho, a, a + h, tol)?;
    }
    Ok(total)
}

/// Phase revenues of both operators for one allocation of block A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationRevenues {
    pub asymmetric: [f64; 2],
    pub symmetric: [f64; 2],
}

impl OrientationRevenues {
    pub fn totals(&self) -> [f64; 2] {
        [
            self.asymmetric[0] + self.symmetric[0],
            self.asymmetric[1] + self.symmetric[1],
        ]
    }

    fn swapped(&self) -> Self {
        OrientationRevenues {
            asymmetric: [self.asymmetric[1], self.asymmetric[0]],
            symmetric: [self.symmetric[1], self.symmetric[0]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueReport {
    /// Operator 1 holds A: totals are `(R1^A, R2^B)`.
    pub a_to_1: OrientationRevenues,
    /// Operator 2 holds A: totals are `(R1^B, R2^A)`.
    pub a_to_2: OrientationRevenues,
    pub quadrature_error: f64,
}

impl RevenueReport {
    /// `(R1^A, R2^B)`.
    pub fn total_a_to_1(&self) -> [f64; 2] {
        self.a_to_1.totals()
    }
    /// `(R1^B, R2^A)`.
    pub fn total_a_to_2(&self) -> [f64; 2] {
        self.a_to_2.totals()
    }

    /// Aggregate of `op` when it holds (`true`) or does not hold block A.
    pub fn aggregate(&self, op: Operator, holds_a: bool) -> f64 {
        let orientation = match (op, holds_a) {
            (Operator::One, true) | (Operator::Two, false) => &self.a_to_1,
            (Operator::Two, true) | (Operator::One, false) => &self.a_to_2,
        };
        orientation.totals()[op.index()]
    }

    /// Relabels the operators; applying it twice is the identity.
    pub fn swap_roles(&self) -> Self {
        RevenueReport {
            a_to_1: self.a_to_2.swapped(),
            a_to_2: self.a_to_1.swapped(),
            quadrature_error: self.quadrature_error,
        }
    }

    /// `R_holder^A / R_other^B` when `holder` gets block A.
    pub fn gain_for(&self, holder: Operator) -> Result<f64> {
        let num = self.aggregate(holder, true);
        let den = self.aggregate(holder.other(), false);
        if den == 0.0 {
            return Err(Error::ZeroDenominator("revenue gain"));
        }
        Ok(num / den)
    }
}

/// `R1^A / R2^B`.
pub fn revenue_gain(report: &RevenueReport) -> Result<f64> {
    report.gain_for(Operator::One)
}

/// Both phases with `advantaged` holding A from share `x1_0`.
pub fn orientation_revenues(
    params: &MarketParams,
    advantaged: Operator,
    x1_0: f64,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<(OrientationRevenues, f64)> {
    let (asym, _) = solve_asymmetric(params, advantaged, x1_0, horizon, opts)?;
    let coeffs = solve_symmetric_coeffs(params, opts.mode)?;
    let sym = SymSolution::new(*params, coeffs, advantaged, horizon, asym.x1_terminal())?;
    let mut err = 0.0;
    let mut asymmetric = [0.0; 2];
    let mut symmetric = [0.0; 2];
    for op in [Operator::One, Operator::Two] {
        let est = asymmetric_phase_revenue(&asym, op, &opts.tolerance)?;
        asymmetric[op.index()] = est.value;
        err += est.error;
        symmetric[op.index()] = symmetric_phase_revenue(&sym, op);
    }
    Ok((
        OrientationRevenues {
            asymmetric,
            symmetric,
        },
        err,
    ))
}

/// Revenues for both allocations. The allocation with operator 2 holding A is
/// obtained by relabeling: operator 1 advantaged from `1 - x1_0`, indices
/// swapped.
pub fn aggregate_revenues(
    params: &MarketParams,
    x1_0: f64,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<RevenueReport> {
    let (a_to_1, e1) = orientation_revenues(params, Operator::One, x1_0, horizon, opts)?;
    let (mirror, e2) = orientation_revenues(params, Operator::One, 1.0 - x1_0, horizon, opts)?;
    Ok(RevenueReport {
        a_to_1,
        a_to_2: mirror.swapped(),
        quadrature_error: e1 + e2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::QuadMode;

    fn p0() -> MarketParams {
        MarketParams::reference()
    }

    #[test]
    fn pinned_symmetric_revenue() {
        let p = p0();
        let c = solve_symmetric_coeffs(&p, QuadMode::Matched).unwrap();
        let sol = SymSolution::new(p, c, Operator::One, 1.0, 0.5).unwrap();
        let r = symmetric_phase_revenue(&sol, Operator::One);
        assert!((r - (-0.5f64).exp() * 6.388_888_9 * 0.5 / 0.5).abs() < 1e-5);
        assert!((r - 3.875057).abs() < 1e-5);
        assert_eq!(r, symmetric_phase_revenue(&sol, Operator::Two));
    }

    #[test]
    fn analytic_matches_truncated_quadrature() {
        let p = p0();
        for mode in QuadMode::ALL {
            let c = solve_symmetric_coeffs(&p, mode).unwrap();
            let sol = SymSolution::new(p, c, Operator::One, 1.5, 0.64).unwrap();
            for op in [Operator::One, Operator::Two] {
                let exact = symmetric_phase_revenue(&sol, op);
                let brute =
                    symmetric_phase_revenue_truncated(&sol, op, 1e-12, &Tolerance::with_rel(1e-12)).unwrap();
                assert!((exact - brute.value).abs() < 1e-8, "{exact} vs {}", brute.value);
            }
        }
    }

    #[test]
    fn zero_horizon_asymmetric_revenue_is_zero() {
        let (sol, _) = solve_asymmetric(&p0(), Operator::One, 0.5, 0.0, &SolverOptions::default()).unwrap();
        let r = asymmetric_phase_revenue(&sol, Operator::One, &Tolerance::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn symmetric_start_gives_mirror_aggregates() {
        let rep = aggregate_revenues(&p0(), 0.5, 1.5, &SolverOptions::default()).unwrap();
        let [r1a, r2b] = rep.total_a_to_1();
        let [r1b, r2a] = rep.total_a_to_2();
        assert!((r1a - r2a).abs() < 1e-10 * r1a);
        assert!((r1b - r2b).abs() < 1e-10 * r1b);
        assert!(revenue_gain(&rep).unwrap() > 1.0);
    }

    #[test]
    fn role_swap_matches_explicit_orientation() {
        let opts = SolverOptions::default();
        let rep = aggregate_revenues(&p0(), 0.6, 1.5, &opts).unwrap();
        let (explicit, _) = orientation_revenues(&p0(), Operator::Two, 0.6, 1.5, &opts).unwrap();
        for i in 0..2 {
            assert!((rep.a_to_2.asymmetric[i] - explicit.asymmetric[i]).abs() < 1e-9);
            assert!((rep.a_to_2.symmetric[i] - explicit.symmetric[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_is_an_involution_and_mirrors_initial_share() {
        let opts = SolverOptions::default();
        let rep = aggregate_revenues(&p0(), 0.6, 1.0, &opts).unwrap();
        assert_eq!(rep.swap_roles().swap_roles(), rep);
        let mirror = aggregate_revenues(&p0(), 0.4, 1.0, &opts).unwrap();
        let s = rep.swap_roles();
        for i in 0..2 {
            assert!((s.total_a_to_1()[i] - mirror.total_a_to_1()[i]).abs() < 1e-9);
            assert!((s.total_a_to_2()[i] - mirror.total_a_to_2()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn gain_is_one_without_asymmetry() {
        let p = p0().with_eta(0.0).unwrap();
        for t_end in [0.5, 2.0] {
            let rep = aggregate_revenues(&p, 0.5, t_end, &SolverOptions::default()).unwrap();
            assert!((revenue_gain(&rep).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn revenues_are_nonnegative() {
        let rep = aggregate_revenues(&p0(), 0.6, 2.0, &SolverOptions::default()).unwrap();
        for o in [rep.a_to_1, rep.a_to_2] {
            assert!(o.asymmetric.iter().chain(&o.symmetric).all(|&r| r >= 0.0));
        }
    }

    #[test]
    fn grid_doubling_is_stable() {
        let coarse = SolverOptions::default();
        let fine = SolverOptions {
            grid: 2 * coarse.grid - 1,
            ..coarse
        };
        let a = aggregate_revenues(&p0(), 0.5, 1.5, &coarse).unwrap();
        let b = aggregate_revenues(&p0(), 0.5, 1.5, &fine).unwrap();
        for i in 0..2 {
            let (x, y) = (a.a_to_1.asymmetric[i], b.a_to_1.asymmetric[i]);
            assert!((x - y).abs() < 1e-7 * x.abs());
        }
    }

    #[test]
    fn heavier_discounting_of_the_same_path_lowers_revenue() {
        let (sol, _) = solve_asymmetric(&p0(), Operator::One, 0.5, 1.5, &SolverOptions::default()).unwrap();
        let tol = Tolerance::default();
        let mut last = f64::INFINITY;
        for rho in [0.25, 0.5, 1.0, 2.0] {
            let r = discounted_revenue(&sol, Operator::One, rho, 0.0, 1.5, &tol).unwrap().value;
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn zero_denominator() {
        let rep = RevenueReport {
            a_to_1: OrientationRevenues {
                asymmetric: [1.0, 0.0],
                symmetric: [1.0, 0.0],
            },
            a_to_2: OrientationRevenues {
                asymmetric: [0.0, 0.0],
                symmetric: [0.0, 0.0],
            },
            quadrature_error: 0.0,
        };
        assert!(matches!(revenue_gain(&rep), Err(Error::ZeroDenominator(_))));
    }
}
