//! Finite-horizon closed-loop equilibrium of the asymmetric phase `[0, T]`.
//!
//! The costates are affine in the share, `lambda_i = k(t) x1 + e_i(t)`, with
//! `e2 = e1 - z`. `k` and its integral are closed form; `z` (when it has a
//! state-feedback forcing term), `e1` and the share path are computed by
//! exact backward/forward recursions over a uniform panel grid with one
//! Gauss-Kronrod rule per panel (partial panel for off-node queries).

use serde::{Deserialize, Serialize};

use crate::equilibrium::{uniform_grid, FeedbackEquilibrium, PhaseTrajectory, ValidityAction};
use crate::error::{invalid, Error, Result};
use crate::mode::{QuadMode, Riccati};
use crate::model::{MarketParams, Operator, PhaseKind};
use crate::quad::{gauss_kronrod, Tolerance};

/// Knobs shared by both phase solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Number of trajectory samples per phase (at least 64).
    pub grid: usize,
    pub mode: QuadMode,
    pub tolerance: Tolerance,
    pub validity: ValidityAction,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grid: 201,
            mode: QuadMode::default(),
            tolerance: Tolerance::default(),
            validity: ValidityAction::default(),
        }
    }
}

impl SolverOptions {
    pub const MIN_GRID: usize = 64;

    pub fn with_mode(mode: QuadMode) -> Self {
        SolverOptions {
            mode,
            ..SolverOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < Self::MIN_GRID {
            return Err(invalid(
                "grid",
                format!("at least {} samples required, got {}", Self::MIN_GRID, self.grid),
            ));
        }
        if !(self.tolerance.rel > 0.0) || !(self.tolerance.abs >= 0.0) {
            return Err(invalid("tolerance", "rel must be positive and abs nonnegative"));
        }
        Ok(())
    }
}

const MAX_REFINEMENTS: usize = 12;
const PANEL_STIFFNESS: f64 = 0.5;

/// Time-varying coefficients of the asymmetric phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymCoefficients {
    params: MarketParams,
    kind: PhaseKind,
    mode: QuadMode,
    horizon: f64,
    riccati: Riccati,
    alpha1: f64,
    alpha2: f64,
    h: f64,
    nodes: Vec<f64>,
    z_nodes: Vec<f64>,
    e1_nodes: Vec<f64>,
    quadrature_error: f64,
}

impl AsymCoefficients {
    pub fn new(
        params: MarketParams,
        advantaged: Operator,
        horizon: f64,
        mode: QuadMode,
        tol: &Tolerance,
        min_panels: usize,
    ) -> Result<Self> {
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(invalid("T", format!("must be finite and nonnegative, got {horizon}")));
        }
        let riccati = mode.riccati(&params);
        let (alpha1, alpha2) = riccati.roots()?;
        let mut c = AsymCoefficients {
            params,
            kind: PhaseKind::asymmetric(advantaged),
            mode,
            horizon,
            riccati,
            alpha1,
            alpha2,
            h: 0.0,
            nodes: vec![0.0],
            z_nodes: vec![0.0],
            e1_nodes: vec![0.0],
            quadrature_error: 0.0,
        };
        if horizon == 0.0 {
            return Ok(c);
        }
        let stiff = (horizon * c.max_rate() / PANEL_STIFFNESS).ceil() as usize;
        let mut panels = min_panels.max(stiff).max(1);
        let mut last = (f64::INFINITY, 0.0);
        for _ in 0..=MAX_REFINEMENTS {
            c.build(panels);
            let scale = c
                .e1_nodes
                .iter()
                .chain(&c.z_nodes)
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let requested = tol.abs.max(tol.rel * scale);
            if c.quadrature_error <= requested {
                return Ok(c);
            }
            last = (requested, c.quadrature_error);
            panels *= 2;
        }
        Err(Error::Quadrature {
            requested: last.0,
            achieved: last.1,
        })
    }

    fn max_rate(&self) -> f64 {
        let p = &self.params;
        let s1 = p.s1();
        let (m, _, _) = self.mode.offset_weights();
        let beta = self.riccati.a * (self.alpha2 - self.alpha1);
        let mu = p.rho() + (13.0 * p.s_lo() + 5.0 * p.s_hi() + m * self.alpha1) / (9.0 * s1);
        let delta = 2.0 * (p.s_hi() + 2.0 * p.s_lo() + self.alpha1) / (3.0 * s1);
        beta.max(1.0 + p.rho()).max(mu).max(delta)
    }

    fn build(&mut self, panels: usize) {
        let t_end = self.horizon;
        self.h = t_end / panels as f64;
        self.nodes = uniform_grid(0.0, t_end, panels + 1);
        self.z_nodes = vec![0.0; panels + 1];
        self.e1_nodes = vec![0.0; panels + 1];
        let mut err = 0.0;
        for j in (0..panels).rev() {
            let t = self.nodes[j];
            let (z, ez) = self.z_step(j, t);
            self.z_nodes[j] = z;
            let (e1, ee) = self.e1_step(j, t);
            self.e1_nodes[j] = e1;
            err += ez + ee;
        }
        self.quadrature_error = err;
    }

    fn panel(&self, t: f64) -> usize {
        let n = self.nodes.len() - 1;
        if n == 0 || self.h == 0.0 {
            return 0;
        }
        ((t / self.h).floor().max(0.0) as usize).min(n - 1)
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }
    pub fn kind(&self) -> PhaseKind {
        self.kind
    }
    pub fn mode(&self) -> QuadMode {
        self.mode
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    /// Roots `(alpha1, alpha2)` of the Riccati quadratic, smaller first.
    pub fn alphas(&self) -> (f64, f64) {
        (self.alpha1, self.alpha2)
    }
    pub fn riccati(&self) -> Riccati {
        self.riccati
    }
    /// Summed panel error estimate of the cached `z` and `e1` recursions.
    pub fn quadrature_error(&self) -> f64 {
        self.quadrature_error
    }
    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    fn check(&self, t: f64) -> Result<()> {
        if (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange {
                t,
                lo: 0.0,
                hi: self.horizon,
            })
        }
    }

    pub fn k_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.k(t))
    }
    pub fn z_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.z(t))
    }
    pub fn e1_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.e1(t))
    }
    pub fn e2_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.e1(t) - self.z(t))
    }
    pub fn mu_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.mu(t))
    }
    pub fn nu_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.nu(t, self.z(t)))
    }
    pub fn delta_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.delta(t))
    }
    pub fn zeta_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.zeta(t))
    }

    /// `(e1, e2)` sampled on `grid`.
    pub fn costate_offsets(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter()
            .map(|&t| {
                self.check(t)?;
                let e1 = self.e1(t);
                Ok((e1, e1 - self.z(t)))
            })
            .collect()
    }

    pub(crate) fn k(&self, t: f64) -> f64 {
        if self.alpha1 == 0.0 {
            return 0.0;
        }
        let s = (self.horizon - t).max(0.0);
        let beta = self.riccati.a * (self.alpha2 - self.alpha1);
        let e = (-beta * s).exp();
        let r = self.alpha1 / self.alpha2;
        self.alpha1 * (1.0 - e) / (1.0 - r * e)
    }

    /// `int_{T-s}^{T} k`.
    fn tail_k(&self, s: f64) -> f64 {
        if self.alpha1 == 0.0 || s <= 0.0 {
            return 0.0;
        }
        let beta = self.riccati.a * (self.alpha2 - self.alpha1);
        let r = self.alpha1 / self.alpha2;
        let log_ratio = (-r * (-beta * s).exp()).ln_1p() - (-r).ln_1p();
        self.alpha1 * (s - (1.0 - r) / (beta * r) * log_ratio)
    }

    /// `int_a^b k`.
    pub fn integral_k(&self, a: f64, b: f64) -> f64 {
        self.tail_k(self.horizon - a) - self.tail_k(self.horizon - b)
    }

    fn forcing_z(&self, t: f64) -> f64 {
        let (_, _, l) = self.mode.offset_weights();
        (2.0 * self.params.s2() + l * self.k(t)) / 3.0
    }

    fn z_step(&self, j: usize, t: f64) -> (f64, f64) {
        let (_, _, l) = self.mode.offset_weights();
        let g = 1.0 + self.params.rho();
        if l == 0.0 {
            return (self.z_closed(t), 0.0);
        }
        let right = self.nodes[j + 1];
        let est = gauss_kronrod(|tau| (-g * (tau - t)).exp() * self.forcing_z(tau), t, right);
        ((-g * (right - t)).exp() * self.z_nodes[j + 1] + est.value, est.error)
    }

    fn z_closed(&self, t: f64) -> f64 {
        let g = 1.0 + self.params.rho();
        2.0 * self.params.s2() / (3.0 * g) * (1.0 - (g * (t - self.horizon)).exp())
    }

    pub(crate) fn z(&self, t: f64) -> f64 {
        if t >= self.horizon {
            return 0.0;
        }
        let j = self.panel(t);
        self.z_step(j, t).0
    }

    fn mu_base(&self) -> f64 {
        let p = &self.params;
        p.rho() + (13.0 * p.s_lo() + 5.0 * p.s_hi()) / (9.0 * p.s1())
    }

    pub(crate) fn mu(&self, t: f64) -> f64 {
        let (m, _, _) = self.mode.offset_weights();
        self.mu_base() - m * self.k(t) / (9.0 * self.params.s1())
    }

    fn int_mu(&self, a: f64, b: f64) -> f64 {
        let (m, _, _) = self.mode.offset_weights();
        self.mu_base() * (b - a) - m / (9.0 * self.params.s1()) * self.integral_k(a, b)
    }

    fn w(&self) -> f64 {
        self.kind.utility_edge(&self.params) + 2.0 * self.params.s_lo() + self.params.s_hi()
    }

    pub(crate) fn nu(&self, t: f64, z: f64) -> f64 {
        let (_, n, _) = self.mode.offset_weights();
        let p = &self.params;
        (2.0 * p.s2() + n * self.k(t)) * (z - self.w()) / (9.0 * p.s1())
    }

    fn e1_step(&self, j: usize, t: f64) -> (f64, f64) {
        let right = self.nodes[j + 1];
        let est = gauss_kronrod(
            |tau| (-self.int_mu(t, tau)).exp() * self.nu(tau, self.z(tau)),
            t,
            right,
        );
        (
            (-self.int_mu(t, right)).exp() * self.e1_nodes[j + 1] - est.value,
            est.error,
        )
    }

    pub(crate) fn e1(&self, t: f64) -> f64 {
        if t >= self.horizon {
            return 0.0;
        }
        let j = self.panel(t);
        self.e1_step(j, t).0
    }

    pub(crate) fn delta(&self, t: f64) -> f64 {
        let p = &self.params;
        2.0 * (self.k(t) - p.s_hi() - 2.0 * p.s_lo()) / (3.0 * p.s1())
    }

    fn int_delta(&self, a: f64, b: f64) -> f64 {
        let p = &self.params;
        2.0 * (self.integral_k(a, b) - (p.s_hi() + 2.0 * p.s_lo()) * (b - a)) / (3.0 * p.s1())
    }

    pub(crate) fn zeta(&self, t: f64) -> f64 {
        let e1 = self.e1(t);
        let e2 = e1 - self.z(t);
        (self.w() + e1 + e2) / (3.0 * self.params.s1())
    }

    /// Share at `t` from the share at node `j`.
    fn x_step(&self, j: usize, xj: f64, t: f64) -> (f64, f64) {
        let left = self.nodes[j];
        if t <= left {
            return (xj, 0.0);
        }
        let est = gauss_kronrod(|tau| self.int_delta(tau, t).exp() * self.zeta(tau), left, t);
        (self.int_delta(left, t).exp() * xj + est.value, est.error)
    }
}

/// Solved asymmetric phase: coefficients plus the share path from `x1_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymSolution {
    coeffs: AsymCoefficients,
    x1_0: f64,
    x_nodes: Vec<f64>,
    share_error: f64,
}

impl AsymSolution {
    pub fn new(coeffs: AsymCoefficients, x1_0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x1_0) {
            return Err(invalid("x1_0", format!("must lie in [0, 1], got {x1_0}")));
        }
        let n = coeffs.nodes.len();
        let mut x_nodes = Vec::with_capacity(n);
        x_nodes.push(x1_0);
        let mut err = 0.0;
        for j in 0..n - 1 {
            let (x, e) = coeffs.x_step(j, x_nodes[j], coeffs.nodes[j + 1]);
            x_nodes.push(x);
            err += e;
        }
        Ok(AsymSolution {
            coeffs,
            x1_0,
            x_nodes,
            share_error: err,
        })
    }

    pub fn coefficients(&self) -> &AsymCoefficients {
        &self.coeffs
    }
    pub fn x1_0(&self) -> f64 {
        self.x1_0
    }
    /// Share handed to the symmetric phase.
    pub fn x1_terminal(&self) -> f64 {
        *self.x_nodes.last().expect("at least one node")
    }
    pub fn share_error(&self) -> f64 {
        self.share_error
    }

    pub fn share_at(&self, t: f64) -> Result<f64> {
        self.coeffs.check(t)?;
        Ok(self.share(t))
    }
}

impl FeedbackEquilibrium for AsymSolution {
    fn params(&self) -> &MarketParams {
        &self.coeffs.params
    }
    fn kind(&self) -> PhaseKind {
        self.coeffs.kind
    }
    fn window(&self) -> (f64, Option<f64>) {
        (0.0, Some(self.coeffs.horizon))
    }
    fn k(&self, t: f64) -> f64 {
        self.coeffs.k(t)
    }
    fn offsets(&self, t: f64) -> (f64, f64) {
        let e1 = self.coeffs.e1(t);
        (e1, e1 - self.coeffs.z(t))
    }
    fn share(&self, t: f64) -> f64 {
        if self.coeffs.horizon == 0.0 {
            return self.x1_0;
        }
        if t >= self.coeffs.horizon {
            return self.x1_terminal();
        }
        let j = self.coeffs.panel(t);
        self.coeffs.x_step(j, self.x_nodes[j], t).0
    }
}

/// Solves the asymmetric phase on `[0, horizon]` and samples it on
/// `opts.grid` uniform points (including both ends). A zero horizon yields an
/// empty trajectory and hands `x1_0` straight through.
pub fn solve_asymmetric(
    params: &MarketParams,
    advantaged: Operator,
    x1_0: f64,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<(AsymSolution, PhaseTrajectory)> {
    opts.validate()?;
    let coeffs = AsymCoefficients::new(
        *params,
        advantaged,
        horizon,
        opts.mode,
        &opts.tolerance,
        opts.grid - 1,
    )?;
    let sol = AsymSolution::new(coeffs, x1_0)?;
    let traj = if horizon == 0.0 {
        PhaseTrajectory::empty(sol.kind())
    } else {
        sol.sample(&uniform_grid(0.0, horizon, opts.grid), opts.validity)?
    };
    Ok((sol, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::share_rate_unchecked;
    use crate::quad::integrate;

    fn p0() -> MarketParams {
        MarketParams::reference()
    }

    fn coeffs(mode: QuadMode, t_end: f64) -> AsymCoefficients {
        AsymCoefficients::new(p0(), Operator::One, t_end, mode, &Tolerance::default(), 200).unwrap()
    }

    fn solve(mode: QuadMode, x0: f64, t_end: f64) -> (AsymSolution, PhaseTrajectory) {
        solve_asymmetric(&p0(), Operator::One, x0, t_end, &SolverOptions::with_mode(mode)).unwrap()
    }

    #[test]
    fn transversality_at_horizon() {
        for mode in QuadMode::ALL {
            let c = coeffs(mode, 1.5);
            assert_eq!(c.k_at(1.5).unwrap(), 0.0);
            assert_eq!(c.z_at(1.5).unwrap(), 0.0);
            assert_eq!(c.e1_at(1.5).unwrap(), 0.0);
            assert_eq!(c.e2_at(1.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn k_is_positive_nonincreasing_and_below_alpha1() {
        for mode in QuadMode::ALL {
            let c = coeffs(mode, 1.5);
            let (a1, _) = c.alphas();
            let ks: Vec<f64> = uniform_grid(0.0, 1.5, 300).iter().map(|&t| c.k(t)).collect();
            assert!(ks[0] > 0.0 && ks[0] < a1);
            assert!(ks.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn k_solves_riccati() {
        let c = coeffs(QuadMode::Feedback, 1.5);
        let r = c.riccati();
        for &t in &[0.1, 0.7, 1.3] {
            let h = 1e-5;
            let dk = (c.k(t + h) - c.k(t - h)) / (2.0 * h);
            assert!((dk - r.rhs(c.k(t))).abs() < 1e-8);
        }
    }

    #[test]
    fn long_horizon_k_tends_to_alpha1() {
        let c = coeffs(QuadMode::Matched, 200.0);
        assert!((c.k_at(0.0).unwrap() - 0.16583).abs() < 1e-5);
        assert!((c.k_at(0.0).unwrap() - c.alphas().0).abs() < 1e-6);
    }

    #[test]
    fn integral_of_k_matches_quadrature() {
        let c = coeffs(QuadMode::Feedback, 1.5);
        let q = integrate(|t| c.k(t), 0.2, 1.4, &Tolerance::with_rel(1e-12)).unwrap();
        assert!((c.integral_k(0.2, 1.4) - q.value).abs() < 1e-12);
    }

    #[test]
    fn z_closed_form_example() {
        let c = coeffs(QuadMode::Matched, 1.5);
        let z0 = c.z_at(0.0).unwrap();
        assert!((z0 - 10.0 / 4.5 * (1.0 - (-2.25f64).exp())).abs() < 1e-12);
        assert!((z0 - 1.98800).abs() < 1e-5);
        let h = 1e-5;
        let t = 0.6;
        let dz = (c.z(t + h) - c.z(t - h)) / (2.0 * h);
        assert!((dz - 1.5 * c.z(t) + 10.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn feedback_z_solves_its_ode() {
        let c = coeffs(QuadMode::Feedback, 1.5);
        let h = 1e-5;
        for &t in &[0.05, 0.6, 1.45] {
            let dz = (c.z(t + h) - c.z(t - h)) / (2.0 * h);
            assert!((dz - 1.5 * c.z(t) + (10.0 + c.k(t)) / 3.0).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn e1_solves_its_ode() {
        for mode in QuadMode::ALL {
            let c = coeffs(mode, 1.5);
            let h = 1e-5;
            for &t in &[0.013, 0.5, 0.999, 1.4] {
                let de = (c.e1(t + h) - c.e1(t - h)) / (2.0 * h);
                let res = de - c.mu(t) * c.e1(t) - c.nu(t, c.z(t));
                assert!(res.abs() < 1e-6, "{mode} t = {t}: {res}");
            }
        }
    }

    #[test]
    fn matched_e1_residual_in_printed_form() {
        let c = coeffs(QuadMode::Matched, 1.5);
        let p = p0();
        let h = 1e-5;
        for &t in &uniform_grid(0.05, 1.45, 15) {
            let de = (c.e1(t + h) - c.e1(t - h)) / (2.0 * h);
            let res = de - c.mu(t) * c.e1(t)
                + (2.0 * p.s2() + 3.0 * c.k(t)) * (p.s1() + p.s_lo() + p.eta() * p.u0() - c.z(t))
                    / (9.0 * p.s1());
            assert!(res.abs() < 1e-6);
        }
    }

    #[test]
    fn terminal_prices() {
        for mode in QuadMode::ALL {
            let (sol, _) = solve(mode, 0.5, 1.5);
            let (p1, p2) = sol.prices(1.5, 0.5);
            assert!((p1 - 55.0 / 6.0).abs() < 1e-12);
            assert!((p2 - 35.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn price_gap_identity() {
        let (sol, traj) = solve(QuadMode::Feedback, 0.5, 1.5);
        let p = p0();
        for i in 0..traj.len() {
            let t = traj.times[i];
            let (e1, e2) = sol.offsets(t);
            let expect = (2.0 * p.eta() * p.u0() - p.s2() - e1 - e2) / 3.0
                + 2.0 * (p.s2() - sol.k(t)) / 3.0 * traj.x1[i];
            assert!((traj.p1[i] - traj.p2[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn share_path_solves_state_equation() {
        for mode in QuadMode::ALL {
            let (sol, _) = solve(mode, 0.5, 1.5);
            let p = p0();
            let kind = sol.kind();
            // classical RK4 on the closed-loop state equation
            let f = |t: f64, x: f64| {
                let (p1, p2) = sol.prices(t, x);
                share_rate_unchecked(&p, kind, x, p1, p2)
            };
            let n = 600;
            let h = 1.5 / n as f64;
            let mut x = 0.5;
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let t = i as f64 * h;
                let k1 = f(t, x);
                let k2 = f(t + h / 2.0, x + h / 2.0 * k1);
                let k3 = f(t + h / 2.0, x + h / 2.0 * k2);
                let k4 = f(t + h, x + h * k3);
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                worst = worst.max((x - sol.share(t + h)).abs());
            }
            assert!(worst < 1e-9, "{mode}: {worst}");
        }
    }

    #[test]
    fn zero_eta_symmetric_start_stays_put() {
        let p = p0().with_eta(0.0).unwrap();
        for mode in [QuadMode::Matched, QuadMode::Feedback] {
            let (sol, traj) =
                solve_asymmetric(&p, Operator::One, 0.5, 1.5, &SolverOptions::with_mode(mode)).unwrap();
            assert!(traj.x1.iter().all(|x| (x - 0.5).abs() < 1e-12), "{mode}");
            assert!((sol.x1_terminal() - 0.5).abs() < 1e-12);
        }
        // the printed constant breaks k + e1 + e2 = 0 and with it the symmetry
        let (sol, _) =
            solve_asymmetric(&p, Operator::One, 0.5, 1.5, &SolverOptions::with_mode(QuadMode::AsPrinted)).unwrap();
        assert!((sol.x1_terminal() - 0.5).abs() > 1e-3);
    }

    #[test]
    fn shares_rise_for_advantaged_operator() {
        for t_end in [0.5, 1.5] {
            let (_, traj) = solve(QuadMode::Feedback, 0.5, t_end);
            assert!(traj.x1.windows(2).all(|w| w[1] > w[0]));
            assert!(traj.p1.windows(2).all(|w| w[1] >= w[0]));
            assert!(traj.all_valid(), "{:?}", traj.issues.first());
        }
    }

    #[test]
    fn zero_horizon_is_empty() {
        let (sol, traj) = solve(QuadMode::Feedback, 0.37, 0.0);
        assert!(traj.is_empty());
        assert_eq!(sol.x1_terminal(), 0.37);
    }

    #[test]
    fn time_outside_horizon_is_rejected() {
        let c = coeffs(QuadMode::Feedback, 1.0);
        assert!(matches!(c.k_at(1.5), Err(Error::TimeOutOfRange { .. })));
        assert!(c.e1_at(-0.1).is_err());
    }

    #[test]
    fn role_swap_matches_explicit_orientation() {
        let opts = SolverOptions::default();
        let (a, _) = solve_asymmetric(&p0(), Operator::Two, 0.6, 1.5, &opts).unwrap();
        let (b, _) = solve_asymmetric(&p0(), Operator::One, 0.4, 1.5, &opts).unwrap();
        for &t in &[0.0, 0.4, 1.1, 1.5] {
            assert!((a.share(t) - (1.0 - b.share(t))).abs() < 1e-12);
            let (pa1, pa2) = a.prices(t, a.share(t));
            let (pb1, pb2) = b.prices(t, b.share(t));
            assert!((pa1 - pb2).abs() < 1e-10 && (pa2 - pb1).abs() < 1e-10);
        }
    }

    #[test]
    fn small_grid_rejected() {
        let opts = SolverOptions {
            grid: 10,
            ..SolverOptions::default()
        };
        assert!(solve_asymmetric(&p0(), Operator::One, 0.5, 1.0, &opts).is_err());
    }

    #[test]
    fn refinement_is_stable() {
        let a = AsymCoefficients::new(p0(), Operator::One, 1.5, QuadMode::Feedback, &Tolerance::default(), 64)
            .unwrap();
        let b = AsymCoefficients::new(p0(), Operator::One, 1.5, QuadMode::Feedback, &Tolerance::default(), 1024)
            .unwrap();
        for &t in &[0.0, 0.33, 1.2] {
            assert!((a.e1(t) - b.e1(t)).abs() < 1e-12);
            assert!((a.z(t) - b.z(t)).abs() < 1e-12);
        }
    }
}
