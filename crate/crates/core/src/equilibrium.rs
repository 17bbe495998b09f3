//! Common view of a solved phase: affine feedback prices, costates and the
//! equilibrium share path, plus sampling into a [`PhaseTrajectory`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_price_gap, share_rate_unchecked, MarketParams, PhaseKind};

/// What to do when a sampled equilibrium leaves the validity region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityAction {
    Error,
    #[default]
    WarnAndRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityIssue {
    pub t: f64,
    pub message: String,
}

/// Sampled equilibrium path of one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub phase: PhaseKind,
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub x1: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    /// `true` where the price gap is inside the open validity interval and both
    /// prices are inside their strategy spaces.
    pub validity_flags: Vec<bool>,
    pub issues: Vec<ValidityIssue>,
}

impl PhaseTrajectory {
    pub fn empty(phase: PhaseKind) -> Self {
        PhaseTrajectory {
            phase,
            times: Vec::new(),
            p1: Vec::new(),
            p2: Vec::new(),
            x1: Vec::new(),
            lambda1: Vec::new(),
            lambda2: Vec::new(),
            validity_flags: Vec::new(),
            issues: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn all_valid(&self) -> bool {
        self.validity_flags.iter().all(|&v| v)
    }

    pub fn x2(&self) -> impl Iterator<Item = f64> + '_ {
        self.x1.iter().map(|x| 1.0 - x)
    }
}

/// A solved phase of the pricing game in feedback form.
pub trait FeedbackEquilibrium {
    fn params(&self) -> &MarketParams;
    fn kind(&self) -> PhaseKind;
    /// Start of the phase and, for the finite phase, its end.
    fn window(&self) -> (f64, Option<f64>);
    /// State coefficient of the costate ansatz.
    fn k(&self, t: f64) -> f64;
    /// Constant terms `(e1, e2)` of the costate ansatz.
    fn offsets(&self, t: f64) -> (f64, f64);
    /// Equilibrium share of operator 1.
    fn share(&self, t: f64) -> f64;

    /// Affine feedback prices at state `x1`.
    fn prices(&self, t: f64, x1: f64) -> (f64, f64) {
        let p = self.params();
        let edge = self.kind().utility_edge(p);
        let (e1, e2) = self.offsets(t);
        let slope = (p.s2() - self.k(t)) / 3.0;
        let s1 = p.s1();
        (
            (edge + s1 + p.s_lo() - 2.0 * e1 + e2) / 3.0 + slope * x1,
            (-edge + s1 + p.s_hi() - e1 + 2.0 * e2) / 3.0 - slope * x1,
        )
    }

    /// `(dp1/dx1, dp2/dx1)` of the feedback rules.
    fn price_slopes(&self, t: f64) -> (f64, f64) {
        let m = (self.params().s2() - self.k(t)) / 3.0;
        (m, -m)
    }

    fn costates(&self, t: f64, x1: f64) -> (f64, f64) {
        let k = self.k(t);
        let (e1, e2) = self.offsets(t);
        (k * x1 + e1, k * x1 + e2)
    }

    /// `dx1/dt` along the equilibrium path.
    fn share_rate(&self, t: f64) -> f64 {
        let x = self.share(t);
        let (p1, p2) = self.prices(t, x);
        share_rate_unchecked(self.params(), self.kind(), x, p1, p2)
    }

    /// Evaluates the path on `times`, recording (or failing on) validity
    /// violations according to `action`.
    fn sample(&self, times: &[f64], action: ValidityAction) -> Result<PhaseTrajectory> {
        let params = *self.params();
        let kind = self.kind();
        let caps = kind.price_caps(&params);
        let mut out = PhaseTrajectory::empty(kind);
        for &t in times {
            let x = self.share(t);
            let (p1, p2) = self.prices(t, x);
            let (l1, l2) = self.costates(t, x);
            let mut problems: Vec<Error> = Vec::new();
            if let Err(e) = check_price_gap(&params, kind, p1 - p2) {
                problems.push(e);
            }
            for (i, (&price, &cap)) in [p1, p2].iter().zip(caps.iter()).enumerate() {
                if !(0.0..=cap).contains(&price) {
                    problems.push(Error::PriceOutOfStrategySpace {
                        operator: i as u8 + 1,
                        t,
                        price,
                        max: cap,
                    });
                }
            }
            if let Some(first) = problems.first() {
                if action == ValidityAction::Error {
                    return Err(first.clone());
                }
            }
            out.validity_flags.push(problems.is_empty());
            out.issues.extend(problems.into_iter().map(|e| ValidityIssue {
                t,
                message: e.to_string(),
            }));
            out.times.push(t);
            out.p1.push(p1);
            out.p2.push(p2);
            out.x1.push(x);
            out.lambda1.push(l1);
            out.lambda2.push(l2);
        }
        Ok(out)
    }
}

/// `n` evenly spaced points covering `[a, b]` inclusive.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = uniform_grid(0.0, 1.5, 64);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[63], 1.5);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(uniform_grid(0.0, 1.0, 0).is_empty());
    }
}
