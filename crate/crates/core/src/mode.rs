//! Coefficient schemes for the affine costate ansatz `lambda_i = k x1 + e_i`.
//!
//! Three schemes are supported:
//!
//! * [`QuadMode::Feedback`] (default) keeps the full opponent-feedback term
//!   `dH_i/dp_j * dp_j/dx1` with `dp_j/dx1` the slope of the opponent's affine
//!   price rule. This is the scheme the discrete-time backward-induction oracle
//!   converges to.
//! * [`QuadMode::Matched`] drops the costate part of that slope (uses `-s2/3`),
//!   giving the Riccati `6k^2 - (11 s_hi + 25 s_lo + 9 rho s1) k + 2 s2^2 = 0`
//!   in both phases.
//! * [`QuadMode::AsPrinted`] is `Matched` with the finite-horizon constant
//!   term `2 s2 / 9` instead of `2 s2^2 / (9 s1)`; its infinite-horizon phase is
//!   identical to `Matched`.
//!
//! See `docs/errata.md` for the numbers behind the choice of default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MarketParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadMode {
    #[serde(rename = "printed")]
    AsPrinted,
    Matched,
    #[default]
    Feedback,
}

impl QuadMode {
    pub const ALL: [QuadMode; 3] = [QuadMode::AsPrinted, QuadMode::Matched, QuadMode::Feedback];

    pub fn name(self) -> &'static str {
        match self {
            QuadMode::AsPrinted => "printed",
            QuadMode::Matched => "matched",
            QuadMode::Feedback => "feedback",
        }
    }

    /// Riccati right-hand side `k' = -a k^2 + b k - c` on the finite horizon.
    pub fn riccati(self, p: &MarketParams) -> Riccati {
        let s1 = p.s1();
        let s2 = p.s2();
        match self {
            QuadMode::Feedback => Riccati {
                a: 8.0 / (9.0 * s1),
                b: (10.0 * p.s_hi() + 26.0 * p.s_lo() + 9.0 * p.rho() * s1) / (9.0 * s1),
                c: 2.0 * s2 * s2 / (9.0 * s1),
            },
            QuadMode::Matched => Riccati {
                a: 2.0 / (3.0 * s1),
                b: (11.0 * p.s_hi() + 25.0 * p.s_lo() + 9.0 * p.rho() * s1) / (9.0 * s1),
                c: 2.0 * s2 * s2 / (9.0 * s1),
            },
            QuadMode::AsPrinted => Riccati {
                c: 2.0 * s2 / 9.0,
                ..QuadMode::Matched.riccati(p)
            },
        }
    }

    /// Quadratic whose smallest root is the infinite-horizon `k`.
    pub fn steady_riccati(self, p: &MarketParams) -> Riccati {
        match self {
            QuadMode::Feedback => QuadMode::Feedback.riccati(p),
            QuadMode::Matched | QuadMode::AsPrinted => QuadMode::Matched.riccati(p),
        }
    }

    /// Multipliers `(m, n, l)` in
    /// `mu = rho + (13 s_lo + 5 s_hi - m k) / (9 s1)`,
    /// `nu = (2 s2 + n k)(z - W) / (9 s1)` and `z' = (1 + rho) z - (2 s2 + l k) / 3`.
    pub(crate) fn offset_weights(self) -> (f64, f64, f64) {
        match self {
            QuadMode::Feedback => (8.0, 4.0, 1.0),
            QuadMode::Matched | QuadMode::AsPrinted => (6.0, 3.0, 0.0),
        }
    }
}

impl std::str::FromStr for QuadMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" | "as-printed" => Ok(QuadMode::AsPrinted),
            "matched" => Ok(QuadMode::Matched),
            "feedback" => Ok(QuadMode::Feedback),
            other => Err(Error::Config {
                path: "quad_mode".into(),
                reason: format!("unknown mode `{other}` (expected printed|matched|feedback)"),
            }),
        }
    }
}

impl std::fmt::Display for QuadMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `k' = -a k^2 + b k - c`; the stationary points solve `a k^2 - b k + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Riccati {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Riccati {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// Both real roots, smaller first.
    pub fn roots(&self) -> Result<(f64, f64)> {
        let d = self.discriminant();
        if !(d > 0.0) || self.a <= 0.0 || self.b <= 0.0 {
            return Err(Error::DegenerateParameters(format!(
                "Riccati quadratic {}k^2 - {}k + {} has no two distinct real roots (discriminant {d})",
                self.a, self.b, self.c
            )));
        }
        let q = self.b + d.sqrt();
        // stable forms: the small root via the product of roots
        Ok((2.0 * self.c / q, q / (2.0 * self.a)))
    }

    /// Residual of the stationary quadratic, relative to its largest term.
    pub fn relative_residual(&self, k: f64) -> f64 {
        let scale = (self.a * k * k).abs().max((self.b * k).abs()).max(self.c.abs());
        let r = self.a * k * k - self.b * k + self.c;
        if scale == 0.0 {
            r.abs()
        } else {
            r.abs() / scale
        }
    }

    pub fn rhs(&self, k: f64) -> f64 {
        -self.a * k * k + self.b * k - self.c
    }
}

/// Roots `(alpha1, alpha2)` of the finite-horizon Riccati quadratic.
pub fn riccati_roots(params: &MarketParams, mode: QuadMode) -> Result<(f64, f64)> {
    mode.riccati(params).roots()
}
