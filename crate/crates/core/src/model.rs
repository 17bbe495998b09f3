//! Economic primitives of the duopoly: utilities, the uniform net-switching-cost
//! law, switching flows and the market-share rate equation of both phases.
//!
//! Everything is expressed through operator 1's share `x1`; operator 2's share
//! is always `1 - x1` (full market coverage).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Bound, Error, Result};

/// Immutable economic primitives.
///
/// `s1 = s_lo + s_hi` and `s2 = s_hi - s_lo` are recomputed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct MarketParams {
    u0: f64,
    eta: f64,
    rho: f64,
    s_lo: f64,
    s_hi: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    u0: f64,
    eta: f64,
    rho: f64,
    s_lo: f64,
    s_hi: f64,
}

impl TryFrom<RawParams> for MarketParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        MarketParams::new(r.u0, r.eta, r.rho, r.s_lo, r.s_hi)
    }
}

impl From<MarketParams> for RawParams {
    fn from(p: MarketParams) -> Self {
        RawParams {
            u0: p.u0,
            eta: p.eta,
            rho: p.rho,
            s_lo: p.s_lo,
            s_hi: p.s_hi,
        }
    }
}

impl MarketParams {
    /// Validates `u0 > 0`, `eta` in `[0, 1)`, `rho > 0` and `0 < s_lo <= s_hi`.
    ///
    /// `eta = 0` is accepted as the degenerate no-asymmetry case.
    pub fn new(u0: f64, eta: f64, rho: f64, s_lo: f64, s_hi: f64) -> Result<Self> {
        let finite = |v: f64, f: &'static str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(f, "must be finite"))
            }
        };
        finite(u0, "u0")?;
        finite(eta, "eta")?;
        finite(rho, "rho")?;
        finite(s_lo, "s_lo")?;
        finite(s_hi, "s_hi")?;
        if u0 <= 0.0 {
            return Err(invalid("u0", format!("must be positive, got {u0}")));
        }
        if !(0.0..1.0).contains(&eta) {
            return Err(invalid("eta", format!("must lie in [0, 1), got {eta}")));
        }
        if rho <= 0.0 {
            return Err(invalid("rho", format!("must be positive, got {rho}")));
        }
        if s_lo <= 0.0 {
            return Err(invalid("s_lo", format!("must be positive, got {s_lo}")));
        }
        if s_hi < s_lo {
            return Err(invalid(
                "s_hi",
                format!("must be at least s_lo = {s_lo}, got {s_hi}"),
            ));
        }
        Ok(MarketParams {
            u0,
            eta,
            rho,
            s_lo,
            s_hi,
        })
    }

    /// The parameter set used throughout the numerical study:
    /// `u0 = 10, eta = 0.5, rho = 0.5, s_lo = 5, s_hi = 10`.
    pub fn reference() -> Self {
        MarketParams {
            u0: 10.0,
            eta: 0.5,
            rho: 0.5,
            s_lo: 5.0,
            s_hi: 10.0,
        }
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn s_lo(&self) -> f64 {
        self.s_lo
    }
    pub fn s_hi(&self) -> f64 {
        self.s_hi
    }
    /// Width of the net-switching-cost support.
    pub fn s1(&self) -> f64 {
        self.s_lo + self.s_hi
    }
    pub fn s2(&self) -> f64 {
        self.s_hi - self.s_lo
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        Self::new(self.u0, eta, self.rho, self.s_lo, self.s_hi)
    }
    pub fn with_rho(self, rho: f64) -> Result<Self> {
        Self::new(self.u0, self.eta, rho, self.s_lo, self.s_hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    One,
    Two,
}

impl Operator {
    pub fn index(self) -> usize {
        match self {
            Operator::One => 0,
            Operator::Two => 1,
        }
    }
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
    pub fn other(self) -> Operator {
        match self {
            Operator::One => Operator::Two,
            Operator::Two => Operator::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// Before the B-holder can offer the double-speed service.
    Asymmetric,
    Symmetric,
}

/// Phase tag plus the holder of block A, fixed for a whole scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseKind {
    pub phase: Phase,
    pub advantaged: Operator,
}

impl PhaseKind {
    pub fn asymmetric(advantaged: Operator) -> Self {
        PhaseKind {
            phase: Phase::Asymmetric,
            advantaged,
        }
    }
    pub fn symmetric(advantaged: Operator) -> Self {
        PhaseKind {
            phase: Phase::Symmetric,
            advantaged,
        }
    }

    /// Utility difference `u1 - u2` seen by switching users.
    pub fn utility_edge(&self, params: &MarketParams) -> f64 {
        match (self.phase, self.advantaged) {
            (Phase::Symmetric, _) => 0.0,
            (Phase::Asymmetric, Operator::One) => params.eta * params.u0,
            (Phase::Asymmetric, Operator::Two) => -params.eta * params.u0,
        }
    }

    /// Upper ends of the strategy spaces `[0, max]` for operators 1 and 2.
    pub fn price_caps(&self, params: &MarketParams) -> [f64; 2] {
        let boosted = (1.0 + params.eta) * params.u0;
        match (self.phase, self.advantaged) {
            (Phase::Symmetric, _) => [boosted, boosted],
            (Phase::Asymmetric, Operator::One) => [boosted, params.u0],
            (Phase::Asymmetric, Operator::Two) => [params.u0, boosted],
        }
    }
}

/// Market state; operator 2's share is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    x1: f64,
}

impl MarketState {
    pub fn new(x1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x1) {
            return Err(invalid("x1", format!("must lie in [0, 1], got {x1}")));
        }
        Ok(MarketState { x1 })
    }
    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn x2(&self) -> f64 {
        1.0 - self.x1
    }
}

/// Switching masses per unit time: `q21` from operator 2 to 1, `q12` the reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingMasses {
    pub q21: f64,
    pub q12: f64,
}

/// Open price-gap interval `(lo, hi)` for `p1 - p2` on which both switching
/// masses stay strictly inside `(0, 1)`.
pub fn validity_interval(params: &MarketParams, kind: PhaseKind) -> (f64, f64) {
    let edge = kind.utility_edge(params);
    (edge - params.s_lo, edge + params.s_lo)
}

pub fn check_price_gap(params: &MarketParams, kind: PhaseKind, gap: f64) -> Result<()> {
    let (lo, hi) = validity_interval(params, kind);
    let bound = if gap <= lo {
        Bound::Lower
    } else if gap >= hi {
        Bound::Upper
    } else {
        return Ok(());
    };
    Err(Error::PriceGapOutOfRange { gap, lo, hi, bound })
}

/// Fractions of each customer base switching per unit time at price gap `dp = p1 - p2`.
pub fn switching_masses(params: &MarketParams, kind: PhaseKind, dp: f64) -> Result<SwitchingMasses> {
    check_price_gap(params, kind, dp)?;
    let edge = kind.utility_edge(params);
    let s1 = params.s1();
    Ok(SwitchingMasses {
        q21: (edge - dp + params.s_lo) / s1,
        q12: (-edge + dp + params.s_lo) / s1,
    })
}

/// `dx1/dt` without the validity check; the closed-form solvers and oracles use
/// this on paths whose interiority is recorded separately.
pub fn share_rate_unchecked(params: &MarketParams, kind: PhaseKind, x1: f64, p1: f64, p2: f64) -> f64 {
    let s1 = params.s1();
    (kind.utility_edge(params) - p1 + p2 + params.s_lo) / s1 - 2.0 * params.s_lo / s1 * x1
}

/// Rate of change of operator 1's share; operator 2's rate is its negation.
pub fn share_rate(params: &MarketParams, kind: PhaseKind, state: MarketState, p1: f64, p2: f64) -> Result<f64> {
    check_price_gap(params, kind, p1 - p2)?;
    Ok(share_rate_unchecked(params, kind, state.x1(), p1, p2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(eta: f64) -> MarketParams {
        MarketParams::new(10.0, eta, 0.5, 5.0, 10.0).unwrap()
    }
    const ASYM: PhaseKind = PhaseKind {
        phase: Phase::Asymmetric,
        advantaged: Operator::One,
    };
    const SYM: PhaseKind = PhaseKind {
        phase: Phase::Symmetric,
        advantaged: Operator::One,
    };

    #[test]
    fn derived_scales() {
        let m = p(0.5);
        assert_eq!(m.s1(), 15.0);
        assert_eq!(m.s2(), 5.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(MarketParams::new(10.0, 0.5, 0.5, 10.0, 5.0).is_err());
        assert!(MarketParams::new(10.0, 1.0, 0.5, 5.0, 10.0).is_err());
        assert!(MarketParams::new(10.0, 0.5, 0.0, 5.0, 10.0).is_err());
        assert!(MarketParams::new(0.0, 0.5, 0.5, 5.0, 10.0).is_err());
        assert!(MarketParams::new(10.0, 0.5, 0.5, 0.0, 10.0).is_err());
        assert!(MarketState::new(1.5).is_err());
    }

    #[test]
    fn switching_at_symmetry_point() {
        let q = switching_masses(&p(0.5), ASYM, 5.0).unwrap();
        assert_relative_eq!(q.q21, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(q.q12, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn boundary_gap_is_rejected() {
        match switching_masses(&p(0.5), ASYM, 0.0) {
            Err(Error::PriceGapOutOfRange { bound, lo, .. }) => {
                assert_eq!(bound, Bound::Lower);
                assert_eq!(lo, 0.0);
            }
            other => panic!("expected lower-bound violation, got {other:?}"),
        }
        assert!(matches!(
            switching_masses(&p(0.5), ASYM, 10.0),
            Err(Error::PriceGapOutOfRange { bound: Bound::Upper, .. })
        ));
    }

    #[test]
    fn symmetric_switching() {
        let q = switching_masses(&p(0.5), SYM, 1.0).unwrap();
        assert_relative_eq!(q.q21, 4.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(q.q12, 6.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(q.q21 + q.q12, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn share_rate_examples() {
        let m = p(0.5);
        let half = MarketState::new(0.5).unwrap();
        // equal prices sit on the lower edge of the open asymmetric interval
        assert!(share_rate(&m, ASYM, half, 7.0, 7.0).is_err());
        assert_relative_eq!(share_rate_unchecked(&m, ASYM, 0.5, 7.0, 7.0), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(share_rate(&m, SYM, half, 7.0, 7.0).unwrap(), 0.0);
        let dp = 4.0;
        let x = (m.eta() * m.u0() - dp + m.s_lo()) / (2.0 * m.s_lo());
        let r = share_rate(&m, ASYM, MarketState::new(x).unwrap(), 8.0, 4.0).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn intervals() {
        assert_eq!(validity_interval(&p(0.5), ASYM), (0.0, 10.0));
        assert_eq!(validity_interval(&p(0.5), SYM), (-5.0, 5.0));
        assert_eq!(validity_interval(&p(0.0), ASYM), validity_interval(&p(0.0), SYM));
        let two = PhaseKind::asymmetric(Operator::Two);
        assert_eq!(validity_interval(&p(0.5), two), (-10.0, 0.0));
    }

    #[test]
    fn params_roundtrip_through_serde_validation() {
        let bad = RawParams {
            u0: 1.0,
            eta: 0.5,
            rho: 0.5,
            s_lo: 3.0,
            s_hi: 1.0,
        };
        assert!(MarketParams::try_from(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = MarketParams> {
            (0.1f64..50.0, 0.0f64..0.99, 0.01f64..2.0, 0.1f64..20.0, 0.0f64..30.0)
                .prop_map(|(u0, eta, rho, lo, extra)| MarketParams::new(u0, eta, rho, lo, lo + extra).unwrap())
        }

        proptest! {
            #[test]
            fn masses_in_unit_interval(m in params(), frac in 0.001f64..0.999, sym in any::<bool>()) {
                let kind = if sym { SYM } else { ASYM };
                let (lo, hi) = validity_interval(&m, kind);
                let dp = lo + frac * (hi - lo);
                let q = switching_masses(&m, kind, dp).unwrap();
                prop_assert!(q.q21 > 0.0 && q.q21 < 1.0);
                prop_assert!(q.q12 > 0.0 && q.q12 < 1.0);
                prop_assert!((q.q21 + q.q12 - 2.0 * m.s_lo() / m.s1()).abs() < 1e-12);
            }

            #[test]
            fn share_rate_slopes(m in params(), x in 0.0f64..1.0, p2 in 0.0f64..10.0) {
                let kind = SYM;
                let p1 = p2 + 0.1 * m.s_lo();
                let r = share_rate_unchecked(&m, kind, x, p1, p2);
                // conservation: operator 2's rate is the negation
                let r2 = -share_rate_unchecked(&m, kind, x, p1, p2);
                prop_assert_eq!(r + r2, 0.0);
                let dx = share_rate_unchecked(&m, kind, x + 1e-3, p1, p2) - r;
                prop_assert!((dx / 1e-3 + 2.0 * m.s_lo() / m.s1()).abs() < 1e-8);
                let dp = share_rate_unchecked(&m, kind, x, p1 + 1e-3, p2) - r;
                prop_assert!((dp / 1e-3 + 1.0 / m.s1()).abs() < 1e-8);
            }

            #[test]
            fn asymmetric_interval_is_shifted_symmetric(m in params()) {
                let (a0, a1) = validity_interval(&m, ASYM);
                let (s0, s1) = validity_interval(&m, SYM);
                let shift = m.eta() * m.u0();
                prop_assert!((a0 - shift - s0).abs() < 1e-12 && (a1 - shift - s1).abs() < 1e-12);
            }
        }
    }
}
