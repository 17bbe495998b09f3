//! First-price sealed-bid auction for block A between spiteful operators.
//! The loser takes block B at its reserve price and pays the extra
//! investment needed to aggregate it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::Operator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuctionInputs {
    pub r1_a: f64,
    pub r2_a: f64,
    pub r1_b: f64,
    pub r2_b: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub c_bs: f64,
    pub gamma: f64,
}

impl AuctionInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(r1_a: f64, r2_a: f64, r1_b: f64, r2_b: f64, c_a: f64, c_b: f64, c_bs: f64, gamma: f64) -> Result<Self> {
        let inputs = AuctionInputs {
            r1_a,
            r2_a,
            r1_b,
            r2_b,
            c_a,
            c_b,
            c_bs,
            gamma,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    /// Builds inputs from the B-holder's net profits `pi_i = r_i_b - c_b - c_bs`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_net(r1_a: f64, r2_a: f64, pi1_b: f64, pi2_b: f64, c_a: f64, c_b: f64, c_bs: f64, gamma: f64) -> Result<Self> {
        Self::new(r1_a, r2_a, pi1_b + c_b + c_bs, pi2_b + c_b + c_bs, c_a, c_b, c_bs, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r1_a", self.r1_a),
            ("r2_a", self.r2_a),
            ("r1_b", self.r1_b),
            ("r2_b", self.r2_b),
            ("c_a", self.c_a),
            ("c_b", self.c_b),
            ("c_bs", self.c_bs),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and nonnegative, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", format!("must lie in [0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        let out = AuctionInputs { gamma, ..self };
        out.validate()?;
        Ok(out)
    }

    pub fn revenue_a(&self, op: Operator) -> f64 {
        match op {
            Operator::One => self.r1_a,
            Operator::Two => self.r2_a,
        }
    }

    pub fn revenue_b(&self, op: Operator) -> f64 {
        match op {
            Operator::One => self.r1_b,
            Operator::Two => self.r2_b,
        }
    }

    /// Net profit from holding B.
    pub fn net_b(&self, op: Operator) -> f64 {
        self.revenue_b(op) - self.c_b - self.c_bs
    }

    /// Net value of winning A over settling for B, ignoring the bid.
    pub fn advantage(&self, op: Operator) -> f64 {
        self.revenue_a(op) - self.net_b(op)
    }

    /// Expected spiteful payoff of bidding `b` against a rival bid uniform on
    /// `[c_a, R_rival^A]`, for `b` in that interval.
    pub fn expected_payoff(&self, bidder: Operator, b: f64) -> f64 {
        let g = self.gamma;
        let rival = bidder.other();
        let (ri, rj) = (self.revenue_a(bidder), self.revenue_a(rival));
        let (pi, pj) = (self.net_b(bidder), self.net_b(rival));
        let win = ((1.0 - g) * (ri - b) - g * pj) * (b - self.c_a);
        let lose = (1.0 - g) * pi * (rj - b) - g * (rj - b) * (rj - b) / 2.0;
        (win + lose) / (rj - self.c_a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bids {
    pub b1: f64,
    pub b2: f64,
    /// Whether the formula fell below the reserve and the bid was raised to it.
    pub floored: [bool; 2],
}

impl Bids {
    pub fn get(&self, op: Operator) -> f64 {
        match op {
            Operator::One => self.b1,
            Operator::Two => self.b2,
        }
    }
}

/// Closed-form equilibrium bid of one operator, before the reserve floor.
pub fn raw_bid(inputs: &AuctionInputs, bidder: Operator) -> f64 {
    let g = inputs.gamma;
    let own = inputs.advantage(bidder);
    let rival = inputs.advantage(bidder.other());
    ((1.0 - g) * own + g * rival + (1.0 - g) * inputs.c_a) / (2.0 - g)
}

pub fn equilibrium_bids(inputs: &AuctionInputs) -> Bids {
    let floor = |b: f64| if b < inputs.c_a { (inputs.c_a, true) } else { (b, false) };
    let (b1, f1) = floor(raw_bid(inputs, Operator::One));
    let (b2, f2) = floor(raw_bid(inputs, Operator::Two));
    Bids {
        b1,
        b2,
        floored: [f1, f2],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// No tie; the higher bid won.
    None,
    /// Equal bids; A went to the larger `R^A - pi^B`.
    LargerAdvantage,
    /// Equal bids and equal advantages; A went to operator 1.
    OperatorOne,
}

impl TieRule {
    pub fn description(self) -> &'static str {
        match self {
            TieRule::None => "none",
            TieRule::LargerAdvantage => "equal bids: A to the larger R^A - pi^B",
            TieRule::OperatorOne => "equal bids and advantages: A to operator 1",
        }
    }
}

/// Winner of block A for a bid pair, with the rule that decided it.
pub fn winner(inputs: &AuctionInputs, b1: f64, b2: f64) -> (Operator, TieRule) {
    if b1 > b2 {
        return (Operator::One, TieRule::None);
    }
    if b2 > b1 {
        return (Operator::Two, TieRule::None);
    }
    let (a1, a2) = (inputs.advantage(Operator::One), inputs.advantage(Operator::Two));
    if a1 > a2 {
        (Operator::One, TieRule::LargerAdvantage)
    } else if a2 > a1 {
        (Operator::Two, TieRule::LargerAdvantage)
    } else {
        (Operator::One, TieRule::OperatorOne)
    }
}

/// Realized (non-spiteful) profits for a bid pair.
pub fn realized_profits(inputs: &AuctionInputs, b1: f64, b2: f64) -> [f64; 2] {
    let (w, _) = winner(inputs, b1, b2);
    let bid = if w == Operator::One { b1 } else { b2 };
    let mut out = [0.0; 2];
    out[w.index()] = inputs.revenue_a(w) - bid;
    out[w.other().index()] = inputs.net_b(w.other());
    out
}

/// Spiteful objectives `(1 - gamma) own - gamma rival` for a bid pair.
pub fn spiteful_payoff(inputs: &AuctionInputs, b1: f64, b2: f64) -> (f64, f64) {
    let g = inputs.gamma;
    let [r1, r2] = realized_profits(inputs, b1, b2);
    ((1.0 - g) * r1 - g * r2, (1.0 - g) * r2 - g * r1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub b1_star: f64,
    pub b2_star: f64,
    pub floored: [bool; 2],
    pub winner: Operator,
    pub realized_profit_1: f64,
    pub realized_profit_2: f64,
    pub tie: bool,
    pub tie_rule_applied: TieRule,
}

pub fn run_auction(inputs: &AuctionInputs) -> AuctionOutcome {
    let bids = equilibrium_bids(inputs);
    let (w, rule) = winner(inputs, bids.b1, bids.b2);
    let [r1, r2] = realized_profits(inputs, bids.b1, bids.b2);
    AuctionOutcome {
        b1_star: bids.b1,
        b2_star: bids.b2,
        floored: bids.floored,
        winner: w,
        realized_profit_1: r1,
        realized_profit_2: r2,
        tie: rule != TieRule::None,
        tie_rule_applied: rule,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(gamma: f64) -> AuctionInputs {
        AuctionInputs::from_net(100.0, 90.0, 40.0, 30.0, 0.1, 0.2, 1.0, gamma).unwrap()
    }

    #[test]
    fn bid_examples() {
        let b = equilibrium_bids(&inputs(0.0));
        assert!((b.b1 - 30.05).abs() < 1e-12);
        let b = equilibrium_bids(&inputs(1.0));
        assert!((b.b1 - 60.0).abs() < 1e-12);
        assert!((b.b2 - 60.0).abs() < 1e-12);
    }

    #[test]
    fn crossover_is_exact() {
        for i in [inputs(0.5), uneven(0.5)] {
            let b = equilibrium_bids(&i);
            assert_eq!(b.b1, b.b2);
        }
    }

    fn uneven(gamma: f64) -> AuctionInputs {
        AuctionInputs::from_net(100.0, 85.0, 40.0, 30.0, 0.1, 0.2, 1.0, gamma).unwrap()
    }

    #[test]
    fn tie_goes_to_larger_advantage() {
        let o = run_auction(&uneven(0.5));
        assert!(o.tie);
        assert_eq!(o.winner, Operator::One);
        assert_eq!(o.tie_rule_applied, TieRule::LargerAdvantage);
        assert!((o.realized_profit_1 - (100.0 - o.b1_star)).abs() < 1e-12);
        assert!((o.realized_profit_2 - 30.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_inputs_fall_back_to_operator_one() {
        let i = AuctionInputs::from_net(80.0, 80.0, 35.0, 35.0, 0.1, 0.2, 1.0, 0.0).unwrap();
        let o = run_auction(&i);
        assert_eq!(o.b1_star, o.b2_star);
        assert_eq!(o.winner, Operator::One);
        assert_eq!(o.tie_rule_applied, TieRule::OperatorOne);
    }

    #[test]
    fn higher_bid_wins_and_pays() {
        let i = uneven(0.2);
        let o = run_auction(&i);
        assert!(o.b1_star > o.b2_star);
        assert_eq!(o.winner, Operator::One);
        assert!(!o.tie);
        assert!((o.realized_profit_1 - (i.r1_a - o.b1_star)).abs() < 1e-12);
        assert!((o.realized_profit_2 - (i.r2_b - i.c_b - i.c_bs)).abs() < 1e-12);
    }

    #[test]
    fn reserve_floor_is_flagged() {
        let i = AuctionInputs::from_net(10.0, 10.0, 9.95, 9.95, 5.0, 0.2, 1.0, 0.0).unwrap();
        let b = equilibrium_bids(&i);
        assert_eq!(b.b1, 5.0);
        assert_eq!(b.floored, [true, true]);
    }

    #[test]
    fn payoff_special_cases() {
        let i = inputs(0.0);
        let (p1, p2) = spiteful_payoff(&i, 40.0, 20.0);
        assert_eq!((p1, p2), (60.0, 30.0));
        let i = inputs(1.0);
        let (p1, p2) = spiteful_payoff(&i, 40.0, 20.0);
        assert_eq!((p1, p2), (-30.0, -60.0));
    }

    #[test]
    fn payoff_is_piecewise_linear_in_own_bid() {
        let i = inputs(0.3);
        let f = |b: f64| spiteful_payoff(&i, b, 50.0).0;
        let slope_lo = (f(30.0) - f(20.0)) / 10.0;
        let slope_hi = (f(80.0) - f(70.0)) / 10.0;
        assert!((f(40.0) - f(30.0) - 10.0 * slope_lo).abs() < 1e-12);
        assert!((f(70.0) - f(60.0) - 10.0 * slope_hi).abs() < 1e-12);
        assert!(slope_lo.abs() < 1e-12);
        assert!((slope_hi + 0.7).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(AuctionInputs::new(1.0, 1.0, 1.0, 1.0, 0.1, 0.2, 1.0, 1.5).is_err());
        assert!(AuctionInputs::new(-1.0, 1.0, 1.0, 1.0, 0.1, 0.2, 1.0, 0.5).is_err());
        assert!(AuctionInputs::new(f64::NAN, 1.0, 1.0, 1.0, 0.1, 0.2, 1.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn crossover_holds_for_any_inputs(
            r1 in 1.0f64..200.0, r2 in 1.0f64..200.0, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0,
            ca in 0.0f64..1.0,
        ) {
            let i = AuctionInputs::new(r1, r2, f1 * r1 + 1.2, f2 * r2 + 1.2, ca, 0.2, 1.0, 0.5).unwrap();
            let b = equilibrium_bids(&i);
            prop_assert_eq!(b.b1, b.b2);
        }

        #[test]
        fn realized_profit_formulas_do_not_depend_on_gamma(g in 0.0f64..=1.0) {
            let i = inputs(g);
            let o = run_auction(&i);
            let (w, bid) = if o.winner == Operator::One { (Operator::One, o.b1_star) } else { (Operator::Two, o.b2_star) };
            let profits = [o.realized_profit_1, o.realized_profit_2];
            prop_assert!((profits[w.index()] - (i.revenue_a(w) - bid)).abs() < 1e-12);
            prop_assert!((profits[w.other().index()] - i.net_b(w.other())).abs() < 1e-12);
        }
    }
}
