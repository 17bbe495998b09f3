//! Closed-loop Nash pricing in a two-operator market where one operator holds
//! a contiguous spectrum block, plus discounted revenues and the spiteful
//! first-price auction that allocates the blocks.
//!
//! The pipeline is
//! [`asym::solve_asymmetric`] → [`sym::solve_symmetric`] →
//! [`revenue::aggregate_revenues`] → [`auction::run_auction`], with
//! [`oracle`] as an independent discrete-time check of the closed forms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asym;
pub mod auction;
pub mod equilibrium;
pub mod error;
pub mod mode;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod revenue;
pub mod scenario;
pub mod sym;

pub use asym::{solve_asymmetric, AsymCoefficients, AsymSolution, SolverOptions};
pub use auction::{equilibrium_bids, run_auction, AuctionInputs, AuctionOutcome};
pub use equilibrium::{FeedbackEquilibrium, PhaseTrajectory, ValidityAction};
pub use error::{Error, Result};
pub use mode::QuadMode;
pub use model::{MarketParams, MarketState, Operator, Phase, PhaseKind};
pub use revenue::{aggregate_revenues, revenue_gain, RevenueReport};
pub use sym::{solve_symmetric, SymCoefficients, SymSolution};
pub use scenario::{run_scenario, ScenarioConfig};
