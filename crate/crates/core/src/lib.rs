//! Stochastic multi-trip routing for hospital delivery robots.
//!
//! Travel and service times are normal random variables; arrival times are
//! propagated along each AMR's trips as Gaussians and the daily cost combines
//! fleet size, expected time-window violations and expected travel time.
//! Plans are built greedily and improved with an adaptive tabu search.

pub mod baselines;
pub mod error;
pub mod gaussian;
pub mod greedy;
pub mod instance;
pub mod montecarlo;
pub mod neighborhood;
pub mod plan;
pub mod report;
pub mod runner;
pub mod schedule;
pub mod solomon;
pub mod tabu;

pub use baselines::{exhaustive_solve, plain_ts_run, vns_run};
pub use error::{Error, Result};
pub use gaussian::Gaussian;
pub use greedy::greedy_insert;
pub use instance::{Instance, Period};
pub use montecarlo::{simulate_plan, McReport};
pub use neighborhood::{Move, Operator};
pub use plan::{Amr, Plan};
pub use runner::{solve, solve_runs, Algorithm};
pub use schedule::{evaluate, propagate, CostBreakdown, Schedule};
pub use tabu::{its_run, SearchParams, SearchResult};
