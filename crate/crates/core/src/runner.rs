//! Uniform entry point over all solvers, with per-run seeds.

use crate::baselines::{exhaustive_solve, greedy_run, plain_ts_run, vns_run, VnsParams};
use crate::error::{invalid, Result};
use crate::instance::Instance;
use crate::tabu::{its_run, SearchParams, SearchResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Its,
    Ts,
    Vns,
    Greedy,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Its,
        Algorithm::Ts,
        Algorithm::Vns,
        Algorithm::Greedy,
        Algorithm::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Its => "its",
            Algorithm::Ts => "ts",
            Algorithm::Vns => "vns",
            Algorithm::Greedy => "greedy",
            Algorithm::Exact => "exact",
        }
    }

    /// Whether repeated runs can differ.
    pub fn is_randomized(self) -> bool {
        !matches!(self, Algorithm::Greedy | Algorithm::Exact)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid("algorithm", format!("unknown algorithm {s:?} (its, ts, vns, greedy, exact)")))
    }
}

/// Seed of the `run`-th run (0-based) under base seed `base`.
pub fn run_seed(base: u64, run: usize) -> u64 {
    base.wrapping_add(run as u64)
}

/// One run of `alg` with `params.seed` as its seed.
pub fn solve(inst: &Instance, alg: Algorithm, params: &SearchParams) -> Result<SearchResult> {
    match alg {
        Algorithm::Its => its_run(inst, params),
        Algorithm::Ts => plain_ts_run(inst, params),
        Algorithm::Vns => vns_run(inst, &VnsParams::from(params)),
        Algorithm::Greedy => greedy_run(inst),
        Algorithm::Exact => {
            let (plan, cost) = exhaustive_solve(inst)?;
            Ok(SearchResult {
                plan,
                cost,
                curve: Vec::new(),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub result: SearchResult,
    pub elapsed: Duration,
}

/// `runs` independent runs with seeds `run_seed(params.seed, k)`, executed on
/// the current rayon pool and returned in run order.
pub fn solve_runs(inst: &Instance, alg: Algorithm, params: &SearchParams, runs: usize) -> Result<Vec<RunOutcome>> {
    (0..runs)
        .into_par_iter()
        .map(|k| {
            let seed = run_seed(params.seed, k);
            let p = SearchParams { seed, ..*params };
            let start = Instant::now();
            let result = solve(inst, alg, &p)?;
            Ok(RunOutcome {
                run: k + 1,
                seed,
                result,
                elapsed: start.elapsed(),
            })
        })
        .collect()
}
