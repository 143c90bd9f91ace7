//! Improved tabu search (I-TS).
//!
//! Each iteration picks one operator by roulette over adaptive weights, scans
//! its neighborhood of the current plan (every candidate repaired for
//! capacity) and moves:
//!
//! * to the neighborhood best if it beats the best plan so far, whether tabu
//!   or not (aspiration), rewarding the operator with `delta1`;
//! * otherwise to the best non-tabu neighbor, rewarding it with `delta2`.
//!
//! Tabu state is one symmetric request-pair matrix per operator. The roulette
//! only sees the accumulated weights every `update_period` iterations.

use crate::error::Result;
use crate::greedy::greedy_insert;
use crate::instance::Instance;
use crate::neighborhood::{
    apply_candidate, repair_depot_insertion, scan_pairs, Candidate, Guidance, Move, Operator,
    RELOCATION_VARIANTS,
};
use crate::plan::Plan;
use crate::schedule::{self, evaluate, AmrTrace, CostBreakdown};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Remaining tabu iterations for each request pair, per operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabuState {
    n: usize,
    tenure: u32,
    matrices: [Vec<u32>; 3],
}

impl TabuState {
    pub fn new(n: usize, tenure: u32) -> Self {
        TabuState {
            n,
            tenure,
            matrices: std::array::from_fn(|_| vec![0; n * n]),
        }
    }

    pub fn tenure(&self) -> u32 {
        self.tenure
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn idx(&self, a: usize, b: usize) -> usize {
        (a - 1) * self.n + (b - 1)
    }

    pub fn get(&self, op: Operator, a: usize, b: usize) -> u32 {
        self.matrices[op.index()][self.idx(a, b)]
    }

    pub fn is_tabu(&self, mv: &Move) -> bool {
        let (a, b) = mv.pair();
        self.get(mv.operator, a, b) != 0
    }

    fn set(&mut self, op: Operator, a: usize, b: usize, value: u32) {
        let (i, j) = (self.idx(a, b), self.idx(b, a));
        let m = &mut self.matrices[op.index()];
        m[i] = value;
        m[j] = value;
    }

    /// Decrements the nonzero entries of `op`'s matrix except the pair
    /// `keep`, restricted to row and column `row` when given.
    fn decrement(&mut self, op: Operator, keep: (usize, usize), row: Option<usize>) {
        let n = self.n;
        let m = &mut self.matrices[op.index()];
        let skip = |a: usize, b: usize| (a, b) == keep || (b, a) == keep;
        match row {
            Some(r) => {
                for k in 1..=n {
                    if k == r || skip(r, k) {
                        continue;
                    }
                    let (i, j) = ((r - 1) * n + (k - 1), (k - 1) * n + (r - 1));
                    if m[i] != 0 {
                        m[i] -= 1;
                        m[j] = m[i];
                    }
                }
            }
            None => {
                for a in 1..=n {
                    for b in 1..=n {
                        let i = (a - 1) * n + (b - 1);
                        if m[i] != 0 && !skip(a, b) {
                            m[i] -= 1;
                        }
                    }
                }
            }
        }
    }

    /// Whether every matrix is symmetric with entries in `[0, tenure]`.
    pub fn is_consistent(&self) -> bool {
        let n = self.n;
        self.matrices.iter().all(|m| {
            (0..n).all(|a| {
                (0..n).all(|b| m[a * n + b] == m[b * n + a] && m[a * n + b] <= self.tenure)
            })
        })
    }
}

/// Roulette weights with a reward scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorWeights {
    pub rho: [f64; 3],
    /// Weights the roulette currently draws from; refreshed periodically.
    pub wheel: [f64; 3],
    pub delta1: f64,
    pub delta2: f64,
    pub update_period: usize,
}

impl OperatorWeights {
    pub fn new(delta1: f64, delta2: f64, update_period: usize) -> Self {
        OperatorWeights {
            rho: [1.0; 3],
            wheel: [1.0; 3],
            delta1,
            delta2,
            update_period,
        }
    }

    /// Selection probabilities of the current wheel.
    pub fn probabilities(&self) -> [f64; 3] {
        let sum: f64 = self.wheel.iter().sum();
        self.wheel.map(|w| w / sum)
    }

    fn reward(&mut self, op: Operator, amount: f64) {
        self.rho[op.index()] += amount;
    }

    fn refresh(&mut self) {
        self.wheel = self.rho;
    }
}

/// Roulette-wheel draw: operator `i` with probability `weights[i] / Σ weights`.
pub fn select_operator<R: Rng + ?Sized>(weights: &[f64; 3], rng: &mut R) -> Operator {
    let wheel = WeightedIndex::new(weights).expect("operator weights are positive");
    Operator::ALL[wheel.sample(rng)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Every request pair of the chosen operator.
    Full,
    /// The guided operator's move plus random pairs, this many in total.
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecrementMode {
    /// After an improving move only entries sharing the move's first request
    /// count down.
    Verbatim,
    /// Every nonzero entry counts down after every move.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub tenure: u32,
    pub iterations: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub update_period: usize,
    pub violation_threshold: f64,
    pub seed: u64,
    pub scan: ScanMode,
    pub decrement: DecrementMode,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            tenure: 40,
            iterations: 500,
            delta1: 1.0,
            delta2: 0.2,
            update_period: 10,
            violation_threshold: 0.5,
            seed: 1,
            scan: ScanMode::Full,
            decrement: DecrementMode::Verbatim,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        use crate::error::invalid;
        if self.tenure < 1 {
            return Err(invalid("tenure", "must be at least 1"));
        }
        if !(self.delta1 > self.delta2 && self.delta2 >= 0.0) {
            return Err(invalid("delta", "need delta1 > delta2 >= 0"));
        }
        if self.update_period < 1 {
            return Err(invalid("update_period", "must be at least 1"));
        }
        if let ScanMode::Sampled(0) = self.scan {
            return Err(invalid("scan", "sample size must be positive"));
        }
        Ok(())
    }
}

/// Best-so-far total after an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub best_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub plan: Plan,
    pub cost: CostBreakdown,
    pub curve: Vec<CurvePoint>,
}

/// State visible to an observer after each iteration.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub operator: Operator,
    pub tabu: &'a TabuState,
    pub weights: &'a OperatorWeights,
    pub current: &'a Plan,
    pub current_cost: &'a CostBreakdown,
    pub best_cost: &'a CostBreakdown,
    /// Whether the accepted move improved on the best plan so far.
    pub improved: bool,
}

/// Runs I-TS from the greedy plan.
pub fn its_run(inst: &Instance, params: &SearchParams) -> Result<SearchResult> {
    its_run_observed(inst, params, |_| {})
}

pub fn its_run_observed(
    inst: &Instance,
    params: &SearchParams,
    observer: impl FnMut(&IterationView),
) -> Result<SearchResult> {
    let start = greedy_insert(inst)?;
    tabu_search(inst, params, start, true, observer)
}

/// The tabu loop from a given starting plan. With `adaptive` off the
/// operator is drawn uniformly throughout.
pub fn tabu_search(
    inst: &Instance,
    params: &SearchParams,
    start: Plan,
    adaptive: bool,
    mut observer: impl FnMut(&IterationView),
) -> Result<SearchResult> {
    params.validate()?;
    start.validate(inst.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let guidance = Guidance {
        violation_threshold: params.violation_threshold,
    };
    let mut tabu = TabuState::new(inst.len(), params.tenure);
    let mut weights = OperatorWeights::new(params.delta1, params.delta2, params.update_period);

    let mut current = repair_depot_insertion(&start, inst);
    let mut traces = schedule::traces(&current, inst);
    let mut current_cost = CostBreakdown::from_parts(inst, traces.iter().map(|t| &t.eval));
    let mut best = current.clone();
    let mut best_cost = current_cost;
    let mut curve = Vec::with_capacity(params.iterations);

    for iteration in 1..=params.iterations {
        let op = select_operator(&weights.wheel, &mut rng);
        let neighbors = neighborhood(&current, &traces, inst, op, params.scan, &guidance, &mut rng);

        let overall = first_min(neighbors.iter());
        let mut improved = false;
        let chosen = match overall {
            Some(nb) if nb.cost.total < best_cost.total => {
                improved = true;
                if adaptive {
                    weights.reward(op, weights.delta1);
                }
                let (a, b) = nb.mv.pair();
                let entry = tabu.get(op, a, b);
                tabu.set(op, a, b, if entry == 0 { params.tenure } else { 0 });
                let row = match params.decrement {
                    DecrementMode::Verbatim => Some(a),
                    DecrementMode::Uniform => None,
                };
                tabu.decrement(op, (a, b), row);
                Some(nb)
            }
            Some(_) => match first_min(neighbors.iter().filter(|nb| !tabu.is_tabu(&nb.mv))) {
                Some(nb) => {
                    if adaptive {
                        weights.reward(op, weights.delta2);
                    }
                    let (a, b) = nb.mv.pair();
                    tabu.set(op, a, b, params.tenure);
                    tabu.decrement(op, (a, b), None);
                    Some(nb)
                }
                // Everything is tabu: take the least-cost move, no reward.
                None => overall,
            },
            None => None,
        };

        if let Some(nb) = chosen {
            current = nb.materialize(&current, inst);
            traces = schedule::traces(&current, inst);
            current_cost = CostBreakdown::from_parts(inst, traces.iter().map(|t| &t.eval));
            debug_assert_eq!(current_cost, nb.cost);
            if improved {
                best = current.clone();
                best_cost = current_cost;
            }
        }
        if iteration % params.update_period == 0 {
            weights.refresh();
        }
        curve.push(CurvePoint {
            iteration,
            best_total: best_cost.total,
        });
        observer(&IterationView {
            iteration,
            operator: op,
            tabu: &tabu,
            weights: &weights,
            current: &current,
            current_cost: &current_cost,
            best_cost: &best_cost,
            improved,
        });
    }

    Ok(SearchResult {
        plan: best,
        cost: best_cost,
        curve,
    })
}

enum Source {
    Scanned(Candidate),
    Built(Plan),
}

pub(crate) struct Neighbor {
    pub mv: Move,
    pub cost: CostBreakdown,
    source: Source,
}

impl Neighbor {
    pub(crate) fn materialize(&self, current: &Plan, inst: &Instance) -> Plan {
        match &self.source {
            Source::Scanned(c) => apply_candidate(current, inst, c),
            Source::Built(p) => p.clone(),
        }
    }
}

/// Lowest total, first one on ties.
fn first_min<'a>(it: impl Iterator<Item = &'a Neighbor>) -> Option<&'a Neighbor> {
    it.fold(None, |best: Option<&Neighbor>, nb| match best {
        Some(b) if b.cost.total <= nb.cost.total => Some(b),
        _ => Some(nb),
    })
}

pub(crate) fn neighborhood<R: Rng + ?Sized>(
    current: &Plan,
    traces: &[AmrTrace],
    inst: &Instance,
    op: Operator,
    scan: ScanMode,
    guidance: &Guidance,
    rng: &mut R,
) -> Vec<Neighbor> {
    match scan {
        ScanMode::Full => scan_pairs(current, traces, inst, op)
            .into_iter()
            .map(|c| Neighbor {
                mv: c.mv,
                cost: c.cost,
                source: Source::Scanned(c),
            })
            .collect(),
        ScanMode::Sampled(k) => sampled(current, inst, op, k, guidance, rng),
    }
}

fn sampled<R: Rng + ?Sized>(
    current: &Plan,
    inst: &Instance,
    op: Operator,
    k: usize,
    guidance: &Guidance,
    rng: &mut R,
) -> Vec<Neighbor> {
    let n = inst.len();
    let mut out: Vec<Neighbor> = Vec::with_capacity(k);
    if n < 2 {
        return out;
    }
    if let (plan, Some(mv)) = guidance.apply(op, current, inst, rng) {
        let plan = repair_depot_insertion(&plan, inst);
        if plan != *current {
            out.push(Neighbor {
                mv,
                cost: evaluate(&plan, inst),
                source: Source::Built(plan),
            });
        }
    }
    let slots = current.locate(n);
    let variants = if op == Operator::Relocation { RELOCATION_VARIANTS.len() } else { 1 };
    for _ in 0..k.saturating_sub(out.len()) {
        let a = rng.random_range(1..=n);
        let mut b = rng.random_range(1..n);
        if b >= a {
            b += 1;
        }
        let mv = Move::new(op, a, b);
        let variant = rng.random_range(0..variants) as u8;
        if out.iter().any(|nb| nb.mv == mv) {
            continue;
        }
        if let Some(edit) = crate::neighborhood::candidate_edit(current, &slots, inst, mv, variant) {
            let plan = edit.apply(current);
            out.push(Neighbor {
                mv,
                cost: evaluate(&plan, inst),
                source: Source::Built(plan),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::toy;

    fn small() -> Instance {
        toy(
            &[
                (10.0, 5.0, 2, 30.0, 50.0, 100.0, 30.0),
                (0.0, 20.0, 4, 40.0, 0.0, 150.0, 30.0),
                (30.0, 20.0, 1, 50.0, 300.0, 400.0, 30.0),
                (5.0, 25.0, 3, 60.0, 0.0, 900.0, 30.0),
                (20.0, 10.0, 2, 20.0, 100.0, 250.0, 30.0),
                (15.0, 30.0, 5, 10.0, 500.0, 700.0, 30.0),
            ],
            100.0,
            true,
        )
    }

    #[test]
    fn roulette_starts_uniform() {
        let w = OperatorWeights::new(1.0, 0.2, 10);
        for p in w.probabilities() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn roulette_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000;
        let hits = (0..draws)
            .filter(|_| select_operator(&[3.0, 1.0, 1.0], &mut rng) == Operator::Swap)
            .count();
        assert!((hits as f64 / draws as f64 - 0.6).abs() < 0.01);
    }

    #[test]
    fn tabu_set_is_symmetric_and_decrements() {
        let mut t = TabuState::new(4, 3);
        t.set(Operator::Swap, 1, 2, 3);
        t.set(Operator::Swap, 1, 3, 2);
        t.set(Operator::Swap, 2, 4, 2);
        t.decrement(Operator::Swap, (1, 2), Some(1));
        assert_eq!(t.get(Operator::Swap, 1, 2), 3);
        assert_eq!(t.get(Operator::Swap, 3, 1), 1);
        assert_eq!(t.get(Operator::Swap, 4, 2), 2);
        t.decrement(Operator::Swap, (1, 3), None);
        assert_eq!(t.get(Operator::Swap, 2, 1), 2);
        assert_eq!(t.get(Operator::Swap, 1, 3), 1);
        assert_eq!(t.get(Operator::Swap, 2, 4), 1);
        assert!(t.is_consistent());
        assert_eq!(t.get(Operator::TwoOpt, 1, 2), 0);
    }

    #[test]
    fn single_iteration_is_best_of_start_and_neighbor() {
        let inst = small();
        let params = SearchParams {
            iterations: 1,
            ..SearchParams::default()
        };
        let res = its_run(&inst, &params).unwrap();
        let greedy = evaluate(&greedy_insert(&inst).unwrap(), &inst);
        assert!(res.cost.total <= greedy.total);
        assert_eq!(res.curve.len(), 1);
        assert_eq!(res.curve[0].best_total, res.cost.total);
        assert_eq!(evaluate(&res.plan, &inst), res.cost);
    }

    #[test]
    fn runs_are_reproducible_and_curves_monotone() {
        let inst = small();
        for scan in [ScanMode::Full, ScanMode::Sampled(8)] {
            for decrement in [DecrementMode::Verbatim, DecrementMode::Uniform] {
                let params = SearchParams {
                    iterations: 60,
                    seed: 7,
                    scan,
                    decrement,
                    ..SearchParams::default()
                };
                let mut checked = 0;
                let a = its_run_observed(&inst, &params, |view| {
                    assert!(view.tabu.is_consistent());
                    assert!(view.weights.rho.iter().all(|&r| r >= 1.0));
                    let s: f64 = view.weights.probabilities().iter().sum();
                    assert!((s - 1.0).abs() < 1e-12);
                    view.current.validate(6).unwrap();
                    checked += 1;
                })
                .unwrap();
                assert_eq!(checked, 60);
                let b = its_run(&inst, &params).unwrap();
                assert_eq!(a, b);
                assert!(a.curve.windows(2).all(|w| w[1].best_total <= w[0].best_total));
            }
        }
    }

    #[test]
    fn zero_iterations_returns_start() {
        let inst = small();
        let params = SearchParams {
            iterations: 0,
            ..SearchParams::default()
        };
        let res = its_run(&inst, &params).unwrap();
        assert_eq!(res.plan, greedy_insert(&inst).unwrap());
        assert!(res.curve.is_empty());
    }

    #[test]
    fn bad_params_rejected() {
        let inst = small();
        let p = SearchParams {
            delta1: 0.1,
            delta2: 0.2,
            ..SearchParams::default()
        };
        assert!(its_run(&inst, &p).is_err());
        let p = SearchParams {
            tenure: 0,
            ..SearchParams::default()
        };
        assert!(its_run(&inst, &p).is_err());
    }
}
