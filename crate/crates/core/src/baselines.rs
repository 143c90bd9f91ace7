//! Reference solvers: plain tabu search and VNS from random starts, the
//! greedy plan on its own, and exhaustive enumeration for tiny instances.

use crate::error::{Error, Result};
use crate::gaussian::{exceed_probability, max_with_constant, Gaussian};
use crate::greedy::greedy_insert;
use crate::instance::{Instance, DEPOT};
use crate::neighborhood::{apply_candidate, random_move, repair_depot_insertion, scan_pairs, Candidate, Operator};
use crate::plan::{Amr, Plan, Trip};
use crate::schedule::{self, evaluate, CostBreakdown};
use crate::tabu::{tabu_search, CurvePoint, SearchParams, SearchResult};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest instance [`exhaustive_solve`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// A shuffled request order cut into capacity-feasible trips, one AMR per
/// trip.
pub fn random_initial(inst: &Instance, seed: u64) -> Plan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = (1..=inst.len()).collect();
    ids.shuffle(&mut rng);
    let mut amrs = Vec::new();
    let mut trip = Vec::new();
    let mut load = inst.capacity;
    for id in ids {
        let d = inst.request(id).demand;
        if load < d && !trip.is_empty() {
            amrs.push(Amr::new(vec![std::mem::take(&mut trip)]));
            load = inst.capacity;
        }
        load -= d;
        trip.push(id);
    }
    if !trip.is_empty() {
        amrs.push(Amr::new(vec![trip]));
    }
    Plan::new(amrs)
}

/// Stream of the random start, kept apart from the search's own stream.
fn start_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Tabu search with uniform operator choice from a random start.
pub fn plain_ts_run(inst: &Instance, params: &SearchParams) -> Result<SearchResult> {
    let start = random_initial(inst, start_seed(params.seed));
    tabu_search(inst, params, start, false, |_| {})
}

/// The greedy plan, reported like a zero-iteration search.
pub fn greedy_run(inst: &Instance) -> Result<SearchResult> {
    let plan = greedy_insert(inst)?;
    let cost = evaluate(&plan, inst);
    Ok(SearchResult {
        plan,
        cost,
        curve: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VnsParams {
    pub iterations: usize,
    pub seed: u64,
    /// Best-improvement scans allowed per descent.
    pub descent_scans: usize,
}

impl Default for VnsParams {
    fn default() -> Self {
        VnsParams {
            iterations: 500,
            seed: 1,
            descent_scans: 1,
        }
    }
}

impl From<&SearchParams> for VnsParams {
    fn from(p: &SearchParams) -> Self {
        VnsParams {
            iterations: p.iterations,
            seed: p.seed,
            ..VnsParams::default()
        }
    }
}

/// Basic VNS over (swap, 2-opt, relocation): shake with `k` random moves of
/// neighborhood `k`, descend by best improvement in the same neighborhood,
/// move on improvement and restart at `k = 1`, else try the next `k`.
pub fn vns_run(inst: &Instance, params: &VnsParams) -> Result<SearchResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = inst.len();
    let mut current = random_initial(inst, start_seed(params.seed));
    let mut cost = evaluate(&current, inst);
    let mut curve = Vec::with_capacity(params.iterations);
    let mut k = 1;
    for iteration in 1..=params.iterations {
        let op = Operator::ALL[k - 1];
        let mut shaken = current.clone();
        for _ in 0..k {
            shaken = random_move(op, &shaken, n, &mut rng).0;
        }
        shaken = repair_depot_insertion(&shaken, inst);
        let (candidate, candidate_cost) = descend(inst, shaken, op, params.descent_scans);
        if candidate_cost.total < cost.total {
            current = candidate;
            cost = candidate_cost;
            k = 1;
        } else {
            k = k % Operator::ALL.len() + 1;
        }
        curve.push(CurvePoint {
            iteration,
            best_total: cost.total,
        });
    }
    Ok(SearchResult {
        plan: current,
        cost,
        curve,
    })
}

fn descend(inst: &Instance, mut plan: Plan, op: Operator, scans: usize) -> (Plan, CostBreakdown) {
    let mut traces = schedule::traces(&plan, inst);
    let mut cost = CostBreakdown::from_parts(inst, traces.iter().map(|t| &t.eval));
    for _ in 0..scans {
        let best = scan_pairs(&plan, &traces, inst, op)
            .into_iter()
            .fold(None, |best: Option<Candidate>, c| match best {
                Some(b) if b.cost.total <= c.cost.total => Some(b),
                _ => Some(c),
            });
        match best {
            Some(c) if c.cost.total < cost.total => {
                plan = apply_candidate(&plan, inst, &c);
                traces = schedule::traces(&plan, inst);
                cost = CostBreakdown::from_parts(inst, traces.iter().map(|t| &t.eval));
            }
            _ => break,
        }
    }
    (plan, cost)
}

/// Search state while extending one AMR's route.
#[derive(Clone, Copy)]
struct Cursor {
    /// When the AMR can leave `at`.
    ready: Gaussian,
    at: usize,
    load: f64,
    lateness: f64,
    travel: f64,
}

struct Enumerator<'a> {
    inst: &'a Instance,
    /// Cheapest single-AMR cost and route per request subset.
    best: Vec<(f64, Vec<Trip>)>,
    trips: Vec<Trip>,
}

impl Enumerator<'_> {
    fn cost(&self, lateness: f64, travel: f64) -> f64 {
        let c = &self.inst.costs;
        c.fleet + c.lateness * lateness + c.travel * travel
    }

    fn visit(&mut self, cur: Cursor, mask: usize) {
        let n = self.inst.len();
        // Close the trip here.
        if cur.at != DEPOT {
            let back = self.inst.travel_time(cur.at, DEPOT, cur.ready.mean);
            let travel = cur.travel + back.mean;
            let total = self.cost(cur.lateness, travel);
            if total < self.best[mask].0 {
                self.best[mask] = (total, self.trips.clone());
            }
            // Start another trip when the AMR is back.
            let home = cur.ready + back;
            let next = Cursor {
                ready: home,
                at: DEPOT,
                load: self.inst.capacity,
                lateness: cur.lateness,
                travel,
            };
            if mask != (1 << n) - 1 {
                self.trips.push(Vec::new());
                self.extend(next, mask);
                self.trips.pop();
            }
        }
        self.extend(cur, mask);
    }

    fn extend(&mut self, cur: Cursor, mask: usize) {
        for id in 1..=self.inst.len() {
            let bit = 1 << (id - 1);
            let req = self.inst.request(id);
            if mask & bit != 0 || cur.load < req.demand {
                continue;
            }
            let leg = self.inst.travel_time(cur.at, id, cur.ready.mean);
            let arrival = cur.ready + leg;
            let start = max_with_constant(arrival, req.earliest);
            let next = Cursor {
                ready: start + req.service,
                at: id,
                load: cur.load - req.demand,
                lateness: cur.lateness + exceed_probability(arrival, req.latest),
                travel: cur.travel + leg.mean,
            };
            self.trips.last_mut().expect("open trip").push(id);
            self.visit(next, mask | bit);
            self.trips.last_mut().expect("open trip").pop();
        }
    }
}

/// Optimal plan by enumerating every single-AMR route (request order and trip
/// breaks) for every subset, then the best partition of requests into AMRs.
pub fn exhaustive_solve(inst: &Instance) -> Result<(Plan, CostBreakdown)> {
    let n = inst.len();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLargeForExhaustive {
            requested: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    for id in 1..=n {
        let req = inst.request(id);
        if req.demand > inst.capacity {
            return Err(Error::InfeasibleDemand {
                id,
                demand: req.demand,
                capacity: inst.capacity,
            });
        }
    }
    let full = (1usize << n) - 1;
    let mut e = Enumerator {
        inst,
        best: vec![(f64::INFINITY, Vec::new()); full + 1],
        trips: vec![Vec::new()],
    };
    let origin = Cursor {
        ready: Gaussian::ZERO,
        at: DEPOT,
        load: inst.capacity,
        lateness: 0.0,
        travel: 0.0,
    };
    e.extend(origin, 0);

    // Partition DP; each block contains the lowest remaining request.
    let mut f = vec![(f64::INFINITY, 0usize); full + 1];
    f[0] = (0.0, 0);
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let mut sub = mask;
        while sub > 0 {
            if sub & low != 0 {
                let total = e.best[sub].0 + f[mask ^ sub].0;
                if total < f[mask].0 {
                    f[mask] = (total, sub);
                }
            }
            sub = (sub - 1) & mask;
        }
    }
    let mut amrs = Vec::new();
    let mut mask = full;
    while mask > 0 {
        let block = f[mask].1;
        amrs.push(Amr::new(e.best[block].1.clone()));
        mask ^= block;
    }
    let plan = Plan::new(amrs);
    let cost = evaluate(&plan, inst);
    Ok((plan, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::toy;
    use crate::schedule::capacity_violations;

    #[test]
    fn one_request_costs_one_amr_and_a_round_trip() {
        let inst = toy(&[(30.0, 40.0, 1, 10.0, 0.0, 1e4, 5.0)], 100.0, false);
        let (plan, cost) = exhaustive_solve(&inst).unwrap();
        assert_eq!(plan.amrs, vec![Amr::new(vec![vec![1]])]);
        assert!((cost.total - (30.0 + 0.01 * 2.0 * 50.0 * 1.1)).abs() < 1e-9);
    }

    #[test]
    fn two_cheap_requests_share_an_amr() {
        let inst = toy(
            &[(10.0, 0.0, 1, 10.0, 0.0, 1e4, 5.0), (20.0, 0.0, 1, 10.0, 0.0, 1e4, 5.0)],
            100.0,
            false,
        );
        let (plan, cost) = exhaustive_solve(&inst).unwrap();
        assert_eq!(plan.fleet_size(), 1);
        // One AMR out and back along the line versus two AMRs.
        let one = 30.0 + 0.01 * 40.0 * 1.1;
        let two = 60.0 + 0.01 * 60.0 * 1.1;
        assert!((cost.total - one).abs() < 1e-9);
        assert!(cost.total < two);
    }

    #[test]
    fn exhaustive_beats_every_plan_it_could_list() {
        let inst = toy(
            &[
                (10.0, 5.0, 2, 60.0, 50.0, 100.0, 30.0),
                (0.0, 20.0, 4, 40.0, 0.0, 150.0, 30.0),
                (30.0, 20.0, 1, 50.0, 300.0, 400.0, 30.0),
                (5.0, 25.0, 3, 60.0, 0.0, 900.0, 30.0),
                (20.0, 10.0, 2, 20.0, 100.0, 250.0, 30.0),
            ],
            100.0,
            false,
        );
        let (plan, cost) = exhaustive_solve(&inst).unwrap();
        plan.validate(5).unwrap();
        assert!(capacity_violations(&plan, &inst).is_empty());
        for seed in 0..10 {
            let params = SearchParams {
                iterations: 100,
                seed,
                ..SearchParams::default()
            };
            let its = crate::tabu::its_run(&inst, &params).unwrap();
            assert!(cost.total <= its.cost.total + 1e-9);
            assert!(cost.total <= plain_ts_run(&inst, &params).unwrap().cost.total + 1e-9);
            assert!(cost.total <= vns_run(&inst, &VnsParams::from(&params)).unwrap().cost.total + 1e-9);
        }
        assert!(cost.total <= greedy_run(&inst).unwrap().cost.total + 1e-9);
    }

    #[test]
    fn exhaustive_refuses_large_instances() {
        let reqs: Vec<_> = (0..9).map(|k| (k as f64, 0.0, 1, 1.0, 0.0, 1e4, 0.0)).collect();
        let inst = toy(&reqs, 100.0, false);
        assert!(matches!(
            exhaustive_solve(&inst),
            Err(Error::TooLargeForExhaustive { requested: 9, limit: 8 })
        ));
    }

    #[test]
    fn random_start_is_feasible_and_seeded() {
        let reqs: Vec<_> = (0..12).map(|k| (k as f64, 1.0, 1, 30.0, 0.0, 1e4, 0.0)).collect();
        let inst = toy(&reqs, 100.0, false);
        let a = random_initial(&inst, 3);
        a.validate(12).unwrap();
        assert!(capacity_violations(&a, &inst).is_empty());
        assert!(a.amrs.iter().all(|amr| amr.trips.len() == 1));
        assert_eq!(a, random_initial(&inst, 3));
    }

    #[test]
    fn baselines_are_reproducible() {
        let reqs: Vec<_> = (0..7)
            .map(|k| (5.0 * k as f64, 3.0, 1 + k as u32 % 3, 30.0, 40.0 * k as f64, 40.0 * k as f64 + 60.0, 10.0))
            .collect();
        let inst = toy(&reqs, 100.0, true);
        let params = SearchParams {
            iterations: 30,
            seed: 5,
            ..SearchParams::default()
        };
        assert_eq!(plain_ts_run(&inst, &params).unwrap(), plain_ts_run(&inst, &params).unwrap());
        let v = VnsParams::from(&params);
        let a = vns_run(&inst, &v).unwrap();
        assert_eq!(a, vns_run(&inst, &v).unwrap());
        assert!(a.curve.windows(2).all(|w| w[1].best_total <= w[0].best_total));
        let zero = SearchParams {
            iterations: 0,
            ..params
        };
        let ts0 = plain_ts_run(&inst, &zero).unwrap();
        assert_eq!(ts0.plan, random_initial(&inst, start_seed(5)));
    }

    #[test]
    fn one_request_is_solved_by_everyone() {
        let inst = toy(&[(30.0, 40.0, 2, 10.0, 0.0, 1e4, 5.0)], 100.0, true);
        let best = exhaustive_solve(&inst).unwrap().1.total;
        let params = SearchParams::default();
        for total in [
            crate::tabu::its_run(&inst, &params).unwrap().cost.total,
            plain_ts_run(&inst, &params).unwrap().cost.total,
            vns_run(&inst, &VnsParams::from(&params)).unwrap().cost.total,
            greedy_run(&inst).unwrap().cost.total,
        ] {
            assert_eq!(total, best);
        }
    }
}
