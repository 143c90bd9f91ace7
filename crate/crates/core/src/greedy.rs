//! Greedy construction of an initial plan.
//!
//! Requests are taken in ascending order of earliest start (ties by deadline,
//! then id) and appended to the end of the single trip of an existing AMR
//! when the load still on board covers the demand and the mean arrival time
//! is no later than the deadline. Among the AMRs that qualify the one with the
//! smallest increase in expected travel wins; otherwise a new AMR is opened.

use crate::error::{Error, Result};
use crate::gaussian::{max_with_constant, Gaussian};
use crate::instance::{Instance, DEPOT};
use crate::plan::{Amr, Plan};

struct OpenRoute {
    requests: Vec<usize>,
    load: f64,
    /// When the AMR can leave its last request.
    ready: Gaussian,
}

impl OpenRoute {
    fn last(&self) -> usize {
        self.requests.last().copied().unwrap_or(DEPOT)
    }
}

/// Request ids in construction order.
pub fn priority_order(inst: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=inst.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (inst.request(a), inst.request(b));
        ra.earliest
            .total_cmp(&rb.earliest)
            .then(ra.latest.total_cmp(&rb.latest))
            .then(a.cmp(&b))
    });
    order
}

pub fn greedy_insert(inst: &Instance) -> Result<Plan> {
    let mut routes: Vec<OpenRoute> = Vec::new();
    for id in priority_order(inst) {
        let req = inst.request(id);
        if req.demand > inst.capacity {
            return Err(Error::InfeasibleDemand {
                id,
                demand: req.demand,
                capacity: inst.capacity,
            });
        }

        let mut best: Option<(usize, f64)> = None;
        for (k, route) in routes.iter().enumerate() {
            if route.load < req.demand {
                continue;
            }
            let last = route.last();
            let leg = inst.travel_time(last, id, route.ready.mean);
            let arrival = route.ready + leg;
            if arrival.mean > req.latest {
                continue;
            }
            let leave = max_with_constant(arrival, req.earliest) + req.service;
            let extra = leg.mean + inst.travel_time(id, DEPOT, leave.mean).mean
                - inst.travel_time(last, DEPOT, route.ready.mean).mean;
            if best.is_none_or(|(_, b)| extra < b) {
                best = Some((k, extra));
            }
        }

        let k = match best {
            Some((k, _)) => k,
            None => {
                routes.push(OpenRoute {
                    requests: Vec::new(),
                    load: inst.capacity,
                    ready: Gaussian::ZERO,
                });
                routes.len() - 1
            }
        };
        let route = &mut routes[k];
        let arrival = route.ready + inst.travel_time(route.last(), id, route.ready.mean);
        route.ready = max_with_constant(arrival, req.earliest) + req.service;
        route.load -= req.demand;
        route.requests.push(id);
    }
    Ok(Plan::new(
        routes.into_iter().map(|r| Amr::new(vec![r.requests])).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::toy;
    use crate::schedule::{capacity_violations, propagate};

    #[test]
    fn single_request_gets_its_own_amr() {
        let inst = toy(&[(5.0, 5.0, 2, 10.0, 0.0, 100.0, 3.0)], 50.0, true);
        let plan = greedy_insert(&inst).unwrap();
        assert_eq!(plan.amrs, vec![Amr::new(vec![vec![1]])]);
    }

    #[test]
    fn disjoint_windows_share_one_amr_in_earliest_order() {
        // Listed late-first so the sort matters.
        let inst = toy(
            &[(20.0, 0.0, 1, 1.0, 5000.0, 6000.0, 10.0), (10.0, 0.0, 1, 1.0, 0.0, 10.0 + 11.0, 10.0)],
            50.0,
            false,
        );
        let plan = greedy_insert(&inst).unwrap();
        assert_eq!(plan.amrs, vec![Amr::new(vec![vec![2, 1]])]);
    }

    #[test]
    fn same_tight_window_needs_two_amrs() {
        // The requests are ~100 s apart; both must be reached by t = 10.
        let inst = toy(
            &[(0.0, 0.0, 1, 1.0, 0.0, 10.0, 0.0), (100.0 / 1.1, 0.0, 1, 1.0, 0.0, 10.0, 0.0)],
            50.0,
            false,
        );
        let plan = greedy_insert(&inst).unwrap();
        assert_eq!(plan.fleet_size(), 2);
    }

    #[test]
    fn capacity_opens_a_new_amr() {
        let inst = toy(
            &[(1.0, 0.0, 1, 150.0, 0.0, 1e4, 0.0), (2.0, 0.0, 1, 100.0, 10.0, 1e4, 0.0)],
            200.0,
            false,
        );
        let plan = greedy_insert(&inst).unwrap();
        assert_eq!(plan.fleet_size(), 2);
        assert!(capacity_violations(&plan, &inst).is_empty());
    }

    #[test]
    fn ties_broken_by_deadline_then_id() {
        let inst = toy(
            &[
                (1.0, 0.0, 1, 1.0, 0.0, 900.0, 0.0),
                (1.0, 0.0, 1, 1.0, 0.0, 500.0, 0.0),
                (1.0, 0.0, 1, 1.0, 0.0, 500.0, 0.0),
            ],
            200.0,
            false,
        );
        assert_eq!(priority_order(&inst), vec![2, 3, 1]);
        let plan = greedy_insert(&inst).unwrap();
        let s = propagate(&plan, &inst);
        assert!(s.visits().all(|v| v.arrival.mean <= inst.request(v.request).latest));
    }
}
