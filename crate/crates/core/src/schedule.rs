//! Forward propagation of arrival-time distributions and the daily cost.
//!
//! Along a trip the arrival at the next request is the start of service at
//! the current one plus its service time plus the leg's travel time; service
//! cannot start before the request's earliest time, so the start is the
//! clipped maximum of arrival and that bound. The first trip of an AMR leaves
//! the depot at t = 0 and every later trip leaves when the previous one is
//! back. The speed zone of a leg is picked from the mean departure time.

use crate::gaussian::{exceed_probability, max_with_constant, Gaussian};
use crate::instance::{Instance, DEPOT};
use crate::plan::{Amr, Plan};
use serde::{Deserialize, Serialize};

/// Tolerance for schedule invariants, seconds.
pub const EPS_SECONDS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub request: usize,
    pub arrival: Gaussian,
    pub start: Gaussian,
    /// Load on board when arriving, before unloading this request.
    pub load_on_arrival: f64,
    /// `P(arrival > latest)`.
    pub lateness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripSchedule {
    pub departure: Gaussian,
    pub visits: Vec<Visit>,
    pub return_time: Gaussian,
    /// Sum of expected travel seconds over the trip's legs, depot legs included.
    pub travel_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmrSchedule {
    pub trips: Vec<TripSchedule>,
}

impl AmrSchedule {
    pub fn visits(&self) -> impl Iterator<Item = &Visit> {
        self.trips.iter().flat_map(|t| t.visits.iter())
    }

    /// Lowest on-time probability over this AMR's visits.
    pub fn service_probability(&self) -> f64 {
        self.visits().map(|v| 1.0 - v.lateness).fold(1.0, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub amrs: Vec<AmrSchedule>,
}

impl Schedule {
    pub fn visits(&self) -> impl Iterator<Item = &Visit> {
        self.amrs.iter().flat_map(AmrSchedule::visits)
    }

    /// Lateness probability per request id (index 0 unused).
    pub fn lateness_by_request(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        for v in self.visits() {
            out[v.request] = v.lateness;
        }
        out
    }
}

/// Per-AMR totals that the objective is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmrEval {
    /// Σ P(A > h) over the AMR's visits.
    pub lateness: f64,
    /// Σ μ(T) over the AMR's legs.
    pub travel: f64,
}

enum Step {
    /// A visit and the mean of the leg that reached it.
    Visit(Visit, f64),
    /// End of a trip: depot departure, return, and closing leg mean.
    Return(Gaussian, Gaussian, f64),
}

/// Propagation state just before a visit.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cursor {
    depart_depot: Gaussian,
    /// Time the AMR is ready to leave `prev`.
    ready: Gaussian,
    prev: usize,
    load: f64,
    lateness: f64,
    travel: f64,
}

impl Cursor {
    fn trip_start(depart_depot: Gaussian, capacity: f64, lateness: f64, travel: f64) -> Self {
        Cursor {
            depart_depot,
            ready: depart_depot,
            prev: DEPOT,
            load: capacity,
            lateness,
            travel,
        }
    }
}

/// Walks one AMR's trips in order from `(trip, pos)` with `cur` as the state
/// before that visit, reporting visits and trip ends. Lateness and travel are
/// accumulated in visiting order.
#[inline]
fn walk_from(
    inst: &Instance,
    amr: &Amr,
    (first_trip, first_pos): (usize, usize),
    mut cur: Cursor,
    mut on_step: impl FnMut(Step, &Cursor),
) -> Cursor {
    for (t, trip) in amr.trips.iter().enumerate().skip(first_trip) {
        if trip.is_empty() {
            continue;
        }
        let skip = if t == first_trip { first_pos } else { 0 };
        for &id in &trip[skip..] {
            let req = inst.request(id);
            let leg = inst.travel_time(cur.prev, id, cur.ready.mean);
            let arrival = cur.ready + leg;
            let start = max_with_constant(arrival, req.earliest);
            let visit = Visit {
                request: id,
                arrival,
                start,
                load_on_arrival: cur.load,
                lateness: exceed_probability(arrival, req.latest),
            };
            on_step(Step::Visit(visit, leg.mean), &cur);
            cur.travel += leg.mean;
            cur.lateness += visit.lateness;
            cur.load -= req.demand;
            cur.ready = start + req.service;
            cur.prev = id;
        }
        let back = inst.travel_time(cur.prev, DEPOT, cur.ready.mean);
        let return_time = cur.ready + back;
        on_step(Step::Return(cur.depart_depot, return_time, back.mean), &cur);
        cur = Cursor::trip_start(return_time, inst.capacity, cur.lateness, cur.travel + back.mean);
    }
    cur
}

fn walk(inst: &Instance, amr: &Amr, on_step: impl FnMut(Step, &Cursor)) -> Cursor {
    let origin = Cursor::trip_start(Gaussian::ZERO, inst.capacity, 0.0, 0.0);
    walk_from(inst, amr, (0, 0), origin, on_step)
}

/// Lateness and travel sums for one AMR, without materializing a schedule.
pub fn eval_amr(inst: &Instance, amr: &Amr) -> AmrEval {
    let end = walk(inst, amr, |_, _| {});
    AmrEval {
        lateness: end.lateness,
        travel: end.travel,
    }
}

/// An AMR's totals plus the propagation state before each of its visits, so
/// that an edited copy can be re-evaluated from its first changed position.
#[derive(Debug, Clone, PartialEq)]
pub struct AmrTrace {
    pub eval: AmrEval,
    amr: Amr,
    /// `states[t][p]`: state before visit `p` of trip `t`.
    states: Vec<Vec<Cursor>>,
}

impl AmrTrace {
    pub fn new(inst: &Instance, amr: &Amr) -> Self {
        let mut states: Vec<Vec<Cursor>> = amr.trips.iter().map(|t| Vec::with_capacity(t.len())).collect();
        let mut t = 0;
        let end = walk(inst, amr, |step, cur| match step {
            Step::Visit(..) => {
                while amr.trips[t].is_empty() {
                    t += 1;
                }
                states[t].push(*cur);
            }
            Step::Return(..) => t += 1,
        });
        AmrTrace {
            eval: AmrEval {
                lateness: end.lateness,
                travel: end.travel,
            },
            amr: amr.clone(),
            states,
        }
    }

    /// Totals of `edited`, identical to `eval_amr(inst, edited)`.
    pub fn eval_edited(&self, inst: &Instance, edited: &Amr) -> AmrEval {
        let old = &self.amr;
        let mut from = None;
        for (t, trip) in edited.trips.iter().enumerate() {
            let Some(prev) = old.trips.get(t) else {
                from = Some((t, 0));
                break;
            };
            if trip.is_empty() || prev.is_empty() {
                return eval_amr(inst, edited);
            }
            if let Some(p) = trip.iter().zip(prev).position(|(a, b)| a != b) {
                from = Some((t, p));
                break;
            }
            if trip.len() != prev.len() {
                from = Some((t, trip.len().min(prev.len())));
                break;
            }
        }
        let (t, p) = match from {
            Some(tp) => tp,
            None if edited.trips.len() == old.trips.len() => return self.eval,
            // Trailing trips removed; nothing cheaper than a full pass.
            None => return eval_amr(inst, edited),
        };
        let cur = match self.states.get(t).and_then(|s| s.get(p)) {
            Some(c) => *c,
            None => return eval_amr(inst, edited),
        };
        let end = walk_from(inst, edited, (t, p), cur, |_, _| {});
        AmrEval {
            lateness: end.lateness,
            travel: end.travel,
        }
    }
}

/// Full per-visit schedule of a plan.
pub fn propagate(plan: &Plan, inst: &Instance) -> Schedule {
    let amrs = plan
        .amrs
        .iter()
        .map(|amr| {
            let mut trips = Vec::with_capacity(amr.trips.len());
            let mut visits = Vec::new();
            let mut travel = 0.0;
            walk(inst, amr, |step, _| match step {
                Step::Visit(v, leg) => {
                    visits.push(v);
                    travel += leg;
                }
                Step::Return(departure, return_time, leg) => trips.push(TripSchedule {
                    departure,
                    visits: std::mem::take(&mut visits),
                    return_time,
                    travel_mean: std::mem::take(&mut travel) + leg,
                }),
            });
            AmrSchedule { trips }
        })
        .collect();
    Schedule { amrs }
}

/// The three cost components of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub fixed: f64,
    pub penalty: f64,
    pub travel: f64,
    pub total: f64,
}

impl CostBreakdown {
    /// Combines per-AMR sums in iteration order.
    pub fn from_parts<'a>(inst: &Instance, parts: impl IntoIterator<Item = &'a AmrEval>) -> Self {
        let (mut m, mut lateness, mut travel) = (0usize, 0.0, 0.0);
        for p in parts {
            m += 1;
            lateness += p.lateness;
            travel += p.travel;
        }
        let fixed = inst.costs.fleet * m as f64;
        let penalty = inst.costs.lateness * lateness;
        let travel = inst.costs.travel * travel;
        CostBreakdown {
            fixed,
            penalty,
            travel,
            total: fixed + penalty + travel,
        }
    }
}

/// Per-AMR evaluations of every non-empty AMR in plan order.
pub fn eval_parts(plan: &Plan, inst: &Instance) -> Vec<AmrEval> {
    plan.amrs
        .iter()
        .filter(|a| !a.is_empty())
        .map(|a| eval_amr(inst, a))
        .collect()
}

/// Traces of every non-empty AMR in plan order.
pub fn traces(plan: &Plan, inst: &Instance) -> Vec<AmrTrace> {
    plan.amrs
        .iter()
        .filter(|a| !a.is_empty())
        .map(|a| AmrTrace::new(inst, a))
        .collect()
}

/// Daily cost: fleet cost per AMR, expected lateness penalties and expected
/// travel cost.
pub fn evaluate(plan: &Plan, inst: &Instance) -> CostBreakdown {
    CostBreakdown::from_parts(inst, &eval_parts(plan, inst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityViolation {
    pub amr: usize,
    pub trip: usize,
    /// 0-based position of the first request the remaining load cannot cover.
    pub position: usize,
}

/// Every visit whose demand exceeds the load still on board.
pub fn capacity_violations(plan: &Plan, inst: &Instance) -> Vec<CapacityViolation> {
    let mut out = Vec::new();
    for (a, amr) in plan.amrs.iter().enumerate() {
        for (t, trip) in amr.trips.iter().enumerate() {
            let mut load = inst.capacity;
            for (p, &id) in trip.iter().enumerate() {
                let demand = inst.request(id).demand;
                if load < demand {
                    out.push(CapacityViolation {
                        amr: a,
                        trip: t,
                        position: p,
                    });
                }
                load -= demand;
            }
        }
    }
    out
}

/// Service probability: the lowest `P(A ≤ h)` per AMR route and over the
/// whole plan (1 when nothing is served).
pub fn service_probability(plan: &Plan, inst: &Instance) -> (f64, Vec<f64>) {
    let schedule = propagate(plan, inst);
    let per_route: Vec<f64> = schedule.amrs.iter().map(AmrSchedule::service_probability).collect();
    let r = per_route.iter().copied().fold(1.0, f64::min);
    (r, per_route)
}
