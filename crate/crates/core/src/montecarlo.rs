//! Sampling check of the analytic schedule.
//!
//! Each sample draws one road and one elevator speed per leg and one service
//! time per visit (negative draws truncated at zero) and replays the plan
//! with plain arithmetic. Samples run in fixed-size chunks, each with its own
//! stream of the seeded generator, so results do not depend on threading.

use crate::error::{invalid, Result};
use crate::instance::{Instance, DEPOT};
use crate::plan::Plan;
use crate::schedule::{evaluate, propagate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisitStat {
    pub request: usize,
    pub amr: usize,
    pub analytic_lateness: f64,
    pub empirical_lateness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteStat {
    pub amr: usize,
    pub analytic_r: f64,
    pub empirical_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub samples: usize,
    pub seed: u64,
    pub visits: Vec<VisitStat>,
    pub routes: Vec<RouteStat>,
    pub analytic_r: f64,
    pub empirical_r: f64,
    /// Expected travel seconds summed over all legs.
    pub analytic_travel: f64,
    pub empirical_travel: f64,
    pub analytic_cost: f64,
    pub empirical_cost: f64,
}

impl McReport {
    /// Largest per-visit gap between analytic and sampled lateness.
    pub fn max_lateness_gap(&self) -> f64 {
        self.visits
            .iter()
            .map(|v| (v.analytic_lateness - v.empirical_lateness).abs())
            .fold(0.0, f64::max)
    }

    pub fn r_gap(&self) -> f64 {
        (self.analytic_r - self.empirical_r).abs()
    }
}

struct Tally {
    late: Vec<u64>,
    travel: f64,
}

fn normal<R: Rng>(rng: &mut R, mean: f64, variance: f64) -> f64 {
    if variance == 0.0 {
        return mean.max(0.0);
    }
    let z: f64 = rng.sample(StandardNormal);
    (mean + variance.sqrt() * z).max(0.0)
}

fn run_chunk(plan: &Plan, inst: &Instance, samples: usize, rng: &mut ChaCha8Rng, visits: usize) -> Tally {
    let mut tally = Tally {
        late: vec![0; visits],
        travel: 0.0,
    };
    let profile = &inst.profile;
    for _ in 0..samples {
        let mut slot = 0;
        for amr in &plan.amrs {
            let mut depart = 0.0;
            for trip in amr.trips.iter().filter(|t| !t.is_empty()) {
                let mut ready = depart;
                let mut prev = DEPOT;
                for &id in trip {
                    let (meters, levels) = inst.distance(prev, id).expect("plan ids are valid");
                    let zone = profile.zone_at(ready);
                    let vr = normal(rng, zone.road_mean, profile.road_variance);
                    let vf = normal(rng, zone.floor_mean, profile.floor_variance);
                    let leg = meters * vr + f64::from(levels) * vf;
                    tally.travel += leg;
                    let arrival = ready + leg;
                    let req = inst.request(id);
                    if arrival > req.latest {
                        tally.late[slot] += 1;
                    }
                    slot += 1;
                    let service = normal(rng, req.service.mean, req.service.variance);
                    ready = arrival.max(req.earliest) + service;
                    prev = id;
                }
                let (meters, levels) = inst.distance(prev, DEPOT).expect("plan ids are valid");
                let zone = profile.zone_at(ready);
                let vr = normal(rng, zone.road_mean, profile.road_variance);
                let vf = normal(rng, zone.floor_mean, profile.floor_variance);
                let leg = meters * vr + f64::from(levels) * vf;
                tally.travel += leg;
                depart = ready + leg;
            }
        }
    }
    tally
}

/// Replays `plan` `samples` times and compares with the analytic schedule.
pub fn simulate_plan(plan: &Plan, inst: &Instance, samples: usize, seed: u64) -> Result<McReport> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    plan.validate(inst.len())?;
    let schedule = propagate(plan, inst);
    let order: Vec<(usize, usize, f64)> = schedule
        .amrs
        .iter()
        .enumerate()
        .flat_map(|(k, a)| a.visits().map(move |v| (k, v.request, v.lateness)))
        .collect();

    let chunks: Vec<(usize, usize)> = (0..samples.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(samples - c * CHUNK)))
        .collect();
    let tallies: Vec<Tally> = chunks
        .par_iter()
        .map(|&(c, count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            run_chunk(plan, inst, count, &mut rng, order.len())
        })
        .collect();

    let mut late = vec![0u64; order.len()];
    let mut travel = 0.0;
    for t in &tallies {
        for (acc, x) in late.iter_mut().zip(&t.late) {
            *acc += x;
        }
        travel += t.travel;
    }
    let n = samples as f64;
    let visits: Vec<VisitStat> = order
        .iter()
        .zip(&late)
        .map(|(&(amr, request, lateness), &count)| VisitStat {
            request,
            amr,
            analytic_lateness: lateness,
            empirical_lateness: count as f64 / n,
        })
        .collect();
    let routes: Vec<RouteStat> = (0..schedule.amrs.len())
        .map(|k| {
            let (a, e) = visits
                .iter()
                .filter(|v| v.amr == k)
                .fold((1.0f64, 1.0f64), |(a, e), v| {
                    (a.min(1.0 - v.analytic_lateness), e.min(1.0 - v.empirical_lateness))
                });
            RouteStat {
                amr: k,
                analytic_r: a,
                empirical_r: e,
            }
        })
        .collect();
    let analytic_r = routes.iter().map(|r| r.analytic_r).fold(1.0, f64::min);
    let empirical_r = routes.iter().map(|r| r.empirical_r).fold(1.0, f64::min);

    let cost = evaluate(plan, inst);
    let analytic_travel: f64 = schedule.amrs.iter().flat_map(|a| &a.trips).map(|t| t.travel_mean).sum();
    let empirical_travel = travel / n;
    let empirical_late: f64 = visits.iter().map(|v| v.empirical_lateness).sum();
    let empirical_cost = cost.fixed + inst.costs.lateness * empirical_late + inst.costs.travel * empirical_travel;

    Ok(McReport {
        samples,
        seed,
        visits,
        routes,
        analytic_r,
        empirical_r,
        analytic_travel,
        empirical_travel,
        analytic_cost: cost.total,
        empirical_cost,
    })
}
