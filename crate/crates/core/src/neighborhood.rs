//! Neighborhood operators and the capacity repair.
//!
//! Each operator acts on a pair of requests `(j1, j2)`:
//!
//! * **swap** exchanges the two requests, which may sit on different AMRs;
//! * **2-opt** reverses the segment between them when both are on the same trip;
//! * **relocation** moves one request next to the other (before or after it),
//!   possibly onto another AMR.
//!
//! The guided forms used by [`swap_star`], [`two_opt_star`] and
//! [`relocation_star`] steer the pair choice with the time windows: a request
//! whose deadline is likely missed is moved towards the front of its route, a
//! stretch of decreasing earliest-start times is reversed. When no such
//! structure exists they fall back to a random pair.
//!
//! Moves only touch one or two AMRs, so a candidate is kept as an [`Edit`]
//! (replacement AMRs) and priced by swapping their cost contributions into the
//! current plan's per-AMR totals.

use crate::instance::Instance;
use crate::plan::{Amr, Plan, Slot};
use crate::schedule::{propagate, AmrEval, AmrTrace, CostBreakdown};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Swap,
    TwoOpt,
    Relocation,
}

impl Operator {
    pub const ALL: [Operator; 3] = [Operator::Swap, Operator::TwoOpt, Operator::Relocation];

    pub fn index(self) -> usize {
        match self {
            Operator::Swap => 0,
            Operator::TwoOpt => 1,
            Operator::Relocation => 2,
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::Swap => "swap",
            Operator::TwoOpt => "2-opt",
            Operator::Relocation => "relocation",
        })
    }
}

/// A neighborhood action on an unordered pair of distinct requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub operator: Operator,
    pair: (usize, usize),
}

impl Move {
    pub fn new(operator: Operator, a: usize, b: usize) -> Move {
        assert_ne!(a, b, "a move needs two distinct requests");
        Move {
            operator,
            pair: (a.min(b), a.max(b)),
        }
    }

    /// The pair with the smaller id first.
    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }
}

/// How a relocation places the moved request relative to its partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Before,
    After,
}

/// Replacement AMRs for a subset of a plan's AMR indices. An empty
/// replacement removes the AMR.
#[derive(Debug, Clone, PartialEq)]
pub struct Edit {
    pub changes: Vec<(usize, Amr)>,
}

impl Edit {
    /// Applies the edit and drops emptied AMRs.
    pub fn apply(self, plan: &Plan) -> Plan {
        let mut out = plan.clone();
        for (k, amr) in self.changes {
            out.amrs[k] = amr;
        }
        out.prune();
        out
    }

    /// Cost of the edited plan given the traces of the original
    /// (`traces[k]` belongs to `plan.amrs[k]`). Summation order matches
    /// evaluating the applied plan from scratch.
    pub fn cost(&self, inst: &Instance, traces: &[AmrTrace]) -> CostBreakdown {
        let mut replaced: Vec<(usize, Option<AmrEval>)> = self
            .changes
            .iter()
            .map(|(k, amr)| (*k, (!amr.is_empty()).then(|| traces[*k].eval_edited(inst, amr))))
            .collect();
        replaced.sort_by_key(|(k, _)| *k);
        let mut merged = Vec::with_capacity(traces.len());
        let mut next = replaced.iter().peekable();
        for (k, p) in traces.iter().map(|t| &t.eval).enumerate() {
            match next.peek() {
                Some((rk, r)) if *rk == k => {
                    if let Some(e) = r {
                        merged.push(*e);
                    }
                    next.next();
                }
                _ => merged.push(*p),
            }
        }
        CostBreakdown::from_parts(inst, &merged)
    }
}

/// Splits a trip wherever the load left on board cannot cover the next
/// demand; the AMR returns to the depot to reload.
pub fn repair_amr(amr: &mut Amr, inst: &Instance) {
    if !needs_repair(amr, inst) {
        return;
    }
    let mut trips = Vec::with_capacity(amr.trips.len() + 1);
    for trip in amr.trips.drain(..) {
        let mut current = Vec::with_capacity(trip.len());
        let mut load = inst.capacity;
        for id in trip {
            let demand = inst.request(id).demand;
            if load < demand && !current.is_empty() {
                trips.push(std::mem::take(&mut current));
                load = inst.capacity;
            }
            load -= demand;
            current.push(id);
        }
        if !current.is_empty() {
            trips.push(current);
        }
    }
    amr.trips = trips;
}

fn needs_repair(amr: &Amr, inst: &Instance) -> bool {
    amr.trips.iter().any(|trip| {
        let mut load = inst.capacity;
        trip.iter().any(|&id| {
            let d = inst.request(id).demand;
            let short = load < d;
            load -= d;
            short
        })
    })
}

/// Depot-insertion repair of every AMR.
pub fn repair_depot_insertion(plan: &Plan, inst: &Instance) -> Plan {
    let mut out = plan.clone();
    for amr in &mut out.amrs {
        repair_amr(amr, inst);
    }
    out.prune();
    out
}

fn finish(mut amr: Amr, inst: &Instance) -> Amr {
    amr.prune();
    repair_amr(&mut amr, inst);
    amr
}

/// Exchanges `a` and `b`.
pub fn swap_edit(plan: &Plan, slots: &[Slot], inst: &Instance, a: usize, b: usize) -> Edit {
    let (sa, sb) = (slots[a], slots[b]);
    if sa.amr == sb.amr {
        let mut amr = plan.amrs[sa.amr].clone();
        amr.trips[sa.trip][sa.pos] = b;
        amr.trips[sb.trip][sb.pos] = a;
        Edit {
            changes: vec![(sa.amr, finish(amr, inst))],
        }
    } else {
        let mut x = plan.amrs[sa.amr].clone();
        let mut y = plan.amrs[sb.amr].clone();
        x.trips[sa.trip][sa.pos] = b;
        y.trips[sb.trip][sb.pos] = a;
        Edit {
            changes: vec![(sa.amr, finish(x, inst)), (sb.amr, finish(y, inst))],
        }
    }
}

/// Reverses the stretch between `a` and `b`; `None` unless both are on the
/// same trip.
pub fn two_opt_edit(plan: &Plan, slots: &[Slot], inst: &Instance, a: usize, b: usize) -> Option<Edit> {
    let (sa, sb) = (slots[a], slots[b]);
    if sa.amr != sb.amr || sa.trip != sb.trip {
        return None;
    }
    let mut amr = plan.amrs[sa.amr].clone();
    let (lo, hi) = (sa.pos.min(sb.pos), sa.pos.max(sb.pos));
    amr.trips[sa.trip][lo..=hi].reverse();
    Some(Edit {
        changes: vec![(sa.amr, finish(amr, inst))],
    })
}

/// Whether moving `a` next to `b` leaves the plan as it is.
fn relocation_is_identity(slots: &[Slot], a: usize, b: usize, place: Placement) -> bool {
    let (sa, sb) = (slots[a], slots[b]);
    if sa.amr != sb.amr || sa.trip != sb.trip {
        return false;
    }
    match place {
        Placement::Before => sa.pos + 1 == sb.pos,
        Placement::After => sb.pos + 1 == sa.pos,
    }
}

/// Moves `a` immediately before or after `b`; `None` if that is where it
/// already is.
pub fn relocate_edit(
    plan: &Plan,
    slots: &[Slot],
    inst: &Instance,
    a: usize,
    b: usize,
    place: Placement,
) -> Option<Edit> {
    if relocation_is_identity(slots, a, b, place) {
        return None;
    }
    let (sa, sb) = (slots[a], slots[b]);
    let offset = usize::from(place == Placement::After);
    if sa.amr == sb.amr {
        let mut amr = plan.amrs[sa.amr].clone();
        amr.trips[sa.trip].remove(sa.pos);
        let mut pos = sb.pos;
        if sa.trip == sb.trip && sa.pos < sb.pos {
            pos -= 1;
        }
        amr.trips[sb.trip].insert(pos + offset, a);
        Some(Edit {
            changes: vec![(sa.amr, finish(amr, inst))],
        })
    } else {
        let mut from = plan.amrs[sa.amr].clone();
        let mut to = plan.amrs[sb.amr].clone();
        from.trips[sa.trip].remove(sa.pos);
        to.trips[sb.trip].insert(sb.pos + offset, a);
        Some(Edit {
            changes: vec![(sa.amr, finish(from, inst)), (sb.amr, finish(to, inst))],
        })
    }
}

/// The relocation variants explored for a pair, in evaluation order.
pub const RELOCATION_VARIANTS: [(bool, Placement); 4] = [
    (false, Placement::Before),
    (false, Placement::After),
    (true, Placement::Before),
    (true, Placement::After),
];

/// One candidate of a full pair scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub mv: Move,
    /// Index into [`RELOCATION_VARIANTS`] for relocations, 0 otherwise.
    pub variant: u8,
    pub cost: CostBreakdown,
}

/// Edit for a scanned candidate.
pub fn candidate_edit(plan: &Plan, slots: &[Slot], inst: &Instance, mv: Move, variant: u8) -> Option<Edit> {
    let (a, b) = mv.pair();
    match mv.operator {
        Operator::Swap => Some(swap_edit(plan, slots, inst, a, b)),
        Operator::TwoOpt => two_opt_edit(plan, slots, inst, a, b),
        Operator::Relocation => {
            let (flip, place) = RELOCATION_VARIANTS[usize::from(variant)];
            let (moved, anchor) = if flip { (b, a) } else { (a, b) };
            relocate_edit(plan, slots, inst, moved, anchor, place)
        }
    }
}

/// Best candidate of `op` for every pair `j1 < j2`, in row-major order.
/// Pairs the operator cannot act on are skipped. For relocations the best of
/// the four placements represents the pair (first one on ties).
pub fn scan_pairs(plan: &Plan, traces: &[AmrTrace], inst: &Instance, op: Operator) -> Vec<Candidate> {
    use rayon::prelude::*;
    let n = inst.len();
    let slots = plan.locate(n);
    (1..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let slots = &slots;
            (a + 1..=n).filter_map(move |b| {
                let mv = Move::new(op, a, b);
                let variants: u8 = if op == Operator::Relocation { 4 } else { 1 };
                let mut best: Option<Candidate> = None;
                for v in 0..variants {
                    let Some(edit) = candidate_edit(plan, slots, inst, mv, v) else {
                        continue;
                    };
                    let cost = edit.cost(inst, traces);
                    if best.is_none_or(|c| cost.total < c.cost.total) {
                        best = Some(Candidate { mv, variant: v, cost });
                    }
                }
                best
            })
        })
        .collect()
}

/// Applies a scanned candidate.
pub fn apply_candidate(plan: &Plan, inst: &Instance, c: &Candidate) -> Plan {
    let slots = plan.locate(inst.len());
    candidate_edit(plan, &slots, inst, c.mv, c.variant)
        .expect("scanned candidates are applicable")
        .apply(plan)
}

/// Guided operators with a configurable violation threshold.
#[derive(Debug, Clone, Copy)]
pub struct Guidance {
    /// A visit counts as violating its window when `P(A > h)` exceeds this.
    pub violation_threshold: f64,
}

impl Default for Guidance {
    fn default() -> Self {
        Guidance {
            violation_threshold: 0.5,
        }
    }
}

/// Result of applying one operator: the new (unrepaired) plan and the pair
/// acted on, `None` when the operator had nothing to act on.
pub type Applied = (Plan, Option<Move>);

impl Guidance {
    /// The most likely late request (first in plan order on ties), if any
    /// exceeds the threshold.
    fn worst_violator(&self, plan: &Plan, inst: &Instance) -> Option<usize> {
        let schedule = propagate(plan, inst);
        let mut worst: Option<(usize, f64)> = None;
        for v in schedule.visits() {
            if v.lateness > self.violation_threshold && worst.is_none_or(|(_, l)| v.lateness > l) {
                worst = Some((v.request, v.lateness));
            }
        }
        worst.map(|(id, _)| id)
    }

    /// Requests positioned before `id` on its AMR, in order.
    fn earlier_on_amr(plan: &Plan, slots: &[Slot], id: usize) -> Vec<usize> {
        plan.amrs[slots[id].amr]
            .requests()
            .take_while(|&r| r != id)
            .collect()
    }

    pub fn swap_star<R: Rng + ?Sized>(&self, plan: &Plan, inst: &Instance, rng: &mut R) -> Applied {
        if plan.request_count() < 2 {
            return (plan.clone(), None);
        }
        let n = inst.len();
        let slots = plan.locate(n);
        if let Some(v) = self.worst_violator(plan, inst) {
            let h = inst.request(v).latest;
            let partner = Self::earlier_on_amr(plan, &slots, v)
                .into_iter()
                .filter(|&u| inst.request(u).latest > h)
                .fold(None::<usize>, |best, u| match best {
                    Some(b) if inst.request(b).latest >= inst.request(u).latest => Some(b),
                    _ => Some(u),
                });
            if let Some(u) = partner {
                return (swap_raw(plan, &slots, v, u), Some(Move::new(Operator::Swap, v, u)));
            }
        }
        random_swap(plan, n, rng)
    }

    pub fn two_opt_star<R: Rng + ?Sized>(&self, plan: &Plan, inst: &Instance, rng: &mut R) -> Applied {
        // Longest maximal run of strictly decreasing earliest-start times.
        let mut best: Option<(usize, usize, usize, usize)> = None; // (amr, trip, start, len)
        for (a, amr) in plan.amrs.iter().enumerate() {
            for (t, trip) in amr.trips.iter().enumerate() {
                let mut start = 0;
                for k in 1..=trip.len() {
                    let continues = k < trip.len()
                        && inst.request(trip[k]).earliest < inst.request(trip[k - 1]).earliest;
                    if !continues {
                        let len = k - start;
                        if len >= 2 && best.is_none_or(|(_, _, _, l)| len > l) {
                            best = Some((a, t, start, len));
                        }
                        start = k;
                    }
                }
            }
        }
        let Some((a, t, s, len)) = best else {
            return random_two_opt(plan, rng);
        };
        let mut out = plan.clone();
        let trip = &mut out.amrs[a].trips[t];
        let mv = Move::new(Operator::TwoOpt, trip[s], trip[s + len - 1]);
        trip[s..s + len].reverse();
        (out, Some(mv))
    }

    pub fn relocation_star<R: Rng + ?Sized>(&self, plan: &Plan, inst: &Instance, rng: &mut R) -> Applied {
        if plan.request_count() < 2 {
            return (plan.clone(), None);
        }
        let n = inst.len();
        let slots = plan.locate(n);
        if let Some(v) = self.worst_violator(plan, inst) {
            let h = inst.request(v).latest;
            let target = Self::earlier_on_amr(plan, &slots, v)
                .into_iter()
                .find(|&u| inst.request(u).latest > h);
            if let Some(u) = target {
                let mut out = plan.clone();
                move_request(&mut out, &slots, v, slots[u], Placement::Before);
                out.prune();
                return (out, Some(Move::new(Operator::Relocation, v, u)));
            }
        }

        random_relocation(plan, n, rng)
    }

    pub fn apply<R: Rng + ?Sized>(&self, op: Operator, plan: &Plan, inst: &Instance, rng: &mut R) -> Applied {
        match op {
            Operator::Swap => self.swap_star(plan, inst, rng),
            Operator::TwoOpt => self.two_opt_star(plan, inst, rng),
            Operator::Relocation => self.relocation_star(plan, inst, rng),
        }
    }
}

fn swap_raw(plan: &Plan, slots: &[Slot], a: usize, b: usize) -> Plan {
    let mut out = plan.clone();
    let (sa, sb) = (slots[a], slots[b]);
    out.amrs[sa.amr].trips[sa.trip][sa.pos] = b;
    out.amrs[sb.amr].trips[sb.trip][sb.pos] = a;
    out
}

/// Moves `id` next to the request currently at `anchor` (slots are from
/// before the move).
fn move_request(plan: &mut Plan, slots: &[Slot], id: usize, anchor: Slot, place: Placement) {
    let s = slots[id];
    plan.amrs[s.amr].trips[s.trip].remove(s.pos);
    let mut pos = anchor.pos;
    if s.amr == anchor.amr && s.trip == anchor.trip && s.pos < anchor.pos {
        pos -= 1;
    }
    let offset = usize::from(place == Placement::After);
    plan.amrs[anchor.amr].trips[anchor.trip].insert(pos + offset, id);
}

/// Exchanges two distinct requests drawn uniformly.
pub fn random_swap<R: Rng + ?Sized>(plan: &Plan, n: usize, rng: &mut R) -> Applied {
    let ids: Vec<usize> = plan.amrs.iter().flat_map(Amr::requests).collect();
    if ids.len() < 2 {
        return (plan.clone(), None);
    }
    let i = rng.random_range(0..ids.len());
    let mut j = rng.random_range(0..ids.len() - 1);
    if j >= i {
        j += 1;
    }
    let (a, b) = (ids[i], ids[j]);
    (swap_raw(plan, &plan.locate(n), a, b), Some(Move::new(Operator::Swap, a, b)))
}

/// Reverses the stretch between two random positions of a random trip with
/// at least two requests.
pub fn random_two_opt<R: Rng + ?Sized>(plan: &Plan, rng: &mut R) -> Applied {
    let eligible: Vec<(usize, usize)> = plan
        .amrs
        .iter()
        .enumerate()
        .flat_map(|(a, amr)| {
            amr.trips
                .iter()
                .enumerate()
                .filter(|(_, trip)| trip.len() >= 2)
                .map(move |(t, _)| (a, t))
        })
        .collect();
    if eligible.is_empty() {
        return (plan.clone(), None);
    }
    let (a, t) = eligible[rng.random_range(0..eligible.len())];
    let len = plan.amrs[a].trips[t].len();
    let i = rng.random_range(0..len);
    let mut j = rng.random_range(0..len - 1);
    if j >= i {
        j += 1;
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let mut out = plan.clone();
    let trip = &mut out.amrs[a].trips[t];
    let mv = Move::new(Operator::TwoOpt, trip[lo], trip[hi]);
    trip[lo..=hi].reverse();
    (out, Some(mv))
}

/// Moves a random request to a random insertion point of any trip.
pub fn random_relocation<R: Rng + ?Sized>(plan: &Plan, n: usize, rng: &mut R) -> Applied {
    let ids: Vec<usize> = plan.amrs.iter().flat_map(Amr::requests).collect();
    if ids.len() < 2 {
        return (plan.clone(), None);
    }
    let moved = ids[rng.random_range(0..ids.len())];
    let s = plan.locate(n)[moved];
    let mut out = plan.clone();
    out.amrs[s.amr].trips[s.trip].remove(s.pos);
    let points: Vec<(usize, usize, usize)> = out
        .amrs
        .iter()
        .enumerate()
        .flat_map(|(a, amr)| {
            amr.trips
                .iter()
                .enumerate()
                .flat_map(move |(t, trip)| (0..=trip.len()).map(move |p| (a, t, p)))
        })
        .collect();
    let (a, t, p) = points[rng.random_range(0..points.len())];
    let trip = &out.amrs[a].trips[t];
    // Partner: the request now following the insertion point, else the one before it.
    let partner = trip
        .get(p)
        .or_else(|| p.checked_sub(1).and_then(|q| trip.get(q)))
        .copied()
        .unwrap_or_else(|| ids.iter().copied().find(|&r| r != moved).expect("two requests"));
    out.amrs[a].trips[t].insert(p, moved);
    out.prune();
    (out, Some(Move::new(Operator::Relocation, moved, partner)))
}

/// Unguided move of the given operator.
pub fn random_move<R: Rng + ?Sized>(op: Operator, plan: &Plan, n: usize, rng: &mut R) -> Applied {
    match op {
        Operator::Swap => random_swap(plan, n, rng),
        Operator::TwoOpt => random_two_opt(plan, rng),
        Operator::Relocation => random_relocation(plan, n, rng),
    }
}

/// Guided swap with the default violation threshold.
pub fn swap_star<R: Rng + ?Sized>(plan: &Plan, inst: &Instance, rng: &mut R) -> Applied {
    Guidance::default().swap_star(plan, inst, rng)
}

/// Guided segment reversal with the default violation threshold.
pub fn two_opt_star<R: Rng + ?Sized>(plan: &Plan, inst: &Instance, rng: &mut R) -> Applied {
    Guidance::default().two_opt_star(plan, inst, rng)
}

/// Guided relocation with the default violation threshold.
pub fn relocation_star<R: Rng + ?Sized>(plan: &Plan, inst: &Instance, rng: &mut R) -> Applied {
    Guidance::default().relocation_star(plan, inst, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::toy;
    use crate::schedule::{capacity_violations, evaluate, traces};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plan(amrs: &[&[&[usize]]]) -> Plan {
        Plan::new(
            amrs.iter()
                .map(|a| Amr::new(a.iter().map(|t| t.to_vec()).collect()))
                .collect(),
        )
    }

    fn line_instance(windows: &[(f64, f64)], demand: f64, capacity: f64) -> Instance {
        let reqs: Vec<_> = windows
            .iter()
            .enumerate()
            .map(|(k, &(e, h))| (10.0 * (k + 1) as f64, 0.0, 1, demand, e, h, 0.0))
            .collect();
        toy(&reqs, capacity, false)
    }

    #[test]
    fn repair_examples() {
        let inst = toy(
            &[(1.0, 0.0, 1, 150.0, 0.0, 1e4, 0.0), (2.0, 0.0, 1, 100.0, 0.0, 1e4, 0.0)],
            200.0,
            false,
        );
        let p = plan(&[&[&[1, 2]]]);
        assert_eq!(repair_depot_insertion(&p, &inst), plan(&[&[&[1], &[2]]]));

        let full = line_instance(&[(0.0, 1e4); 3], 200.0, 200.0);
        let p = plan(&[&[&[1, 2, 3]]]);
        assert_eq!(repair_depot_insertion(&p, &full), plan(&[&[&[1], &[2], &[3]]]));
    }

    #[test]
    fn feasible_plan_is_unchanged_by_repair() {
        let inst = line_instance(&[(0.0, 1e4); 3], 50.0, 200.0);
        let p = plan(&[&[&[3, 1], &[2]]]);
        assert_eq!(repair_depot_insertion(&p, &inst), p);
    }

    #[test]
    fn guided_swap_moves_the_violator_forward() {
        // Request 3's deadline is missed in position 3; request 1 ahead of it
        // has the loosest deadline.
        let inst = line_instance(&[(0.0, 5000.0), (0.0, 200.0), (0.0, 20.0)], 1.0, 100.0);
        let p = plan(&[&[&[1, 2, 3]]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (out, mv) = swap_star(&p, &inst, &mut rng);
        assert_eq!(out, plan(&[&[&[3, 2, 1]]]));
        assert_eq!(mv, Some(Move::new(Operator::Swap, 1, 3)));
    }

    #[test]
    fn on_time_swap_is_seeded_random() {
        let inst = line_instance(&[(0.0, 1e4); 4], 1.0, 100.0);
        let p = plan(&[&[&[1, 2, 3, 4]]]);
        let a = swap_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(9));
        let b = swap_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_ne!(a.0, p);
    }

    #[test]
    fn two_request_swap() {
        let inst = line_instance(&[(0.0, 1e4); 2], 1.0, 100.0);
        let p = plan(&[&[&[1, 2]]]);
        let (out, mv) = swap_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(out, plan(&[&[&[2, 1]]]));
        assert_eq!(mv.unwrap().pair(), (1, 2));
    }

    #[test]
    fn two_opt_reverses_decreasing_run() {
        let inst = line_instance(
            &[(10.0, 1e4), (300.0, 1e4), (250.0, 1e4), (200.0, 1e4), (400.0, 1e4)],
            1.0,
            100.0,
        );
        let p = plan(&[&[&[1, 2, 3, 4, 5]]]);
        let (out, mv) = two_opt_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out, plan(&[&[&[1, 4, 3, 2, 5]]]));
        assert_eq!(mv, Some(Move::new(Operator::TwoOpt, 2, 4)));
    }

    #[test]
    fn two_opt_random_fallback_and_null_move() {
        let inst = line_instance(&[(10.0, 1e4), (20.0, 1e4), (30.0, 1e4)], 1.0, 100.0);
        let p = plan(&[&[&[1, 2, 3]]]);
        let (out, mv) = two_opt_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(5));
        assert!(mv.is_some());
        assert_ne!(out, p);
        out.validate(3).unwrap();

        let singles = plan(&[&[&[1]], &[&[2], &[3]]]);
        let (out, mv) = two_opt_star(&singles, &inst, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(out, singles);
        assert_eq!(mv, None);
    }

    #[test]
    fn reversing_one_element_is_identity() {
        let inst = line_instance(&[(0.0, 1e4); 3], 1.0, 100.0);
        let p = plan(&[&[&[1, 2, 3]]]);
        let mut q = p.clone();
        q.amrs[0].trips[0][1..=1].reverse();
        assert_eq!(q, p);
        let slots = p.locate(3);
        assert!(two_opt_edit(&p, &slots, &inst, 1, 3).is_some());
    }

    #[test]
    fn guided_relocation_does_not_increase_lateness() {
        let inst = line_instance(&[(0.0, 5000.0), (0.0, 4000.0), (0.0, 25.0)], 1.0, 100.0);
        let p = plan(&[&[&[1, 2, 3]]]);
        let before = propagate(&p, &inst).lateness_by_request(3)[3];
        let (out, mv) = relocation_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(out, plan(&[&[&[3, 1, 2]]]));
        assert_eq!(mv, Some(Move::new(Operator::Relocation, 3, 1)));
        let after = propagate(&out, &inst).lateness_by_request(3)[3];
        assert!(after <= before);
        assert!(evaluate(&out, &inst).penalty <= evaluate(&p, &inst).penalty);
    }

    #[test]
    fn relocating_a_lone_request_removes_its_amr() {
        let inst = line_instance(&[(0.0, 1e4); 3], 1.0, 100.0);
        let p = plan(&[&[&[1, 2]], &[&[3]]]);
        let slots = p.locate(3);
        let out = relocate_edit(&p, &slots, &inst, 3, 1, Placement::Before).unwrap().apply(&p);
        assert_eq!(out, plan(&[&[&[3, 1, 2]]]));
        assert_eq!(out.fleet_size(), p.fleet_size() - 1);
        // Identity placements are skipped.
        assert!(relocate_edit(&p, &slots, &inst, 1, 2, Placement::Before).is_none());
        assert!(relocate_edit(&p, &slots, &inst, 2, 1, Placement::After).is_none());
    }

    #[test]
    fn on_time_relocation_is_seeded() {
        let inst = line_instance(&[(0.0, 1e4); 5], 1.0, 100.0);
        let p = plan(&[&[&[1, 2, 3]], &[&[4, 5]]]);
        let a = relocation_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(4));
        let b = relocation_star(&p, &inst, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        a.0.validate(5).unwrap();
    }

    #[test]
    fn edit_cost_matches_full_evaluation() {
        let inst = toy(
            &[
                (10.0, 5.0, 2, 30.0, 50.0, 100.0, 30.0),
                (0.0, 20.0, 4, 40.0, 0.0, 150.0, 30.0),
                (30.0, 20.0, 1, 50.0, 300.0, 400.0, 30.0),
                (5.0, 25.0, 3, 60.0, 0.0, 900.0, 30.0),
            ],
            100.0,
            true,
        );
        let p = plan(&[&[&[1, 2]], &[&[3], &[4]]]);
        let traces = traces(&p, &inst);
        for op in Operator::ALL {
            for c in scan_pairs(&p, &traces, &inst, op) {
                let applied = apply_candidate(&p, &inst, &c);
                applied.validate(4).unwrap();
                assert!(capacity_violations(&applied, &inst).is_empty());
                assert_eq!(evaluate(&applied, &inst), c.cost, "{op} {:?}", c.mv);
            }
        }
    }

    fn random_case(seed: u64) -> (Instance, Plan) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..10);
        let reqs: Vec<_> = (0..n)
            .map(|_| {
                let e = rng.random_range(0.0..300.0);
                (
                    rng.random_range(0.0..50.0),
                    rng.random_range(0.0..50.0),
                    rng.random_range(1..=6),
                    rng.random_range(10.0..100.0),
                    e,
                    e + rng.random_range(0.0..100.0),
                    10.0,
                )
            })
            .collect();
        let inst = toy(&reqs, 100.0, seed % 2 == 0);
        let mut ids: Vec<usize> = (1..=n).collect();
        use rand::seq::SliceRandom;
        ids.shuffle(&mut rng);
        let cut = rng.random_range(1..=n);
        let p = Plan::new(vec![Amr::new(vec![ids[..cut].to_vec()]), Amr::new(vec![ids[cut..].to_vec()])]);
        (inst, p)
    }

    proptest! {
        #[test]
        fn operators_preserve_requests_and_repair_fixes_load(seed in 0u64..2000) {
            let (inst, mut p) = random_case(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for step in 0..20 {
                let op = Operator::ALL[step % 3];
                let (next, _) = Guidance::default().apply(op, &p, &inst, &mut rng);
                prop_assert!(next.validate(inst.len()).is_ok());
                let repaired = repair_depot_insertion(&next, &inst);
                prop_assert!(repaired.validate(inst.len()).is_ok());
                prop_assert!(capacity_violations(&repaired, &inst).is_empty());
                prop_assert_eq!(repair_depot_insertion(&repaired, &inst), repaired.clone());
                p = repaired;
            }
        }
    }
}
