//! Fleet plans: AMRs, each running an ordered list of depot-to-depot trips.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Request ids served in order between leaving and returning to the depot.
pub type Trip = Vec<usize>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Amr {
    pub trips: Vec<Trip>,
}

impl Amr {
    pub fn new(trips: Vec<Trip>) -> Self {
        Amr { trips }
    }

    pub fn requests(&self) -> impl Iterator<Item = usize> + '_ {
        self.trips.iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.trips.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.trips.iter().all(Vec::is_empty)
    }

    /// Drops empty trips.
    pub fn prune(&mut self) {
        self.trips.retain(|t| !t.is_empty());
    }

    /// Depot-delimited route string, e.g. `0-14-0-35-32-33-0`.
    pub fn route_string(&self) -> String {
        let mut parts = vec!["0".to_string()];
        for trip in &self.trips {
            parts.extend(trip.iter().map(usize::to_string));
            parts.push("0".to_string());
        }
        parts.join("-")
    }

    pub fn parse_route(route: &str) -> Result<Amr> {
        let mut trips = Vec::new();
        let mut current = Vec::new();
        let ids: Vec<&str> = route.split('-').map(str::trim).collect();
        if ids.len() < 2 || ids.first() != Some(&"0") || ids.last() != Some(&"0") {
            return Err(Error::InvalidPlan(format!("route must start and end at depot 0: {route:?}")));
        }
        for token in &ids[1..] {
            let id: usize = token
                .parse()
                .map_err(|_| Error::InvalidPlan(format!("bad id {token:?} in route {route:?}")))?;
            if id == 0 {
                if !current.is_empty() {
                    trips.push(std::mem::take(&mut current));
                }
            } else {
                current.push(id);
            }
        }
        Ok(Amr { trips })
    }
}

/// A complete assignment of requests to AMRs and trips.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PlanFile", into = "PlanFile")]
pub struct Plan {
    pub amrs: Vec<Amr>,
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    routes: Vec<String>,
}

impl TryFrom<PlanFile> for Plan {
    type Error = Error;

    fn try_from(f: PlanFile) -> Result<Plan> {
        let amrs = f.routes.iter().map(|r| Amr::parse_route(r)).collect::<Result<_>>()?;
        Ok(Plan { amrs })
    }
}

impl From<Plan> for PlanFile {
    fn from(p: Plan) -> PlanFile {
        PlanFile {
            routes: p.amrs.iter().map(Amr::route_string).collect(),
        }
    }
}

/// Where a request sits inside a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Slot {
    pub amr: usize,
    pub trip: usize,
    pub pos: usize,
}

impl Plan {
    pub fn new(amrs: Vec<Amr>) -> Self {
        let mut plan = Plan { amrs };
        plan.prune();
        plan
    }

    /// Number of AMRs in service.
    pub fn fleet_size(&self) -> usize {
        self.amrs.iter().filter(|a| !a.is_empty()).count()
    }

    pub fn request_count(&self) -> usize {
        self.amrs.iter().map(Amr::len).sum()
    }

    /// Removes empty trips and AMRs without trips.
    pub fn prune(&mut self) {
        for amr in &mut self.amrs {
            amr.prune();
        }
        self.amrs.retain(|a| !a.trips.is_empty());
    }

    /// Checks that requests `1..=n` each appear exactly once.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n + 1];
        for id in self.amrs.iter().flat_map(Amr::requests) {
            if id == 0 || id > n {
                return Err(Error::InvalidPlan(format!("unknown request id {id}")));
            }
            if std::mem::replace(&mut seen[id], true) {
                return Err(Error::InvalidPlan(format!("request {id} served twice")));
            }
        }
        if let Some(missing) = (1..=n).find(|&id| !seen[id]) {
            return Err(Error::InvalidPlan(format!("request {missing} not served")));
        }
        Ok(())
    }

    /// Slot of every request, indexed by request id (index 0 unused).
    pub fn locate(&self, n: usize) -> Vec<Slot> {
        let mut slots = vec![Slot::default(); n + 1];
        for (a, amr) in self.amrs.iter().enumerate() {
            for (t, trip) in amr.trips.iter().enumerate() {
                for (p, &id) in trip.iter().enumerate() {
                    slots[id] = Slot { amr: a, trip: t, pos: p };
                }
            }
        }
        slots
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Plan> {
        Ok(serde_json::from_str(text)?)
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, amr) in self.amrs.iter().enumerate() {
            writeln!(f, "{}: {}", k + 1, amr.route_string())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn route_strings_round_trip() {
        let amr = Amr::new(vec![vec![14], vec![35, 32, 33], vec![47, 41]]);
        assert_eq!(amr.route_string(), "0-14-0-35-32-33-0-47-41-0");
        assert_eq!(Amr::parse_route("0-14-0-35-32-33-0-47-41-0").unwrap(), amr);
        assert!(Amr::parse_route("14-0").is_err());
        assert!(Amr::parse_route("0-x-0").is_err());
    }

    #[test]
    fn validate_uniqueness() {
        let plan = Plan::new(vec![Amr::new(vec![vec![1, 2]]), Amr::new(vec![vec![3]])]);
        plan.validate(3).unwrap();
        assert!(plan.validate(4).is_err());
        let dup = Plan::new(vec![Amr::new(vec![vec![1, 2]]), Amr::new(vec![vec![2, 3]])]);
        assert!(dup.validate(3).is_err());
    }

    #[test]
    fn prune_drops_empty_amrs() {
        let plan = Plan::new(vec![Amr::new(vec![vec![], vec![1]]), Amr::new(vec![vec![]])]);
        assert_eq!(plan.amrs.len(), 1);
        assert_eq!(plan.amrs[0].trips, vec![vec![1]]);
        assert_eq!(plan.fleet_size(), 1);
    }

    #[test]
    fn json_uses_route_strings() {
        let plan = Plan::new(vec![Amr::new(vec![vec![2], vec![1, 3]])]);
        let text = plan.to_json();
        assert!(text.contains("0-2-0-1-3-0"));
        assert_eq!(Plan::from_json(&text).unwrap(), plan);
    }
}
