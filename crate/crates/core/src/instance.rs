//! Hospital instances: requests on floors, one elevator shaft, a time-zoned
//! speed profile and the three cost coefficients.
//!
//! Location id `0` is the depot (pharmacy); requests are numbered `1..=n`.
//! Every leg between two locations is a pair of a horizontal distance in
//! meters and a floor difference in levels. Legs between different floors
//! run through the elevator, whose shaft sits at the same (x, y) on every
//! floor.

use crate::error::{invalid, Error, Result};
use crate::gaussian::Gaussian;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const DEPOT: usize = 0;

/// One day, starting from the pharmacy opening time.
pub const DAY_SECONDS: f64 = 86_400.0;

pub const DEFAULT_START_CLOCK: &str = "07:30";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Depot {
    pub x: f64,
    pub y: f64,
    pub floor: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub floor: u32,
    /// Demand in kg.
    pub demand: f64,
    /// Hard earliest service start `e`.
    pub earliest: f64,
    /// Soft deadline `h`; arriving later is penalized.
    pub latest: f64,
    pub service: Gaussian,
}

/// Mean travel times that apply to departures in `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedZone {
    pub start: f64,
    pub end: f64,
    /// Mean seconds per meter of horizontal travel.
    pub road_mean: f64,
    /// Mean seconds per floor level of elevator travel.
    pub floor_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    pub zones: Vec<SpeedZone>,
    /// Variance of seconds per meter, shared by all zones.
    pub road_variance: f64,
    /// Variance of seconds per level, shared by all zones.
    pub floor_variance: f64,
}

impl SpeedProfile {
    /// Zone containing `departure`; times past the last zone use the last one.
    pub fn zone_at(&self, departure: f64) -> &SpeedZone {
        self.zones
            .iter()
            .find(|z| departure < z.end)
            .unwrap_or_else(|| self.zones.last().expect("profile has zones"))
    }

    fn validate(&self, horizon: f64) -> Result<()> {
        let Some(first) = self.zones.first() else {
            return Err(invalid("profile.zones", "no zones"));
        };
        if first.start != 0.0 {
            return Err(invalid("profile.zones", "first zone must start at 0"));
        }
        for pair in self.zones.windows(2) {
            if pair[0].end != pair[1].start {
                return Err(invalid("profile.zones", "zones must be contiguous and sorted"));
            }
        }
        for z in &self.zones {
            if !(z.end > z.start) {
                return Err(invalid("profile.zones", "zone end must exceed start"));
            }
            if !(z.road_mean > 0.0 && z.floor_mean > 0.0) {
                return Err(invalid("profile.zones", "speed means must be positive"));
            }
        }
        if self.zones.last().map(|z| z.end) < Some(horizon) {
            return Err(invalid("profile.zones", "zones must cover the horizon"));
        }
        if !(self.road_variance >= 0.0 && self.floor_variance >= 0.0) {
            return Err(invalid("profile", "variances must be nonnegative"));
        }
        Ok(())
    }
}

/// Cost coefficients of the daily objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costs {
    /// $ per AMR used.
    pub fleet: f64,
    /// $ per expected time-window violation.
    pub lateness: f64,
    /// $ per second of expected travel.
    pub travel: f64,
}

impl Default for Costs {
    fn default() -> Self {
        Costs {
            fleet: 30.0,
            lateness: 0.1,
            travel: 0.01,
        }
    }
}

/// Hospital traffic environment an instance is generated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Period {
    /// Morning peak.
    P1,
    /// Afternoon peak.
    P2,
    /// Off-peak.
    P3,
    /// Full-day stepwise profile: peaks at 08:00–12:00 and 14:00–16:00.
    Daily,
}

impl Period {
    /// `(seconds per meter, seconds per level)` means for the single-period
    /// environments.
    pub fn speed_means(self) -> (f64, f64) {
        match self {
            Period::P1 => (1.4, 3.2),
            Period::P2 => (1.3, 3.0),
            Period::P3 | Period::Daily => (1.1, 2.7),
        }
    }

    pub fn all() -> [Period; 3] {
        [Period::P1, Period::P2, Period::P3]
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Period::P1 => "P1",
            Period::P2 => "P2",
            Period::P3 => "P3",
            Period::Daily => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(Period::P1),
            "P2" => Ok(Period::P2),
            "P3" => Ok(Period::P3),
            "D" | "DAILY" => Ok(Period::Daily),
            other => Err(invalid("period", format!("unknown period {other:?}"))),
        }
    }
}

/// Seconds after `start_clock` ("HH:MM") at which wall-clock `clock` falls,
/// wrapping past midnight.
pub fn clock_offset(start_clock: &str, clock: &str) -> Result<f64> {
    let start = parse_clock(start_clock)?;
    let at = parse_clock(clock)?;
    Ok((at - start).rem_euclid(DAY_SECONDS))
}

fn parse_clock(clock: &str) -> Result<f64> {
    let (h, m) = clock
        .split_once(':')
        .ok_or_else(|| invalid("clock", format!("expected HH:MM, got {clock:?}")))?;
    let h: u32 = h.trim().parse().map_err(|_| invalid("clock", clock.to_string()))?;
    let m: u32 = m.trim().parse().map_err(|_| invalid("clock", clock.to_string()))?;
    if h > 23 || m > 59 {
        return Err(invalid("clock", clock.to_string()));
    }
    Ok(f64::from(h * 3600 + m * 60))
}

/// Renders `seconds` after `start_clock` as a wall-clock time `HH:MM:SS`.
pub fn format_clock(start_clock: &str, seconds: f64) -> String {
    let start = parse_clock(start_clock).unwrap_or(0.0);
    let total = (start + seconds).round().rem_euclid(DAY_SECONDS) as u64;
    format!("{:02}:{:02}:{:02}", total / 3600, (total / 60) % 60, total % 60)
}

/// The stepwise hospital profile: zone boundaries at 08:00, 12:00, 14:00 and
/// 16:00, expressed relative to `start_clock`.
pub fn hospital_profile(period: Period, start_clock: &str, horizon: f64) -> Result<SpeedProfile> {
    let mut cuts = Vec::new();
    for clock in ["08:00", "12:00", "14:00", "16:00"] {
        let t = clock_offset(start_clock, clock)?;
        if t > 0.0 && t < horizon {
            cuts.push((t, clock));
        }
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Environment in force from each cut onwards; before the first cut the
    // clock is off-peak unless the day starts inside a peak.
    let env_after = |clock: &str| match clock {
        "08:00" => Period::P1,
        "14:00" => Period::P2,
        _ => Period::P3,
    };
    let start_env = {
        let secs = parse_clock(start_clock)?;
        if (8.0 * 3600.0..12.0 * 3600.0).contains(&secs) {
            Period::P1
        } else if (14.0 * 3600.0..16.0 * 3600.0).contains(&secs) {
            Period::P2
        } else {
            Period::P3
        }
    };

    let mut zones = Vec::new();
    let mut start = 0.0;
    let mut env = start_env;
    for (t, clock) in cuts.into_iter().chain(std::iter::once((horizon, ""))) {
        let speeds = if period == Period::Daily {
            env.speed_means()
        } else {
            period.speed_means()
        };
        zones.push(SpeedZone {
            start,
            end: t,
            road_mean: speeds.0,
            floor_mean: speeds.1,
        });
        start = t;
        if !clock.is_empty() {
            env = env_after(clock);
        }
    }
    Ok(SpeedProfile {
        zones,
        road_variance: 0.15,
        floor_variance: 0.5,
    })
}

/// Serialized form of an [`Instance`]; validated on conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    start_clock: String,
    horizon: f64,
    depot: Depot,
    elevator: Point,
    capacity: f64,
    costs: Costs,
    profile: SpeedProfile,
    #[serde(default)]
    floor_seed: Option<u64>,
    requests: Vec<Request>,
}

/// A validated, immutable problem instance with a precomputed leg table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub name: String,
    /// Wall-clock time of t = 0.
    pub start_clock: String,
    pub horizon: f64,
    pub depot: Depot,
    pub elevator: Point,
    /// Load capacity Q in kg.
    pub capacity: f64,
    pub costs: Costs,
    pub profile: SpeedProfile,
    /// Seed used to draw request floors, when generated.
    pub floor_seed: Option<u64>,
    pub requests: Vec<Request>,
    legs: Vec<Leg>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Leg {
    meters: f64,
    levels: u32,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        Instance::new(InstanceParts {
            name: f.name,
            start_clock: f.start_clock,
            horizon: f.horizon,
            depot: f.depot,
            elevator: f.elevator,
            capacity: f.capacity,
            costs: f.costs,
            profile: f.profile,
            floor_seed: f.floor_seed,
            requests: f.requests,
        })
    }
}

impl From<Instance> for InstanceFile {
    fn from(i: Instance) -> Self {
        InstanceFile {
            name: i.name,
            start_clock: i.start_clock,
            horizon: i.horizon,
            depot: i.depot,
            elevator: i.elevator,
            capacity: i.capacity,
            costs: i.costs,
            profile: i.profile,
            floor_seed: i.floor_seed,
            requests: i.requests,
        }
    }
}

/// Everything needed to build an [`Instance`].
#[derive(Debug, Clone)]
pub struct InstanceParts {
    pub name: String,
    pub start_clock: String,
    pub horizon: f64,
    pub depot: Depot,
    pub elevator: Point,
    pub capacity: f64,
    pub costs: Costs,
    pub profile: SpeedProfile,
    pub floor_seed: Option<u64>,
    pub requests: Vec<Request>,
}

impl Instance {
    pub fn new(parts: InstanceParts) -> Result<Self> {
        let InstanceParts {
            name,
            start_clock,
            horizon,
            depot,
            elevator,
            capacity,
            costs,
            profile,
            floor_seed,
            requests,
        } = parts;
        parse_clock(&start_clock)?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive"));
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(invalid("capacity", "must be positive"));
        }
        if !(costs.fleet > costs.lateness && costs.lateness > costs.travel && costs.travel >= 0.0) {
            return Err(invalid("costs", "expected fleet > lateness > travel >= 0"));
        }
        profile.validate(horizon)?;
        for (k, r) in requests.iter().enumerate() {
            if r.id != k + 1 {
                return Err(invalid(
                    "requests",
                    format!("ids must be contiguous from 1; position {} has id {}", k + 1, r.id),
                ));
            }
            if !(r.demand > 0.0) {
                return Err(invalid("requests.demand", format!("request {} has nonpositive demand", r.id)));
            }
            if r.demand > capacity {
                return Err(Error::InfeasibleDemand {
                    id: r.id,
                    demand: r.demand,
                    capacity,
                });
            }
            if !(0.0 <= r.earliest && r.earliest <= r.latest && r.latest <= horizon) {
                return Err(invalid(
                    "requests.window",
                    format!("request {} needs 0 <= earliest <= latest <= horizon", r.id),
                ));
            }
            if !(r.service.mean >= 0.0 && r.service.variance >= 0.0) {
                return Err(invalid("requests.service", format!("request {}", r.id)));
            }
        }

        let mut inst = Instance {
            name,
            start_clock,
            horizon,
            depot,
            elevator,
            capacity,
            costs,
            profile,
            floor_seed,
            requests,
            legs: Vec::new(),
        };
        inst.legs = inst.build_legs();
        Ok(inst)
    }

    fn build_legs(&self) -> Vec<Leg> {
        let n = self.requests.len() + 1;
        let mut legs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (pi, fi) = self.position(i);
                let (pj, fj) = self.position(j);
                let levels = fi.abs_diff(fj);
                let meters = if i == j {
                    0.0
                } else if levels == 0 {
                    pi.dist(&pj)
                } else {
                    pi.dist(&self.elevator) + self.elevator.dist(&pj)
                };
                legs.push(Leg { meters, levels });
            }
        }
        legs
    }

    fn position(&self, id: usize) -> (Point, u32) {
        if id == DEPOT {
            (Point { x: self.depot.x, y: self.depot.y }, self.depot.floor)
        } else {
            let r = &self.requests[id - 1];
            (Point { x: r.x, y: r.y }, r.floor)
        }
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Request with 1-based `id`. Panics on the depot or an unknown id.
    pub fn request(&self, id: usize) -> &Request {
        &self.requests[id - 1]
    }

    /// `(meters, levels)` between two locations.
    pub fn distance(&self, i: usize, j: usize) -> Result<(f64, u32)> {
        let n = self.requests.len() + 1;
        for id in [i, j] {
            if id >= n {
                return Err(Error::UnknownLocation(id));
            }
        }
        let leg = self.legs[i * n + j];
        Ok((leg.meters, leg.levels))
    }

    /// Travel time distribution from `i` to `j` for a departure at `departure`
    /// seconds. Ids must be valid.
    #[inline]
    pub fn travel_time(&self, i: usize, j: usize, departure: f64) -> Gaussian {
        let n = self.requests.len() + 1;
        let leg = self.legs[i * n + j];
        let zone = self.profile.zone_at(departure);
        let levels = f64::from(leg.levels);
        Gaussian {
            mean: leg.meters * zone.road_mean + levels * zone.floor_mean,
            variance: leg.meters * leg.meters * self.profile.road_variance
                + levels * levels * self.profile.floor_variance,
        }
    }

    /// Same instance with every variance set to zero.
    pub fn deterministic(&self) -> Instance {
        let mut out = self.clone();
        out.profile.road_variance = 0.0;
        out.profile.floor_variance = 0.0;
        for r in &mut out.requests {
            r.service.variance = 0.0;
        }
        out
    }

    /// Keeps only the first `n` requests.
    pub fn truncated(&self, n: usize) -> Result<Instance> {
        if n > self.len() {
            return Err(Error::TooManyRequests {
                requested: n,
                available: self.len(),
            });
        }
        let mut parts = self.to_parts();
        parts.requests.truncate(n);
        Instance::new(parts)
    }

    pub fn to_parts(&self) -> InstanceParts {
        InstanceParts {
            name: self.name.clone(),
            start_clock: self.start_clock.clone(),
            horizon: self.horizon,
            depot: self.depot,
            elevator: self.elevator,
            capacity: self.capacity,
            costs: self.costs,
            profile: self.profile.clone(),
            floor_seed: self.floor_seed,
            requests: self.requests.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Uniform-speed instance with Table-like coefficients; `reqs` are
    /// `(x, y, floor, demand, earliest, latest, service)`.
    pub fn toy(reqs: &[(f64, f64, u32, f64, f64, f64, f64)], capacity: f64, stochastic: bool) -> Instance {
        let requests = reqs
            .iter()
            .enumerate()
            .map(|(k, &(x, y, floor, demand, e, h, s))| Request {
                id: k + 1,
                x,
                y,
                floor,
                demand,
                earliest: e,
                latest: h,
                service: Gaussian::new(s, if stochastic { 15.0 } else { 0.0 }),
            })
            .collect();
        let mut profile = hospital_profile(Period::P3, DEFAULT_START_CLOCK, DAY_SECONDS).unwrap();
        if !stochastic {
            profile.road_variance = 0.0;
            profile.floor_variance = 0.0;
        }
        Instance::new(InstanceParts {
            name: "toy".into(),
            start_clock: DEFAULT_START_CLOCK.into(),
            horizon: DAY_SECONDS,
            depot: Depot { x: 0.0, y: 0.0, floor: 1 },
            elevator: Point { x: 3.0, y: 4.0 },
            capacity,
            costs: Costs::default(),
            profile,
            floor_seed: None,
            requests,
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::toy;
    use super::*;

    #[test]
    fn distance_examples() {
        let inst = toy(
            &[
                (3.0, 4.0, 1, 1.0, 0.0, 100.0, 0.0),
                (0.0, 0.0, 2, 1.0, 0.0, 100.0, 0.0),
                (0.0, 0.0, 5, 1.0, 0.0, 100.0, 0.0),
            ],
            10.0,
            false,
        );
        assert_eq!(inst.distance(1, 1).unwrap(), (0.0, 0));
        assert_eq!(inst.distance(0, 1).unwrap(), (5.0, 0));
        // Two floors apart at the same spot: out to the elevator and back.
        assert_eq!(inst.distance(2, 3).unwrap(), (10.0, 3));
        assert_eq!(inst.distance(3, 2).unwrap(), (10.0, 3));
        assert!(matches!(inst.distance(0, 4), Err(Error::UnknownLocation(4))));
    }

    fn leg_instance(period: Period) -> Instance {
        // Request 1 on floor 1 at 100 m, request 2 two floors up beside the elevator.
        let mut inst = toy(
            &[(100.0, 0.0, 1, 1.0, 0.0, 10.0, 0.0), (0.0, 0.0, 3, 1.0, 0.0, 10.0, 0.0)],
            10.0,
            true,
        );
        inst.elevator = Point { x: 0.0, y: 0.0 };
        inst.profile = hospital_profile(period, DEFAULT_START_CLOCK, DAY_SECONDS).unwrap();
        inst.legs = inst.build_legs();
        inst
    }

    #[test]
    fn travel_time_examples() {
        // d = 100 m, |f| = 2.
        let p1 = leg_instance(Period::P1);
        assert_eq!(p1.distance(1, 2).unwrap(), (100.0, 2));
        let t = p1.travel_time(1, 2, 0.0);
        assert!((t.mean - 146.4).abs() < 1e-9);
        assert!((t.variance - 1502.0).abs() < 1e-9);

        let p3 = leg_instance(Period::P3);
        let t = p3.travel_time(1, 2, 5000.0);
        assert!((t.mean - 115.4).abs() < 1e-9);
        assert!((t.variance - 1502.0).abs() < 1e-9);

        assert_eq!(p3.travel_time(2, 2, 0.0), Gaussian::ZERO);
    }

    #[test]
    fn zone_boundaries_follow_the_clock() {
        assert_eq!(clock_offset("07:30", "08:00").unwrap(), 1800.0);
        assert_eq!(clock_offset("07:30", "12:00").unwrap(), 16200.0);
        assert_eq!(clock_offset("07:30", "14:00").unwrap(), 23400.0);
        assert_eq!(clock_offset("07:30", "16:00").unwrap(), 30600.0);

        let daily = hospital_profile(Period::Daily, "07:30", DAY_SECONDS).unwrap();
        let starts: Vec<f64> = daily.zones.iter().map(|z| z.start).collect();
        assert_eq!(starts, vec![0.0, 1800.0, 16200.0, 23400.0, 30600.0]);
        assert_eq!(daily.zone_at(1799.0).road_mean, 1.1);
        assert_eq!(daily.zone_at(1800.0).road_mean, 1.4);
        assert_eq!(daily.zone_at(23400.0).road_mean, 1.3);
        assert_eq!(daily.zone_at(30600.0).road_mean, 1.1);
        assert_eq!(daily.zone_at(1e9).road_mean, 1.1);
    }

    #[test]
    fn clock_rendering() {
        assert_eq!(format_clock("07:30", 35.0 + 1800.0), "08:00:35");
        assert_eq!(format_clock("07:30", 86_399.6), "07:30:00");
    }

    #[test]
    fn json_round_trip_and_errors() {
        let inst = toy(&[(1.0, 2.0, 3, 4.0, 5.0, 60.0, 7.0)], 10.0, false);
        let text = inst.to_json();
        assert_eq!(Instance::from_json(&text).unwrap(), inst);

        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value.as_object_mut().unwrap().remove("capacity");
        let err = Instance::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("capacity"), "{err}");
    }

    #[test]
    fn rejects_overweight_request() {
        let mut parts = toy(&[(1.0, 2.0, 3, 4.0, 5.0, 60.0, 7.0)], 10.0, false).to_parts();
        parts.requests[0].demand = 11.0;
        assert!(matches!(Instance::new(parts), Err(Error::InfeasibleDemand { id: 1, .. })));
    }
}
