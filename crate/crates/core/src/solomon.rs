//! Solomon VRPTW text files and their conversion into hospital instances.
//!
//! The reader accepts the standard layout (name line, `VEHICLE` section with
//! `NUMBER CAPACITY`, `CUSTOMER` section with seven numeric columns, row 0 the
//! depot) and does not care how many customers follow.

use crate::error::{invalid, Error, Result};
use crate::gaussian::Gaussian;
use crate::instance::{
    hospital_profile, Costs, Depot, Instance, InstanceParts, Period, Point, Request, DAY_SECONDS,
    DEFAULT_START_CLOCK,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolomonRow {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub demand: f64,
    pub ready: f64,
    pub due: f64,
    pub service: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub name: String,
    pub vehicles: usize,
    pub capacity: f64,
    pub depot: SolomonRow,
    pub customers: Vec<SolomonRow>,
}

pub fn parse_solomon(text: &str) -> Result<RawInstance> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let name = loop {
        match lines.next() {
            Some((_, "")) => continue,
            Some((_, l)) => break l.to_string(),
            None => return Err(Error::NoHeader),
        }
    };

    enum Section {
        Preamble,
        Vehicle,
        Customer,
    }
    let mut section = Section::Preamble;
    let mut vehicle: Option<(usize, f64)> = None;
    let mut rows = Vec::new();

    for (line, content) in lines {
        if content.is_empty() {
            continue;
        }
        let upper = content.to_ascii_uppercase();
        if upper.starts_with("VEHICLE") {
            section = Section::Vehicle;
            continue;
        }
        if upper.starts_with("CUSTOMER") {
            section = Section::Customer;
            continue;
        }
        let starts_numeric = content
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '.');
        if !starts_numeric {
            // Column headings.
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::Preamble => {
                return Err(Error::Parse {
                    line,
                    message: "numeric data before VEHICLE/CUSTOMER section".into(),
                })
            }
            Section::Vehicle => {
                if fields.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected NUMBER CAPACITY, found {} fields", fields.len()),
                    });
                }
                let number = parse_num(fields[0], line)? as usize;
                let capacity = parse_num(fields[1], line)?;
                vehicle = Some((number, capacity));
            }
            Section::Customer => {
                if fields.len() != 7 {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected 7 customer fields, found {}", fields.len()),
                    });
                }
                let v: Vec<f64> = fields
                    .iter()
                    .map(|f| parse_num(f, line))
                    .collect::<Result<_>>()?;
                if v[0] < 0.0 || v[0].fract() != 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("bad customer number {}", fields[0]),
                    });
                }
                rows.push(SolomonRow {
                    id: v[0] as usize,
                    x: v[1],
                    y: v[2],
                    demand: v[3],
                    ready: v[4],
                    due: v[5],
                    service: v[6],
                });
            }
        }
    }

    let (vehicles, capacity) = vehicle.ok_or(Error::MissingCapacity)?;
    if rows.is_empty() {
        return Err(invalid("customers", "no depot row"));
    }
    let depot = rows.remove(0);
    Ok(RawInstance {
        name,
        vehicles,
        capacity,
        depot,
        customers: rows,
    })
}

fn parse_num(field: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("not a number: {field:?}"),
        })
}

/// Writes `raw` in the standard Solomon layout.
pub fn write_solomon(raw: &RawInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}\n\nVEHICLE\nNUMBER     CAPACITY", raw.name);
    let _ = writeln!(out, "{:>5}{:>13}\n", raw.vehicles, raw.capacity);
    let _ = writeln!(out, "CUSTOMER");
    let _ = writeln!(
        out,
        "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME\n"
    );
    for r in std::iter::once(&raw.depot).chain(&raw.customers) {
        let _ = writeln!(
            out,
            "{:>5}{:>11}{:>11}{:>11}{:>11}{:>11}{:>11}",
            r.id, r.x, r.y, r.demand, r.ready, r.due, r.service
        );
    }
    out
}

/// Knobs for turning a Solomon file into a hospital instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendOptions {
    /// Seconds per Solomon time unit.
    pub time_scale: f64,
    /// Variance of every request's service time, s².
    pub service_variance: f64,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            time_scale: 1.0,
            service_variance: 15.0,
        }
    }
}

/// Builds the `<period>-<base>-<n>` hospital instance from the first `n`
/// customers of `raw`.
///
/// Floors 1–6 are drawn for every customer in file order from `seed`, so the
/// 20- and 50-request truncations share floors with the full instance. The
/// elevator shaft sits at the center of the bounding box of all points in the
/// file; the depot is on floor 1.
pub fn extend_instance(raw: &RawInstance, period: Period, n: usize, seed: u64, opts: ExtendOptions) -> Result<Instance> {
    if n > raw.customers.len() {
        return Err(Error::TooManyRequests {
            requested: n,
            available: raw.customers.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floors: Vec<u32> = raw.customers.iter().map(|_| rng.random_range(1..=6)).collect();

    let all = std::iter::once(&raw.depot).chain(&raw.customers);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for r in all {
        x0 = x0.min(r.x);
        x1 = x1.max(r.x);
        y0 = y0.min(r.y);
        y1 = y1.max(r.y);
    }
    let elevator = Point {
        x: (x0 + x1) / 2.0,
        y: (y0 + y1) / 2.0,
    };

    let horizon = DAY_SECONDS;
    let clamp = |t: f64| (t * opts.time_scale).clamp(0.0, horizon);
    let requests = raw.customers[..n]
        .iter()
        .zip(&floors)
        .enumerate()
        .map(|(k, (c, &floor))| Request {
            id: k + 1,
            x: c.x,
            y: c.y,
            floor,
            demand: c.demand,
            earliest: clamp(c.ready),
            latest: clamp(c.due).max(clamp(c.ready)),
            service: Gaussian::new(c.service * opts.time_scale, opts.service_variance),
        })
        .collect();

    let mut profile = hospital_profile(period, DEFAULT_START_CLOCK, horizon)?;
    profile.road_variance = 0.15;
    profile.floor_variance = 0.5;

    Instance::new(InstanceParts {
        name: format!("{period}-{}-{n}", raw.name.trim()),
        start_clock: DEFAULT_START_CLOCK.to_string(),
        horizon,
        depot: Depot {
            x: raw.depot.x,
            y: raw.depot.y,
            floor: 1,
        },
        elevator,
        capacity: raw.capacity,
        costs: Costs::default(),
        profile,
        floor_seed: Some(seed),
        requests,
    })
}

/// Solomon benchmark families used by the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    C1,
    C2,
    R1,
    R2,
    RC1,
    RC2,
}

impl Family {
    /// Type-1 families have narrow windows and short horizons.
    pub fn is_narrow(self) -> bool {
        matches!(self, Family::C1 | Family::R1 | Family::RC1)
    }

    pub fn of_name(name: &str) -> Option<Family> {
        let upper = name.to_ascii_uppercase();
        let fam = if upper.starts_with("RC1") {
            Family::RC1
        } else if upper.starts_with("RC2") {
            Family::RC2
        } else if upper.starts_with("C1") {
            Family::C1
        } else if upper.starts_with("C2") {
            Family::C2
        } else if upper.starts_with("R1") {
            Family::R1
        } else if upper.starts_with("R2") {
            Family::R2
        } else {
            return None;
        };
        Some(fam)
    }
}

/// The six base instances of the experiment grid.
pub const BASE_INSTANCES: [&str; 6] = ["C108", "C208", "R101", "R202", "RC101", "RC202"];

/// Synthetic base file `base` of the experiment grid under `seed`: the k-th
/// base in [`BASE_INSTANCES`] is synthesized with `seed + k`.
pub fn grid_base(base: &str, seed: u64) -> Result<RawInstance> {
    let k = BASE_INSTANCES
        .iter()
        .position(|b| b.eq_ignore_ascii_case(base))
        .ok_or_else(|| invalid("base", format!("{base:?} is not a grid base")))?;
    synthesize(base, seed.wrapping_add(k as u64))
}

/// The `<period>-<base>-<n>` grid instance, with floors drawn from `seed`.
pub fn grid_instance(base: &str, period: Period, n: usize, seed: u64) -> Result<Instance> {
    extend_instance(&grid_base(base, seed)?, period, n, seed, ExtendOptions::default())
}

/// Generates a 100-customer file in the style of a Solomon family: clustered
/// (C), uniform (R) or mixed (RC) locations on a 100×100 grid, the family's
/// capacity, horizon, service time and window width. Windows are centered on
/// times reachable directly from the depot, as in the original generator.
pub fn synthesize(name: &str, seed: u64) -> Result<RawInstance> {
    let family = Family::of_name(name).ok_or_else(|| invalid("name", format!("unknown family for {name:?}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // (depot, capacity, horizon, service, half window width, share of
    // customers with an unconstrained window)
    let (depot, capacity, horizon, service, half_width, open_share) = match family {
        Family::C1 => ((40.0, 50.0), 200.0, 1236.0, 90.0, 90.0, 0.0),
        Family::C2 => ((40.0, 50.0), 700.0, 3390.0, 90.0, 320.0, 0.0),
        Family::R1 => ((35.0, 35.0), 200.0, 230.0, 10.0, 5.0, 0.0),
        Family::R2 => ((35.0, 35.0), 1000.0, 1000.0, 10.0, 60.0, 0.25),
        Family::RC1 => ((40.0, 50.0), 200.0, 240.0, 10.0, 15.0, 0.0),
        Family::RC2 => ((40.0, 50.0), 1000.0, 960.0, 10.0, 60.0, 0.25),
    };

    let clustered = |rng: &mut ChaCha8Rng, centers: &[(f64, f64)]| {
        let (cx, cy) = centers[rng.random_range(0..centers.len())];
        let x: f64 = cx + rng.random_range(-6.0..6.0);
        let y: f64 = cy + rng.random_range(-6.0..6.0);
        (x.clamp(0.0, 100.0).round(), y.clamp(0.0, 100.0).round())
    };
    let uniform = |rng: &mut ChaCha8Rng| (rng.random_range(0..=100) as f64, rng.random_range(0..=100) as f64);

    let centers: Vec<(f64, f64)> = (0..10)
        .map(|_| (rng.random_range(10.0..90.0f64).round(), rng.random_range(10.0..90.0f64).round()))
        .collect();

    let mut customers = Vec::with_capacity(100);
    for id in 1..=100 {
        let (x, y) = match family {
            Family::C1 | Family::C2 => clustered(&mut rng, &centers),
            Family::R1 | Family::R2 => uniform(&mut rng),
            Family::RC1 | Family::RC2 => {
                if id % 2 == 0 {
                    clustered(&mut rng, &centers[..5])
                } else {
                    uniform(&mut rng)
                }
            }
        };
        let demand = match family {
            Family::C1 | Family::C2 => (rng.random_range(1..=4) * 10) as f64,
            _ => rng.random_range(1..=41) as f64,
        };
        let reach = (x - depot.0).hypot(y - depot.1);
        let latest_start = (horizon - reach - service).max(reach + 1.0);
        let (ready, due) = if rng.random_bool(open_share) {
            (0.0, horizon)
        } else {
            let center: f64 = rng.random_range(reach..=latest_start);
            let ready = (center - half_width).max(0.0).round();
            let due = (center + half_width).min(horizon).round().max(ready + 1.0);
            (ready, due)
        };
        customers.push(SolomonRow {
            id,
            x,
            y,
            demand,
            ready,
            due,
            service,
        });
    }

    Ok(RawInstance {
        name: name.to_string(),
        vehicles: 25,
        capacity,
        depot: SolomonRow {
            id: 0,
            x: depot.0,
            y: depot.1,
            demand: 0.0,
            ready: 0.0,
            due: horizon,
            service: 0.0,
        },
        customers,
    })
}
