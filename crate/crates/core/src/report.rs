//! Result documents and delimited tables.

use crate::instance::{format_clock, Instance};
use crate::plan::Plan;
use crate::schedule::{propagate, CostBreakdown};
use crate::tabu::CurvePoint;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// One AMR of a plan with its arrival clock times (depot returns included)
/// and its service probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRow {
    pub no: usize,
    pub route: String,
    pub arrivals: Vec<String>,
    pub r: f64,
}

pub fn route_rows(plan: &Plan, inst: &Instance) -> Vec<RouteRow> {
    let schedule = propagate(plan, inst);
    plan.amrs
        .iter()
        .zip(&schedule.amrs)
        .enumerate()
        .map(|(k, (amr, s))| {
            let mut arrivals = Vec::new();
            for trip in &s.trips {
                for v in &trip.visits {
                    arrivals.push(format_clock(&inst.start_clock, v.arrival.mean));
                }
                arrivals.push(format_clock(&inst.start_clock, trip.return_time.mean));
            }
            RouteRow {
                no: k + 1,
                route: amr.route_string(),
                arrivals,
                r: s.service_probability(),
            }
        })
        .collect()
}

/// Tab-separated `No, Route, AT, r` listing.
pub fn format_route_table(rows: &[RouteRow]) -> String {
    let mut out = String::from("No\tRoute\tAT\tr\n");
    for row in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{:.4}", row.no, row.route, row.arrivals.join("-"), row.r);
    }
    out
}

/// Two-column CSV of a best-so-far curve.
pub fn format_curve(curve: &[CurvePoint]) -> String {
    let mut out = String::from("iteration,best_total\n");
    for p in curve {
        let _ = writeln!(out, "{},{}", p.iteration, p.best_total);
    }
    out
}

/// One solver run inside a results document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub cost: CostBreakdown,
    pub fleet: usize,
    pub r: f64,
    pub routes: Vec<RouteRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance: String,
    pub algorithm: String,
    pub f_avg: f64,
    pub f_bst: f64,
    pub best_run: usize,
    pub runs: Vec<RunRecord>,
}

impl SolveReport {
    pub fn new(instance: &str, algorithm: &str, runs: Vec<RunRecord>) -> Self {
        let totals: Vec<f64> = runs.iter().map(|r| r.cost.total).collect();
        let f_avg = totals.iter().sum::<f64>() / totals.len().max(1) as f64;
        let (best_run, f_bst) = totals
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) });
        SolveReport {
            instance: instance.to_string(),
            algorithm: algorithm.to_string(),
            f_avg,
            f_bst,
            best_run: runs.get(best_run).map_or(0, |r| r.run),
            runs,
        }
    }

    /// Tab-separated per-run summary with `avg` and `best` rows.
    pub fn summary_table(&self) -> String {
        let mut out = String::from("instance\talgorithm\trun\tseed\ttotal\tfixed\tpenalty\ttravel\tm\tr\n");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{:.4}",
                self.instance, self.algorithm, r.run, r.seed, r.cost.total, r.cost.fixed, r.cost.penalty, r.cost.travel, r.fleet, r.r
            );
        }
        let _ = writeln!(out, "{}\t{}\tF_avg\t\t{:.4}", self.instance, self.algorithm, self.f_avg);
        let _ = writeln!(out, "{}\t{}\tF_bst\t\t{:.4}", self.instance, self.algorithm, self.f_bst);
        out
    }
}

/// Percentage gap of `value` over `reference`.
pub fn gap_percent(value: f64, reference: f64) -> f64 {
    (value - reference) / reference * 100.0
}

/// Average objective per algorithm on one instance; `values[k]` belongs to
/// the k-th algorithm of the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub instance: String,
    pub values: Vec<f64>,
}

/// Comparison table: F_avg per algorithm and the gap `G'` of each algorithm
/// relative to the reference column, closed by an `Average` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub algorithms: Vec<String>,
    pub reference: usize,
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn gaps(&self, row: &CompareRow) -> Vec<f64> {
        let base = row.values[self.reference];
        row.values.iter().map(|&v| gap_percent(v, base)).collect()
    }

    /// Column means of values and gaps.
    pub fn averages(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.algorithms.len();
        let n = self.rows.len().max(1) as f64;
        let mut values = vec![0.0; k];
        let mut gaps = vec![0.0; k];
        for row in &self.rows {
            for (j, g) in self.gaps(row).into_iter().enumerate() {
                values[j] += row.values[j] / n;
                gaps[j] += g / n;
            }
        }
        (values, gaps)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("instance");
        for a in &self.algorithms {
            let _ = write!(out, "\tF_{a}");
        }
        for a in &self.algorithms {
            let _ = write!(out, "\tG'_{a}");
        }
        out.push('\n');
        let mut line = |name: &str, values: &[f64], gaps: &[f64]| {
            out.push_str(name);
            for v in values {
                let _ = write!(out, "\t{v:.4}");
            }
            for g in gaps {
                let _ = write!(out, "\t{g:.3}");
            }
            out.push('\n');
        };
        for row in &self.rows {
            line(&row.instance, &row.values, &self.gaps(row));
        }
        let (values, gaps) = self.averages();
        line("Average", &values, &gaps);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::toy;
    use crate::plan::Amr;

    #[test]
    fn route_rows_use_clock_times() {
        let inst = toy(&[(0.0, 100.0 / 1.1, 1, 1.0, 0.0, 1e4, 10.0)], 10.0, false);
        let plan = Plan::new(vec![Amr::new(vec![vec![1]])]);
        let rows = route_rows(&plan, &inst);
        assert_eq!(rows[0].route, "0-1-0");
        // 100 s out, 10 s service, 100 s back from 07:30.
        assert_eq!(rows[0].arrivals, vec!["07:31:40", "07:33:30"]);
        assert_eq!(rows[0].r, 1.0);
        let table = format_route_table(&rows);
        assert!(table.ends_with("1\t0-1-0\t07:31:40-07:33:30\t1.0000\n"));
    }

    #[test]
    fn compare_against_itself_has_zero_gaps() {
        let t = CompareTable {
            algorithms: vec!["its".into(), "its2".into(), "ts".into()],
            reference: 0,
            rows: vec![
                CompareRow {
                    instance: "a".into(),
                    values: vec![100.0, 100.0, 110.0],
                },
                CompareRow {
                    instance: "b".into(),
                    values: vec![200.0, 200.0, 190.0],
                },
            ],
        };
        let (_, gaps) = t.averages();
        assert_eq!(gaps[0], 0.0);
        assert_eq!(gaps[1], 0.0);
        assert!((gaps[2] - 2.5).abs() < 1e-12);
        let tsv = t.to_tsv();
        assert!(tsv.lines().last().unwrap().starts_with("Average\t150.0000"));
        assert_eq!(tsv.lines().count(), 4);
    }

    #[test]
    fn report_picks_best_run() {
        let run = |run, total| RunRecord {
            run,
            seed: run as u64,
            cost: CostBreakdown {
                total,
                ..CostBreakdown::default()
            },
            fleet: 1,
            r: 1.0,
            routes: vec![],
        };
        let rep = SolveReport::new("x", "its", vec![run(1, 5.0), run(2, 3.0), run(3, 4.0)]);
        assert_eq!(rep.best_run, 2);
        assert_eq!(rep.f_bst, 3.0);
        assert_eq!(rep.f_avg, 4.0);
    }
}
