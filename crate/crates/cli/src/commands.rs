use crate::{CompareArgs, GenerateArgs, SearchArgs, SimulateArgs, SolveArgs};
use amr_core::montecarlo::McReport;
use amr_core::report::{format_curve, format_route_table, route_rows, CompareRow, CompareTable, RunRecord, SolveReport};
use amr_core::runner::RunOutcome;
use amr_core::schedule::service_probability;
use amr_core::solomon::{extend_instance, grid_base, parse_solomon, write_solomon, ExtendOptions, BASE_INSTANCES};
use amr_core::{simulate_plan, solve_runs, Algorithm, Instance, Period, Plan, SearchParams};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Candidates per iteration for `--scan sampled` without an explicit size.
pub const DEFAULT_SAMPLE: usize = 100;

pub const SWEEP_SIZES: [usize; 3] = [20, 50, 100];

/// Marks errors caused by bad flags rather than bad input.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        1
    } else {
        2
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn synth_solomon(out: &Path, seed: u64) -> Result<()> {
    for base in BASE_INSTANCES {
        let raw = grid_base(base, seed)?;
        let path = out.join(format!("{base}.txt"));
        write(&path, &write_solomon(&raw))?;
        println!("{}", path.display());
    }
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    if !(a.time_scale > 0.0 && a.time_scale.is_finite()) {
        return Err(usage("--time-scale must be positive"));
    }
    let jobs: Vec<(PathBuf, Period, usize)> = if a.sweep {
        BASE_INSTANCES
            .iter()
            .flat_map(|base| {
                let file = a.solomon.join(format!("{base}.txt"));
                Period::all()
                    .into_iter()
                    .flat_map(move |p| SWEEP_SIZES.map(|n| (file.clone(), p, n)))
            })
            .collect()
    } else {
        vec![(a.solomon.clone(), a.period, a.n)]
    };
    for (file, period, n) in jobs {
        let raw = parse_solomon(&read(&file)?).with_context(|| format!("parsing {}", file.display()))?;
        let opts = ExtendOptions {
            time_scale: a.time_scale,
            ..ExtendOptions::default()
        };
        let inst = extend_instance(&raw, period, n, a.seed, opts)?;
        let path = a.out.join(format!("{}.json", inst.name));
        write(&path, &inst.to_json())?;
        println!("{}", path.display());
    }
    Ok(())
}

fn search_params(s: &SearchArgs) -> Result<SearchParams> {
    let params = SearchParams {
        tenure: s.tenure,
        iterations: s.iterations,
        delta1: s.delta1,
        delta2: s.delta2,
        seed: s.seed,
        scan: s.scan,
        decrement: s.decrement,
        ..SearchParams::default()
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    if s.runs == 0 {
        return Err(usage("--runs must be positive"));
    }
    Ok(params)
}

/// Deterministic solvers run once; their single result stands for every run.
fn runs_for(alg: Algorithm, runs: usize) -> usize {
    if alg.is_randomized() {
        runs
    } else {
        1
    }
}

fn records(inst: &Instance, outcomes: &[RunOutcome]) -> Vec<RunRecord> {
    outcomes
        .iter()
        .map(|o| RunRecord {
            run: o.run,
            seed: o.seed,
            cost: o.result.cost,
            fleet: o.result.plan.fleet_size(),
            r: service_probability(&o.result.plan, inst).0,
            routes: route_rows(&o.result.plan, inst),
        })
        .collect()
}

fn write_curves(dir: &Path, stem: &str, outcomes: &[RunOutcome]) -> Result<()> {
    for o in outcomes {
        write(&dir.join(format!("{stem}-run{}.csv", o.run)), &format_curve(&o.result.curve))?;
    }
    Ok(())
}

fn mean_seconds(outcomes: &[RunOutcome]) -> f64 {
    let total: Duration = outcomes.iter().map(|o| o.elapsed).sum();
    total.as_secs_f64() / outcomes.len().max(1) as f64
}

/// Everything `solve` reports except wall-clock times, which vary between
/// runs and go to a separate file.
#[derive(Serialize, Deserialize)]
pub struct SolveDocument {
    pub params: SearchParams,
    #[serde(flatten)]
    pub report: SolveReport,
    pub best_plan: Plan,
    #[serde(skip_serializing_if = "Option::is_none", skip_deserializing)]
    pub simulation: Option<McReport>,
}

pub fn solve(a: &SolveArgs) -> Result<()> {
    let params = search_params(&a.search)?;
    if a.mc_samples == Some(0) {
        return Err(usage("--mc-samples must be positive"));
    }
    let inst = load_instance(&a.instance)?;
    let outcomes = solve_runs(&inst, a.algorithm, &params, runs_for(a.algorithm, a.search.runs))?;
    let report = SolveReport::new(&inst.name, a.algorithm.name(), records(&inst, &outcomes));
    let best = &outcomes[report.best_run - 1].result.plan;
    let simulation = match a.mc_samples {
        Some(samples) => Some(simulate_plan(best, &inst, samples, params.seed)?),
        None => None,
    };
    let stem = format!("{}-{}", inst.name, a.algorithm);

    let mut timing = String::from("run\tseconds\n");
    for o in &outcomes {
        let _ = writeln!(timing, "{}\t{:.6}", o.run, o.elapsed.as_secs_f64());
    }
    let _ = writeln!(timing, "mean\t{:.6}", mean_seconds(&outcomes));

    if let Some(dir) = &a.search.curve_out {
        write_curves(dir, &stem, &outcomes)?;
    }
    let summary = report.summary_table();
    let routes = format_route_table(&report.runs[report.best_run - 1].routes);
    let doc = SolveDocument {
        params,
        best_plan: best.clone(),
        report,
        simulation,
    };
    match &a.out {
        Some(dir) => {
            write(&dir.join(format!("{stem}.json")), &to_json(&doc))?;
            write(&dir.join(format!("{stem}.tsv")), &summary)?;
            write(&dir.join(format!("{stem}-routes.tsv")), &routes)?;
            write(&dir.join(format!("{stem}.timing.tsv")), &timing)?;
        }
        None => eprint!("{timing}"),
    }
    print!("{summary}");
    println!();
    print!("{routes}");
    if let Some(sim) = &doc.simulation {
        println!();
        print!("{}", simulation_table(sim, 0.02));
    }
    Ok(())
}

fn expand_instances(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(usage("no instance files given"));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
pub struct CompareCell {
    pub instance: String,
    pub algorithm: String,
    pub totals: Vec<f64>,
    pub fleets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub struct CompareDocument {
    pub params: SearchParams,
    pub runs: usize,
    pub table: CompareTable,
    pub cells: Vec<CompareCell>,
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let params = search_params(&a.search)?;
    if a.algorithms.is_empty() {
        return Err(usage("no algorithms given"));
    }
    let reference = a.algorithms.iter().position(|&x| x == Algorithm::Its).unwrap_or(0);
    let files = expand_instances(&a.instance)?;

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut timing = String::from("instance\talgorithm\tmean_seconds\n");
    for file in &files {
        let inst = load_instance(file)?;
        let mut values = Vec::new();
        for &alg in &a.algorithms {
            let outcomes = solve_runs(&inst, alg, &params, runs_for(alg, a.search.runs))?;
            let totals: Vec<f64> = outcomes.iter().map(|o| o.result.cost.total).collect();
            values.push(totals.iter().sum::<f64>() / totals.len() as f64);
            let _ = writeln!(timing, "{}\t{}\t{:.6}", inst.name, alg, mean_seconds(&outcomes));
            if let Some(dir) = &a.search.curve_out {
                write_curves(dir, &format!("{}-{alg}", inst.name), &outcomes)?;
            }
            cells.push(CompareCell {
                instance: inst.name.clone(),
                algorithm: alg.name().to_string(),
                totals,
                fleets: outcomes.iter().map(|o| o.result.plan.fleet_size()).collect(),
            });
        }
        rows.push(CompareRow {
            instance: inst.name.clone(),
            values,
        });
    }
    let table = CompareTable {
        algorithms: a.algorithms.iter().map(|x| x.name().to_string()).collect(),
        reference,
        rows,
    };
    let tsv = table.to_tsv();
    let doc = CompareDocument {
        params,
        runs: a.search.runs,
        table,
        cells,
    };
    match &a.out {
        Some(dir) => {
            write(&dir.join("compare.tsv"), &tsv)?;
            write(&dir.join("compare.json"), &to_json(&doc))?;
            write(&dir.join("compare.timing.tsv"), &timing)?;
        }
        None => eprint!("{timing}"),
    }
    print!("{tsv}");
    Ok(())
}

fn load_plan(path: &Path) -> Result<Plan> {
    #[derive(Deserialize)]
    struct WithBest {
        best_plan: Plan,
    }
    let text = read(path)?;
    if let Ok(plan) = Plan::from_json(&text) {
        return Ok(plan);
    }
    let doc: WithBest = serde_json::from_str(&text).with_context(|| format!("parsing plan {}", path.display()))?;
    Ok(doc.best_plan)
}

pub fn simulation_table(rep: &McReport, tolerance: f64) -> String {
    let mut out = String::from("amr\trequest\tanalytic_lateness\tempirical_lateness\tgap\n");
    for v in &rep.visits {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            v.amr + 1,
            v.request,
            v.analytic_lateness,
            v.empirical_lateness,
            (v.analytic_lateness - v.empirical_lateness).abs()
        );
    }
    let verdict = |gap: f64| if gap <= tolerance { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "\nmetric\tanalytic\tempirical\tgap\tverdict");
    let _ = writeln!(
        out,
        "max_lateness\t\t\t{:.6}\t{}",
        rep.max_lateness_gap(),
        verdict(rep.max_lateness_gap())
    );
    let _ = writeln!(
        out,
        "r\t{:.6}\t{:.6}\t{:.6}\t{}",
        rep.analytic_r,
        rep.empirical_r,
        rep.r_gap(),
        verdict(rep.r_gap())
    );
    let _ = writeln!(out, "travel\t{:.4}\t{:.4}\t\t", rep.analytic_travel, rep.empirical_travel);
    let _ = writeln!(out, "cost\t{:.4}\t{:.4}\t\t", rep.analytic_cost, rep.empirical_cost);
    out
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    if a.mc_samples == 0 {
        return Err(usage("--mc-samples must be positive"));
    }
    if !(a.tolerance >= 0.0) {
        return Err(usage("--tolerance must be nonnegative"));
    }
    let inst = load_instance(&a.instance)?;
    let plan = load_plan(&a.plan)?;
    let rep = simulate_plan(&plan, &inst, a.mc_samples, a.seed)?;
    let table = simulation_table(&rep, a.tolerance);
    if let Some(dir) = &a.out {
        write(&dir.join(format!("{}-simulation.json", inst.name)), &to_json(&rep))?;
        write(&dir.join(format!("{}-simulation.tsv", inst.name)), &table)?;
    }
    print!("{table}");
    Ok(())
}
