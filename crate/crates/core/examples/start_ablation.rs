//! Crosses the starting plan (greedy or random) with operator choice
//! (adaptive or uniform) on one instance, ten seeds each.
//!
//! cargo run --release -p amr-core --example start_ablation -- [BASE] [PERIOD] [N]

use amr_core::baselines::random_initial;
use amr_core::greedy::greedy_insert;
use amr_core::solomon::grid_instance;
use amr_core::tabu::{tabu_search, SearchParams};
use amr_core::Period;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let base = args.first().map_or("R202", String::as_str);
    let period: Period = args.get(1).map_or("P1", String::as_str).parse().expect("period");
    let n: usize = args.get(2).map_or(50, |s| s.parse().expect("n"));
    let inst = grid_instance(base, period, n, 1).expect("instance");

    println!("start\tselection\tmean_best\tmin_best\tmean_m");
    for greedy_start in [true, false] {
        for adaptive in [true, false] {
            let (mut sum, mut min, mut fleet) = (0.0, f64::INFINITY, 0usize);
            for k in 0..10 {
                let params = SearchParams { seed: 1 + k, ..SearchParams::default() };
                let start = if greedy_start {
                    greedy_insert(&inst).expect("greedy")
                } else {
                    random_initial(&inst, params.seed ^ 0x9e37_79b9_7f4a_7c15)
                };
                let r = tabu_search(&inst, &params, start, adaptive, |_| {}).expect("search");
                sum += r.cost.total;
                min = f64::min(min, r.cost.total);
                fleet += r.plan.fleet_size();
            }
            println!(
                "{}\t{}\t{:.2}\t{:.2}\t{:.1}",
                if greedy_start { "greedy" } else { "random" },
                if adaptive { "adaptive" } else { "uniform" },
                sum / 10.0,
                min,
                fleet as f64 / 10.0
            );
        }
    }
}
