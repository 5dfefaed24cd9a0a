//! Head-to-head sample efficiency on one family: oracle vs schedule
//! learning vs the monolithic baseline, over a few seeds, with an SVG chart.
//!
//! ```bash
//! cargo run --release --example compare_architectures -- opening 3 /tmp/compare.svg
//! ```

use rayon::prelude::*;
use schema_rl::chart::{line_chart, Series};
use schema_rl::envs::{Encoding, Tolerances};
use schema_rl::pamdp::{build_task_spec, TaskFamily};
use schema_rl::trainer::{train, Mode, TrainerConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family = args
        .first()
        .and_then(|s| TaskFamily::from_name(s))
        .unwrap_or(TaskFamily::Opening);
    let seeds: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let chart_path = args.get(2).cloned();

    let spec = build_task_spec(family);
    let tol = Tolerances::default();
    let modes = [Mode::Oracle, Mode::Schema, Mode::Baseline];

    let jobs: Vec<(Mode, u64)> = modes
        .iter()
        .flat_map(|&m| (0..seeds).map(move |s| (m, s)))
        .collect();
    let results: Vec<(Mode, u64, schema_rl::trainer::TrainOutput)> = jobs
        .par_iter()
        .map(|&(mode, seed)| {
            let cfg = TrainerConfig {
                seed,
                ..TrainerConfig::for_family(family)
            };
            let out = train(&spec, mode, Encoding::LowDim, &cfg, None, &tol).unwrap();
            (mode, seed, out)
        })
        .collect();

    let mut series = Vec::new();
    for mode in modes {
        let mut eps: Vec<usize> = results
            .iter()
            .filter(|(m, _, _)| *m == mode)
            .map(|(_, _, o)| o.episodes_to_threshold.unwrap_or(o.episodes))
            .collect();
        eps.sort_unstable();
        println!(
            "{family} {}: episodes-to-threshold per seed {:?} (median {})",
            mode.name(),
            eps,
            eps[eps.len() / 2]
        );
        // Chart the median seed's learning curve.
        let mut outs: Vec<&schema_rl::trainer::TrainOutput> = results
            .iter()
            .filter(|(m, _, _)| *m == mode)
            .map(|(_, _, o)| o)
            .collect();
        outs.sort_by_key(|o| o.episodes_to_threshold.unwrap_or(o.episodes));
        let mid = outs[outs.len() / 2];
        series.push(Series {
            label: mode.name().to_string(),
            points: mid
                .rounds
                .iter()
                .map(|r| (r.episodes as f64, r.trailing_success_rate))
                .collect(),
        });
    }

    if let Some(path) = chart_path {
        let svg = line_chart(
            &format!("{family} sample efficiency"),
            "episodes",
            "trailing success rate",
            &series,
        );
        std::fs::write(&path, svg).unwrap();
        println!("chart written to {path}");
    }
}
