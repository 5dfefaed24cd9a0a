//! Learn a skill schedule and its arguments from scratch on one family,
//! then print the discovered schedule.
//!
//! ```bash
//! cargo run --release --example train_schema -- opening 50000 0
//! ```

use schema_rl::envs::{Encoding, Tolerances};
use schema_rl::pamdp::{build_task_spec, TaskFamily};
use schema_rl::trainer::{train, Mode, TrainerConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family = args
        .first()
        .and_then(|s| TaskFamily::from_name(s))
        .unwrap_or(TaskFamily::Opening);
    let budget: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);

    let spec = build_task_spec(family);
    let cfg = TrainerConfig {
        seed,
        episode_budget: budget,
        ..TrainerConfig::default()
    };
    println!("learning a schedule for {family} (seed {seed}, budget {budget})");
    let out = train(
        &spec,
        Mode::Schema,
        Encoding::LowDim,
        &cfg,
        None,
        &Tolerances::default(),
    )
    .expect("training runs");

    for r in out.rounds.iter().step_by(25) {
        println!(
            "round {:4}  episodes {:6}  success {:.2}  schedule {}",
            r.round, r.episodes, r.trailing_success_rate, r.argmax_schema
        );
    }
    match out.episodes_to_threshold {
        Some(e) => println!("reached 90% trailing success after {e} episodes"),
        None => println!("budget exhausted at {} episodes", out.episodes),
    }
    if let Some(schema) = out.schema() {
        println!("final schedule: {}", schema.argmax_display());
    }
}
