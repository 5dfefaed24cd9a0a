//! Train an oracle policy (fixed skill schedule, learned arguments) on one
//! family and watch the success rate climb.
//!
//! ```bash
//! cargo run --release --example train_oracle -- lateral-lifting 6000
//! ```

use schema_rl::envs::{Encoding, Tolerances};
use schema_rl::pamdp::{build_task_spec, TaskFamily};
use schema_rl::trainer::{train, Mode, TrainerConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family = args
        .first()
        .and_then(|s| TaskFamily::from_name(s))
        .unwrap_or(TaskFamily::LateralLifting);
    let budget: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(6000);

    let spec = build_task_spec(family);
    let cfg = TrainerConfig {
        seed: 1,
        episode_budget: budget,
        ..TrainerConfig::default()
    };
    println!("training oracle policy on {family} (budget {budget} episodes)");
    let out = train(
        &spec,
        Mode::Oracle,
        Encoding::LowDim,
        &cfg,
        None,
        &Tolerances::default(),
    )
    .expect("training runs");

    for r in out.rounds.iter().step_by(10) {
        println!(
            "round {:4}  episodes {:6}  success {:.2}  return {:.2}  vloss {:.3e}  entropy {:.2}",
            r.round,
            r.episodes,
            r.trailing_success_rate,
            r.mean_return,
            r.value_loss,
            r.entropy
        );
    }
    match out.episodes_to_threshold {
        Some(e) => println!("reached 90% trailing success after {e} episodes"),
        None => println!(
            "budget exhausted at {} episodes (final rate {:.2})",
            out.episodes,
            out.rounds.last().map(|r| r.trailing_success_rate).unwrap_or(0.0)
        ),
    }
}
