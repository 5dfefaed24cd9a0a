//! The transfer workflow end to end: learn a schedule on low-dimensional
//! observations, export it, reimport it frozen, and retrain only the
//! argument network on raster observations.
//!
//! ```bash
//! cargo run --release --example transfer_schedule -- opening
//! ```

use schema_rl::envs::{Encoding, Tolerances};
use schema_rl::pamdp::{build_task_spec, TaskFamily};
use schema_rl::schema::{import_schema, ImportMode};
use schema_rl::trainer::{train, Mode, TrainerConfig};

fn main() {
    let family = std::env::args()
        .nth(1)
        .and_then(|s| TaskFamily::from_name(&s))
        .unwrap_or(TaskFamily::Opening);
    let spec = build_task_spec(family);
    let tol = Tolerances::default();

    println!("1) learning the schedule on low-dim observations");
    let cfg = TrainerConfig {
        seed: 0,
        ..TrainerConfig::for_family(family)
    };
    let lowdim = train(&spec, Mode::Schema, Encoding::LowDim, &cfg, None, &tol).unwrap();
    println!(
        "   threshold after {:?} episodes, schedule {}",
        lowdim.episodes_to_threshold,
        lowdim.schema().unwrap().argmax_display()
    );

    let dir = std::env::temp_dir().join("schema_rl_transfer_demo");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{}.schema", family.name()));
    lowdim.schema().unwrap().export(&path).unwrap();
    println!("2) exported to {}", path.display());

    let schedule = import_schema(&path, &spec, ImportMode::Frozen).unwrap();
    println!("3) reimported frozen; retraining arguments on raster observations");
    let tr_cfg = TrainerConfig {
        seed: 1,
        episode_budget: 100_000,
        ..TrainerConfig::for_family(family)
    };
    let transfer = train(
        &spec,
        Mode::Transfer,
        Encoding::Raster,
        &tr_cfg,
        Some(schedule),
        &tol,
    )
    .unwrap();
    println!(
        "   raster transfer reached the threshold after {:?} episodes",
        transfer.episodes_to_threshold
    );

    // A mismatched import is refused.
    let other = build_task_spec(match family {
        TaskFamily::Opening => TaskFamily::Rotating,
        _ => TaskFamily::Opening,
    });
    match import_schema(&path, &other, ImportMode::Frozen) {
        Err(e) => println!("4) importing into {} fails as it should: {e}", other.family),
        Ok(_) => println!("4) unexpected: incompatible import accepted"),
    }
}
