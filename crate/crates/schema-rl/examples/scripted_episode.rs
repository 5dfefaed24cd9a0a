//! Run one scripted episode per family with the privileged reference
//! controller, printing a step-by-step trace and writing trace files.
//!
//! ```bash
//! cargo run --example scripted_episode -- /tmp/traces
//! ```

use schema_rl::envs::trace::{EpisodeTrace, StepRecord};
use schema_rl::envs::{reset, solver, step, Tolerances};
use schema_rl::pamdp::{build_task_spec, TaskFamily};
use std::path::PathBuf;

fn main() {
    let out_dir: Option<PathBuf> = std::env::args().nth(1).map(PathBuf::from);
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir).expect("create trace directory");
    }
    let tol = Tolerances::default();
    for family in TaskFamily::ALL {
        let spec = build_task_spec(family);
        let mut state = reset(&spec, 42, &tol);
        let mut trace = EpisodeTrace::default();
        println!("== {family} ==");
        loop {
            let action = solver::solve_step(&state, &spec, &tol);
            let (next, reward, done) = step(&state, &action, &tol).expect("scripted step");
            trace.push(StepRecord::capture(&state, &action, &next, reward));
            state = next;
            if done {
                println!("{}", trace.render().trim_end());
                println!("reward {reward}\n");
                break;
            }
        }
        if let Some(dir) = &out_dir {
            let path = dir.join(format!("{}_seed42.trace", family.name()));
            trace.write_to(&path).expect("write trace");
            println!("trace written to {}\n", path.display());
        }
    }
}
