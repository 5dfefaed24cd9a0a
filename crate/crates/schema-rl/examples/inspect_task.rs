//! Print each task family's joint-skill vocabulary and continuous
//! parameter layout.
//!
//! ```bash
//! cargo run --example inspect_task
//! ```

use schema_rl::pamdp::{build_task_spec, Arm, TaskFamily};

fn main() {
    for family in TaskFamily::ALL {
        let spec = build_task_spec(family);
        println!("== {family} ==");
        println!(
            "horizon {} | joint vocabulary {} | per-arm parameter dims {}",
            spec.horizon,
            spec.vocab_len(),
            spec.per_arm_param_dim
        );
        println!("allowed per arm: {:?}", spec.allowed.iter().map(|s| s.name()).collect::<Vec<_>>());
        for joint in spec.joint_vocab.iter().take(5) {
            println!("  joint[{}] = {}", joint.index, joint);
        }
        if spec.vocab_len() > 5 {
            println!("  ... and {} more", spec.vocab_len() - 5);
        }
        println!("argument slices (left arm):");
        for (arm, skill, range) in spec.param_slices() {
            if arm != Arm::Left || range.is_empty() {
                continue;
            }
            let names: Vec<&str> = skill.params().iter().map(|p| p.name).collect();
            println!("  {:12} -> {:?} {:?}", skill.name(), range, names);
        }
        println!();
    }
}
