//! Show both observation encodings for one reset state: the 19-dim scaled
//! vector and an ASCII rendering of the 4-channel raster grid.
//!
//! ```bash
//! cargo run --example observations -- picking 7
//! ```

use schema_rl::envs::{obs, reset, Encoding, Tolerances};
use schema_rl::pamdp::{build_task_spec, TaskFamily};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family = args
        .first()
        .and_then(|s| TaskFamily::from_name(s))
        .unwrap_or(TaskFamily::Picking);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(7);

    let spec = build_task_spec(family);
    let tol = Tolerances::default();
    let state = reset(&spec, seed, &tol);

    let low = obs::observe(&state, Encoding::LowDim, &tol);
    println!("{family} seed {seed}");
    println!("low-dim ({} values):", low.data.len());
    for (i, v) in low.data.iter().enumerate() {
        print!("{v:7.3}");
        if (i + 1) % 8 == 0 {
            println!();
        }
    }
    println!("\n");

    let raster = obs::observe(&state, Encoding::Raster, &tol);
    let side = obs::RASTER_SIDE;
    let plane = side * side;
    let glyphs = ['#', '+', 'L', 'R'];
    println!("raster ({} channels x {side}x{side}):", obs::RASTER_CHANNELS);
    for gy in (0..side).rev() {
        let mut row = String::new();
        for gx in 0..side {
            let mut c = '.';
            for ch in 0..obs::RASTER_CHANNELS {
                if raster.data[ch * plane + gy * side + gx] > 0.5 {
                    c = glyphs[ch];
                }
            }
            row.push(c);
            row.push(' ');
        }
        println!("{row}");
    }
    println!("legend: # object body, + feature marker, L/R end effectors");
}
