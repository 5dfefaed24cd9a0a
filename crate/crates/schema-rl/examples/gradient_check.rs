//! Verify the network's reverse-mode gradients against central finite
//! differences on random inputs.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use rand::Rng;
use schema_rl::nn;
use schema_rl::rng::stream_rng;

fn main() {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = stream_rng(seed, &[123]);
        let params = nn::init_mlp(8, 5, 3, -0.5, &mut rng);
        let input: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let coeffs: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let cache = nn::forward(&params, &input);
        let mut grads = nn::GradBuf::zeros_like(&params);
        nn::backward(&params, &cache, &coeffs, &mut grads);

        let loss = |p: &nn::NetworkParams| -> f64 {
            nn::forward(p, &input)
                .output()
                .iter()
                .zip(&coeffs)
                .map(|(o, c)| o * c)
                .sum()
        };

        let h = 1e-5;
        let mut p = params.clone();
        let mut checked = 0;
        for li in 0..p.layers.len() {
            let count = p.layers[li].w.len();
            for wi in (0..count).step_by((count / 13).max(1)) {
                let orig = p.layers[li].w[wi];
                p.layers[li].w[wi] = orig + h;
                let up = loss(&p);
                p.layers[li].w[wi] = orig - h;
                let down = loss(&p);
                p.layers[li].w[wi] = orig;
                let fd = (up - down) / (2.0 * h);
                let an = grads.layers[li].w[wi];
                let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1.0);
                worst = worst.max(rel);
                checked += 1;
            }
        }
        println!("seed {seed}: checked {checked} weights, worst relative error so far {worst:.3e}");
    }
    println!(
        "final worst relative error {worst:.3e} ({})",
        if worst <= 1e-4 { "within 1e-4" } else { "TOO LARGE" }
    );
}
