//! Fits the reference simulated panel at one quantile and prints the
//! posterior summary next to the true values.
//!
//! ```text
//! cargo run --release -p panelqr --example replicate -- 0.5 blocked 16000
//! ```

use panelqr::diagnostics::summarize;
use panelqr::simgen::{generate, SimSpec};
use panelqr::{run_chain, Algorithm, ModelSpec, Prior, RngStream, SamplerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let p: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(0.5);
    let algorithm: Algorithm = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(Algorithm::Blocked);
    let iterations: usize = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(16_000);
    let seed: u64 = args.get(4).map(|s| s.parse()).transpose()?.unwrap_or(2021);

    let sim = SimSpec::reference(p, seed);
    let out = generate(&sim, &mut RngStream::new(seed))?;
    println!("T = {}, counts (0s, 1s) = {:?}", out.data.total(), out.counts);

    let spec = ModelSpec::new(p, &Prior::diffuse(out.data.k(), out.data.q()))?;
    let config = SamplerConfig {
        iterations,
        burn_in: iterations / 16,
        thin: 10,
        seed: seed + 1,
        algorithm,
        store_alpha: false,
    };
    let draws = run_chain(&out.data, &spec, &config)?;
    println!("{} draws in {:.1}s", draws.len(), draws.meta.wall_time_secs);

    let truth: Vec<f64> = sim.beta.iter().chain(&sim.zeta).chain([&sim.sigma_alpha_sq]).copied().collect();
    println!("{:<14}{:>8}{:>9}{:>8}{:>8}{:>7}{:>8}{:>8}", "param", "true", "mean", "std", "z", "IF", "acf1", "acf10");
    for (s, t) in summarize(&draws)?.iter().zip(truth) {
        println!(
            "{:<14}{:>8.3}{:>9.4}{:>8.4}{:>8.2}{:>7.2}{:>8.3}{:>8.3}",
            s.name,
            t,
            s.mean,
            s.std,
            (s.mean - t) / s.std,
            s.inefficiency,
            s.acf1,
            s.acf10
        );
    }
    Ok(())
}
