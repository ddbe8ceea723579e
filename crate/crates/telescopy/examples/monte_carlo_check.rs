//! Cross-check the yield recursion against the trajectory simulator — two
//! computations of γ_D and β_D that share no code.
//!
//! Run with: `cargo run --release --example monte_carlo_check`

use num_complex::Complex64;
use telescopy::distill::{yields, TauSchedule};
use telescopy::montecarlo::{sample_trajectory, simulate_distillation};
use telescopy::state::CoherenceSet;

fn main() -> telescopy::Result<()> {
    let m = 5;
    let epsilon = 0.5; // splits samples between both state components
    let schedule = TauSchedule::pure_weak(vec![0.2, 0.3, 0.45])?;
    let g = CoherenceSet::uniform(m, Complex64::new(0.5, 0.0))?;

    let y = yields(m, &schedule)?;
    let n = 1_000_000;
    let est = simulate_distillation(m, epsilon, &g, &schedule, n, 42)?;

    println!("{n} trajectories ({} photon, {} vacuum):", est.n_photon, est.n_vacuum);
    println!(
        "  γ: sampled {:.6} ± {:.6}, recursion {:.6} ({:.2}σ apart)",
        est.gamma_hat.mean,
        est.gamma_hat.std_error,
        y.gamma_d,
        est.gamma_hat.sigma_distance(y.gamma_d)
    );
    println!(
        "  β: sampled {:.6} ± {:.6}, recursion {:.6} ({:.2}σ apart)",
        est.beta_hat.mean,
        est.beta_hat.std_error,
        y.beta_d,
        est.beta_hat.sigma_distance(y.beta_d)
    );
    println!("  vacuum coincidence rate: {:.6}", est.vacuum_coincidence.mean);

    println!("\nper-pair collapse frequencies (vacuum component):");
    for (label, e) in &est.per_pair_vacuum {
        println!("  {label}: {:.6} ± {:.6}", e.mean, e.std_error);
    }

    // Counter-based streams make single trajectories replayable.
    let record = sample_trajectory(m, epsilon, &schedule, 42, 7)?;
    println!("\ntrajectory #7: photon at {:?}", record.photon_site);
    for (r, clicks) in record.outcomes.iter().enumerate() {
        println!("  round {}: clicks {:?}", r + 1, clicks);
    }
    println!("  terminal: {:?}", record.terminal);
    Ok(())
}
