//! Build a truncated stellar state from pairwise coherences and inspect it.
//!
//! Run with: `cargo run --example build_state`

use num_complex::Complex64;
use telescopy::state::{build_stellar_state, CoherenceSet};

fn main() -> telescopy::Result<()> {
    let m = 4;
    let epsilon = 0.01;

    // One complex coherence per telescope pair, lexicographic order:
    // AB, AC, AD, BC, BD, CD.
    let g = CoherenceSet::new(
        m,
        vec![
            Complex64::new(0.62, 0.10),
            Complex64::new(0.35, -0.20),
            Complex64::new(0.18, 0.05),
            Complex64::new(0.55, 0.00),
            Complex64::new(0.30, 0.12),
            Complex64::new(0.58, -0.08),
        ],
    )?;

    let state = build_stellar_state(m, epsilon, &g)?;
    state.check_invariants()?;

    println!("telescopes:        {}", state.m());
    println!("photon weight ε:   {}", state.epsilon());
    println!("vacuum weight:     {}", state.vacuum_weight());

    let rho = state.embed();
    println!("embedded dim:      {} (vacuum + one mode per telescope)", rho.dim());
    println!("trace:             {:.12}", rho.trace().re);
    println!("hermitian:         {}", rho.is_hermitian(1e-12));
    println!("min eigenvalue:    {:.3e}", rho.min_eigenvalue());

    // The single-photon block carries the coherences, scaled by ε/M.
    let block = state.single_photon_block();
    println!(
        "block[0][1] = {:.4} (should be g_AB / M = {:.4})",
        block[(0, 1)],
        g.get(0, 1) / m as f64
    );
    Ok(())
}
