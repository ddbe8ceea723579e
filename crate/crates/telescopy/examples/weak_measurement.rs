//! Weak vacuum-vs-photon measurements: Kraus operators, their
//! ancilla-circuit realization, and a round applied to a stellar state.
//!
//! Run with: `cargo run --example weak_measurement`

use num_complex::Complex64;
use telescopy::povm::{ancilla_circuit_check, weak_kraus};
use telescopy::state::{apply_weak_round, build_stellar_state, CoherenceSet};

fn main() -> telescopy::Result<()> {
    let tau = 0.3;
    let (m0, m1) = weak_kraus(tau)?;
    println!("strength τ = {tau}");
    println!("survival M0 = diag({:.4}, {:.4})", m0[(0, 0)].re, m0[(1, 1)].re);
    println!("collapse M1 = diag({:.4}, {:.4})", m1[(0, 0)].re, m1[(1, 1)].re);
    println!("circuit residual: {:.2e}", ancilla_circuit_check(tau)?);

    // Apply one round to a three-telescope state: telescope C reports the
    // collapse outcome, A and B survive.
    let m = 3;
    let g = CoherenceSet::uniform(m, Complex64::new(0.5, 0.0))?;
    let state = build_stellar_state(m, 0.01, &g)?;
    let outcomes = [false, false, true];
    let (prob, post) = apply_weak_round(&state, tau, &outcomes)?;
    println!("\noutcome pattern {:?} (true = collapse click)", outcomes);
    println!("branch probability: {prob:.6}");
    println!("post-state trace:   {:.12}", post.trace().re);

    // A click removes the vacuum weight at that telescope and kills its
    // coherences; the surviving pair keeps a reduced coherent part.
    println!("post ⟨e_A|ρ|e_B⟩ = {:.6}", post.mat[(1, 2)]);
    println!("post ⟨e_A|ρ|e_C⟩ = {:.6} (coherence to the clicked telescope)", post.mat[(1, 3)]);
    Ok(())
}
