//! Collapse yields of weak-measurement schedules: per-round terms, totals,
//! and the three-telescope closed forms.
//!
//! Run with: `cargo run --example distillation_yields`

use telescopy::distill::{ansatz_schedule, closed_form_m3, yields, TauSchedule, Variant};

fn main() -> telescopy::Result<()> {
    // The fixed profile τ_r = 1/(2 + D - r) gives γ_D = D/(2(1+D)) at M = 3.
    println!("fixed profile at M = 3:");
    for d in [1usize, 2, 5, 10, 50] {
        let y = yields(3, &ansatz_schedule(d)?)?;
        println!(
            "  D = {d:>2}: γ_D = {:.8}  (closed form {:.8}),  β_D = {:.8}",
            y.gamma_d,
            closed_form_m3(d, Variant::PureWeak),
            y.beta_d
        );
    }

    // Per-round structure of a short schedule at M = 5.
    let schedule = TauSchedule::pure_weak(vec![0.25, 0.35, 0.5])?;
    let y = yields(5, &schedule)?;
    println!("\nM = 5, τ = (0.25, 0.35, 0.5):");
    println!("  survival products x_r: {:?}", y.x);
    println!("  γ terms per round:     {:?}", y.gamma_terms);
    println!("  β terms per round:     {:?}", y.beta_terms);
    println!("  totals: γ_D = {:.6}, β_D = {:.6}", y.gamma_d, y.beta_d);

    // Invariants every schedule satisfies.
    assert!(y.beta_d >= y.gamma_d.powi(2), "vacuum weight dominates (Cauchy-Schwarz)");
    let identity: f64 = y.gamma_terms.iter().zip(&y.x).map(|(g, x)| g / x).sum();
    let expected = (1.0 - y.x.last().unwrap()).powi(3);
    println!("  Σ γ_r/x_r = {identity:.12} = (1 - x_D)^(M-2) = {expected:.12}");

    // The hard-final variant trades the last weak round for a uniform
    // random pair assignment.
    let hard = TauSchedule::new(vec![0.25], Variant::HardFinal)?;
    let yh = yields(3, &hard)?;
    println!("\nM = 3 hard final, τ = (0.25): γ_D = {:.6} = 3/8", yh.gamma_d);
    Ok(())
}
