//! Numerically optimize measurement-strength schedules: the pair-collapse
//! yield γ_D, and the local-scheme figure of merit γ_D²/β_D under its
//! vacuum-dominance constraint.
//!
//! Run with: `cargo run --example optimize_schedule`

use telescopy::distill::{closed_form_m3, optimize_gamma, optimize_local_objective, Variant};

fn main() -> telescopy::Result<()> {
    // Three telescopes, hard final round: the optimum is known in closed
    // form, including the trailing strengths 1/5, 1/4.
    let report = optimize_gamma(3, 5, Variant::HardFinal, 2_000_000, 0)?;
    println!("M = 3, D = 5, hard final:");
    println!("  optimal τ: {:?}", report.schedule.taus());
    println!(
        "  γ_D = {:.10} (closed form {:.10})",
        report.objective,
        closed_form_m3(5, Variant::HardFinal)
    );
    println!("  converged: {}, evaluations: {}", report.converged, report.evaluations);

    // Eight telescopes, one round: best single strength is 1 - 1/(M-1).
    let single = optimize_gamma(8, 1, Variant::PureWeak, 500_000, 0)?;
    println!("\nM = 8, D = 1:");
    println!("  optimal τ = {:.8} (analytic 6/7 = {:.8})", single.schedule.taus()[0], 6.0 / 7.0);
    println!("  pair count × γ = {:.6} — already above one", 28.0 * single.objective);

    // The local objective caps the collapse strength so the vacuum term
    // keeps dominating.
    let eps = 1e-3;
    let local = optimize_local_objective(3, 1, eps, 500_000, 0)?;
    println!("\nM = 3, D = 1, ε = {eps}: local objective");
    println!("  τ = {:.8}", local.schedule.taus()[0]);
    println!("  γ²/β = {:.8} (equals τ at M = 3)", local.objective);
    Ok(())
}
