//! Assemble the measurement POVMs, verify completeness and positivity, and
//! print Born-rule outcome probabilities for a small array.
//!
//! Run with: `cargo run --example povm_outcomes`

use num_complex::Complex64;
use telescopy::distill::{yields, TauSchedule};
use telescopy::povm::{born_distribution, build_povm, MeasurementSettings, Scheme};
use telescopy::state::{build_stellar_state, CoherenceSet};

fn main() -> telescopy::Result<()> {
    let m = 3;
    let epsilon = 0.01;
    let g = CoherenceSet::uniform(m, Complex64::new(0.6, 0.1))?;
    let state = build_stellar_state(m, epsilon, &g)?;

    // Schemes with pre-processing consume the distillation yields.
    let schedule = TauSchedule::pure_weak(vec![1.0 / 3.0, 0.5])?;
    let y = yields(m, &schedule)?;
    println!("schedule yields: γ_D = {:.6}, β_D = {:.6}\n", y.gamma_d, y.beta_d);

    for scheme in [
        Scheme::GjcClassical,
        Scheme::GjcQuantum,
        Scheme::LocalClassical,
        Scheme::LocalQuantum,
    ] {
        let settings = MeasurementSettings::shared(scheme, 0.0);
        let yield_arg = scheme.needs_yield().then_some(&y);
        let povm = build_povm(&settings, m, yield_arg)?;
        povm.verify()?;
        println!(
            "{} — {} outcomes, completeness residual {:.2e}",
            scheme.name(),
            povm.elements().len(),
            povm.completeness_residual()
        );

        let dist = born_distribution(&povm, &state)?;
        for (label, p) in dist.entries().iter().filter(|(_, p)| *p > 1e-6) {
            println!("  P({label:>8}) = {p:.6}");
        }
        println!();
    }
    Ok(())
}
