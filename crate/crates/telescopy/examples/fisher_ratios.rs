//! Fisher-information comparison across measurement schemes, including the
//! yield-driven advantage of weak-measurement pre-processing.
//!
//! Run with: `cargo run --example fisher_ratios`

use num_complex::Complex64;
use telescopy::distill::{optimize_gamma, yields, Variant};
use telescopy::fisher::{
    fisher_gjc_classical, fisher_gjc_quantum, fisher_local_classical, fisher_local_quantum,
    fisher_numeric, fisher_wstate, scheme_ratio,
};
use telescopy::povm::{MeasurementSettings, PhaseSpec, Scheme};
use telescopy::state::CoherenceSet;

fn main() -> telescopy::Result<()> {
    let epsilon = 1e-3;
    let phases = PhaseSpec::Shared(0.0);

    println!("interference-scheme ratio vs telescope count (D = 40 rounds):");
    for m in [3usize, 4, 6, 8] {
        let g = CoherenceSet::uniform(m, Complex64::new(0.4, 0.1))?;
        let report = optimize_gamma(m, 40, Variant::PureWeak, 5_000_000, 0)?;
        let quantum = fisher_gjc_quantum(m, epsilon, &g, &phases, report.objective)?;
        let classical = fisher_gjc_classical(m, epsilon, &g, &phases)?;
        let ratio = scheme_ratio(&quantum, &classical)?;
        println!(
            "  M = {m}: ratio = {:.4} (limit M/2 = {:.1}), residual {:.1e}",
            ratio.ratio,
            m as f64 / 2.0,
            ratio.residual
        );
    }

    // Local coherent measurements: quadratic in ε, but pre-processing still
    // buys a large factor.
    let m = 4;
    let g = CoherenceSet::uniform(m, Complex64::new(0.4, 0.1))?;
    let y = yields(m, &optimize_gamma(m, 30, Variant::PureWeak, 5_000_000, 0)?.schedule)?;
    let lq = fisher_local_quantum(m, epsilon, &g, &phases, &y)?;
    let lc = fisher_local_classical(m, epsilon, &g, &phases)?;
    let local_ratio = scheme_ratio(&lq, &lc)?;
    println!("\nlocal schemes at M = {m}: ratio = {:.2} (regime ok: {:?})", local_ratio.ratio, lq.regime_ok);

    // Closed forms agree with the finite-difference pipeline.
    let settings = MeasurementSettings::new(Scheme::LocalClassical, phases.clone());
    let numeric = fisher_numeric(&settings, m, epsilon, &g, None, 1e-6)?;
    let rel = (numeric.block(0) - lc.block(0)).norm() / lc.block(0).norm();
    println!("numeric vs analytic (first block): relative deviation {rel:.2e}");

    // The shared-excitation resource splits the difference.
    let w = fisher_wstate(m, epsilon, &g, &phases)?;
    let gjc_q = fisher_gjc_quantum(m, epsilon, &g, &phases, 1.0 / (m as f64 - 1.0))?;
    println!(
        "shared-excitation vs saturated interference: {:.6} (analytic 2(M-1)/M = {:.6})",
        scheme_ratio(&w, &gjc_q)?.ratio,
        2.0 * (m as f64 - 1.0) / m as f64
    );
    Ok(())
}
