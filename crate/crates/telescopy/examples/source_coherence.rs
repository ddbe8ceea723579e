//! Derive pairwise coherences from a source intensity profile: the
//! coherence seen by a telescope pair is the Fourier transform of the
//! profile at the pair's baseline.
//!
//! Run with: `cargo run --example source_coherence`

use telescopy::state::{coherence_from_source, SourceModel, TelescopeArray};

fn main() -> telescopy::Result<()> {
    // Three telescopes on a line; baselines grow left to right.
    let array = TelescopeArray::from_positions(&[0.0, 1.2, 3.0])?;

    let sources = [
        ("point", SourceModel::Point { x0: 0.0 }),
        ("uniform disc", SourceModel::Uniform { center: 0.0, width: 2.0 }),
        ("gaussian", SourceModel::Gaussian { mean: 0.0, sigma: 0.8 }),
    ];

    for (name, source) in sources {
        let g = coherence_from_source(&source, &array)?;
        println!("{name}:");
        println!("  g_AB = {:.6}  |g| = {:.6}", g.get(0, 1), g.get(0, 1).norm());
        println!("  g_AC = {:.6}  |g| = {:.6}", g.get(0, 2), g.get(0, 2).norm());
        println!("  g_BC = {:.6}  |g| = {:.6}", g.get(1, 2), g.get(1, 2).norm());
    }

    // A point source is fully coherent at every baseline; extended sources
    // decohere with growing baseline.
    Ok(())
}
