//! Drive the command-line pipeline programmatically: config, provenance,
//! CSV, and JSON summary — the same path the `telescopy` binary takes.
//!
//! Run with: `cargo run --example experiment_pipeline`

use telescopy::cli;

fn main() {
    let dir = std::env::temp_dir().join("telescopy_pipeline_example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let out = dir.join("fisher.csv");

    // Equivalent to:
    //   telescopy fisher --out <csv> --seed 1 \
    //     --override scheme='"gjc_quantum"' \
    //     --override schedule='{"mode":"ansatz","d":10}'
    let code = cli::run([
        "telescopy",
        "fisher",
        "--out",
        out.to_str().expect("utf-8 path"),
        "--seed",
        "1",
        "--override",
        "scheme=\"gjc_quantum\"",
        "--override",
        "schedule={\"mode\":\"ansatz\",\"d\":10}",
    ]);
    assert_eq!(code, 0, "fisher command failed");

    println!("\n--- emitted CSV ({}) ---", out.display());
    print!("{}", std::fs::read_to_string(&out).expect("csv written"));

    // Re-running the identical config reproduces identical bytes.
    let out2 = dir.join("fisher_rerun.csv");
    let code = cli::run([
        "telescopy",
        "fisher",
        "--out",
        out2.to_str().expect("utf-8 path"),
        "--seed",
        "1",
        "--override",
        "scheme=\"gjc_quantum\"",
        "--override",
        "schedule={\"mode\":\"ansatz\",\"d\":10}",
    ]);
    assert_eq!(code, 0);
    let identical = std::fs::read(&out).unwrap() == std::fs::read(&out2).unwrap();
    println!("--- rerun byte-identical: {identical} ---");
}
