//! Generates a small test suite and reports both controllers on it through
//! the same entry point the command-line tool uses.
//!
//! Usage: `cargo run --example batch_report [work_dir]` (defaults to a fresh temporary directory)

use clap::Parser;
use enps_lab::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    let tmp = tempfile::tempdir()?;
    let work = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| tmp.path().to_owned());
    let tests = work.join("tests");
    let report = work.join("report");
    let (tests, report) = (tests.to_string_lossy(), report.to_string_lossy());

    run(Cli::parse_from([
        "enps-lab", "generate", "--seed", "2", "--pop", "20", "--gens", "15", "--out", &tests,
    ]))?;
    run(Cli::parse_from([
        "enps-lab",
        "report",
        "--tests-dir",
        &tests,
        "--out",
        &report,
    ]))?;

    println!(
        "\n{}",
        std::fs::read_to_string(work.join("report").join("report.md"))?
    );
    Ok(())
}
