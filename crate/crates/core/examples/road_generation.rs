//! Runs a short NSGA-II search for high-curvature, diverse roads and exports
//! the final front as JSON tests.
//!
//! Usage: `cargo run --example road_generation [out_dir]`

use enps_lab::roadgen::{export_tests, nsga2, summary_csv, CurvatureEvaluator, GaConfig};

fn main() -> anyhow::Result<()> {
    let config = GaConfig {
        population: 40,
        generations: 30,
        seed: 3,
        ..GaConfig::default()
    };
    let result = nsga2(&config, &CurvatureEvaluator)?;
    for g in result.history.iter().step_by(5) {
        println!(
            "generation {:>2}: {:>2}/{} valid, first front {:>2}, best f1 {:.4}",
            g.generation, g.valid, g.population, g.first_front, g.best_f1
        );
    }
    println!(
        "stopped: {:?}; {} roads on the front\n",
        result.stop,
        result.front.len()
    );
    print!("{}", summary_csv(&result.front));

    if let Some(dir) = std::env::args().nth(1) {
        let written = export_tests(&result.front, dir.as_ref(), 0.2, config.map_size, config.seed)?;
        println!("\nwrote {} tests to {dir}", written.len());
    }
    Ok(())
}
