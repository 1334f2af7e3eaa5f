//! Parses a model from its text form, runs it, and prints the canonical text
//! of the shipped M1 controller.

use enps_lab::engine::run;
use enps_lab::model::{build_m1, parse_model, serialize_model, ControllerParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const COUNTER: &str = "
# Each step keeps half of `src` and passes the other half to `dst`.
membrane top {
  var dst = 0;
  membrane cell {
    var src = 1;
    program src -> 1|src + 1|top.dst;
  }
}
";

fn main() -> anyhow::Result<()> {
    let mut sys = parse_model(COUNTER)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let last = run(&mut sys, 5, &mut rng)?.pop().expect("five steps");
    println!(
        "after 5 steps: top.dst = {}",
        last.value("top.dst").unwrap_or_default()
    );

    // Parse errors carry a 1-based line and column.
    let err = parse_model("membrane a { var x = ; }").unwrap_err();
    println!("malformed input: {err}");

    let text = serialize_model(&build_m1(&ControllerParams::default())?);
    assert_eq!(serialize_model(&parse_model(&text)?), text);
    println!(
        "\nM1 with the shipped parameters ({} lines):\n",
        text.lines().count()
    );
    print!("{text}");
    Ok(())
}
