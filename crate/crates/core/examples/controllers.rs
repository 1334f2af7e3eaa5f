//! Compares the two lane-keeping controllers on fixed sensor readings: the
//! P system output after it settles against each model's closed form.

use enps_lab::engine::step;
use enps_lab::engine::VarRef;
use enps_lab::model::{
    left_output, right_output, sensor_label, ControllerKind, ControllerParams, SENSOR_VAR,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn settle(kind: ControllerKind, p: &ControllerParams, readings: &[f64]) -> anyhow::Result<(f64, f64)> {
    let mut sys = kind.build(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..6 {
        for (i, &r) in readings.iter().enumerate() {
            sys.set_value(&VarRef::new(sensor_label(i + 1), SENSOR_VAR), r)?;
        }
        step(&mut sys, &mut rng)?;
    }
    Ok((
        sys.value(&left_output()).unwrap_or_default(),
        sys.value(&right_output()).unwrap_or_default(),
    ))
}

fn main() -> anyhow::Result<()> {
    let p = ControllerParams::default();
    let cases: [(&str, [f64; 6]); 4] = [
        ("centred, nothing sensed", [0.0; 6]),
        ("edge close on the left", [0.8, 0.3, 0.0, 0.0, 0.0, 0.0]),
        ("edge close on the right", [0.0, 0.0, 0.0, 0.0, 0.3, 0.8]),
        ("edge ahead", [0.0, 0.2, 0.6, 0.6, 0.2, 0.0]),
    ];
    for kind in [ControllerKind::M1, ControllerKind::M2] {
        let sys = kind.build(&p)?;
        println!("{} ({} membranes)", kind.name(), sys.degree());
        for (name, readings) in &cases {
            let (l, r) = settle(kind, &p, readings)?;
            let (cl, cr) = kind.speeds(&p, readings);
            println!("  {name:<24} left {l:>7.3} right {r:>7.3}   closed form {cl:>7.3} {cr:>7.3}");
        }
    }
    Ok(())
}
