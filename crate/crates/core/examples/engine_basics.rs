//! Builds a two-membrane enzymatic numerical P system by hand and steps it.
//!
//! The inner membrane produces `3x` each step, returning half to `x` and
//! sending half to `acc` in the outer membrane. An enzymatic program moves
//! `acc` into `out`, but only while the enzyme `e` exceeds `acc`; once the
//! inflow outgrows the enzyme, `acc` starts to accumulate.

use enps_lab::engine::{run, Expression, Membrane, PSystem, Program, RepartitionEntry, VarRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let x = VarRef::new("inner", "x");
    let acc = VarRef::new("outer", "acc");
    let out = VarRef::new("outer", "out");

    let inner = Membrane::new("inner", Some("outer"))
        .var("x", 1.0)
        .program(Program::new(
            Expression::scale(3.0, Expression::Var(x.clone())),
            vec![
                RepartitionEntry::new(1, x.clone()),
                RepartitionEntry::new(1, acc.clone()),
            ],
        ));
    let outer = Membrane::new("outer", None)
        .var("acc", 0.0)
        .var("out", 0.0)
        .var("e", 10.0)
        .program(
            Program::new(
                Expression::Var(acc.clone()),
                vec![RepartitionEntry::new(1, out.clone())],
            )
            .with_enzyme(VarRef::new("outer", "e")),
        );
    let mut sys = PSystem::new(vec![outer, inner])?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for trace in run(&mut sys, 8, &mut rng)? {
        println!(
            "step {}: x = {:>7.3}, acc = {:>7.3}, out = {:>7.3}, programs fired = {}",
            trace.step,
            trace.value("inner.x").unwrap_or_default(),
            trace.value("outer.acc").unwrap_or_default(),
            trace.value("outer.out").unwrap_or_default(),
            trace.applications.len(),
        );
    }
    Ok(())
}
