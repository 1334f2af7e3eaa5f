use std::sync::Arc;

use rand::Rng;

use super::expr::Valuation;
use super::system::{Membrane, PSystem, Program, VarSlot};
use super::EngineError;

/// One fired program within a step.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramApplication {
    /// Index of the host membrane in preorder.
    pub membrane: usize,
    /// Index of the program within its membrane.
    pub program: usize,
    pub production: f64,
    /// Unitary portion `production / sum(c)`.
    pub unitary: f64,
    pub delivered: Vec<(VarSlot, f64)>,
}

/// Post-step valuation plus the programs that fired.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    /// 1-based index of the step that produced this snapshot.
    pub step: u64,
    pub names: Arc<Vec<String>>,
    pub values: Vec<f64>,
    pub applications: Vec<ProgramApplication>,
}

impl StepTrace {
    pub fn value(&self, qualified: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == qualified)
            .map(|i| self.values[i])
    }

    pub fn snapshot(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }
}

/// Whether `program` may fire under `env`.
///
/// Non-enzymatic programs always may. An enzymatic program needs its enzyme to
/// strictly exceed the smallest production variable; with no production
/// variables that minimum is `+inf` and the program never fires.
pub fn is_applicable(program: &Program, env: &impl Valuation) -> Result<bool, EngineError> {
    let Some(enzyme) = &program.enzyme else {
        return Ok(true);
    };
    let e = env
        .value_of(enzyme)
        .ok_or_else(|| EngineError::UnresolvedVariable(enzyme.to_string()))?;
    let mut min = f64::INFINITY;
    for v in program.production.variables() {
        let x = env
            .value_of(v)
            .ok_or_else(|| EngineError::UnresolvedVariable(v.to_string()))?;
        min = min.min(x);
    }
    Ok(e > min)
}

fn choose<R: Rng + ?Sized>(enzymatic: impl Iterator<Item = (usize, bool, bool)>, rng: &mut R) -> Vec<usize> {
    let mut selected = Vec::new();
    let mut plain = Vec::new();
    for (i, is_enzymatic, applicable) in enzymatic {
        if is_enzymatic {
            if applicable {
                selected.push(i);
            }
        } else {
            plain.push(i);
        }
    }
    match plain.len() {
        0 => {}
        1 => selected.push(plain[0]),
        n => selected.push(plain[rng.random_range(0..n)]),
    }
    selected.sort_unstable();
    selected
}

/// Programs of `membrane` that fire this step, in declaration order.
pub fn select_programs<'m, R: Rng + ?Sized>(
    membrane: &'m Membrane,
    env: &impl Valuation,
    rng: &mut R,
) -> Result<Vec<&'m Program>, EngineError> {
    let flags = membrane
        .programs
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((i, p.is_enzymatic(), is_applicable(p, env)?)))
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(choose(flags.into_iter(), rng)
        .into_iter()
        .map(|i| &membrane.programs[i])
        .collect())
}

/// Advances the system by one synchronous step.
pub fn step<R: Rng + ?Sized>(sys: &mut PSystem, rng: &mut R) -> Result<StepTrace, EngineError> {
    step_numbered(sys, rng, 1)
}

fn step_numbered<R: Rng + ?Sized>(
    sys: &mut PSystem,
    rng: &mut R,
    number: u64,
) -> Result<StepTrace, EngineError> {
    let before = sys.values();
    let mut applications = Vec::new();

    for (mi, programs) in sys.compiled.iter().enumerate() {
        let flags = programs.iter().enumerate().map(|(pi, p)| {
            let applicable = match p.enzyme {
                None => true,
                Some(e) => {
                    let min = p.inputs.iter().map(|&s| before[s]).fold(f64::INFINITY, f64::min);
                    before[e] > min
                }
            };
            (pi, p.enzyme.is_some(), applicable)
        });
        for pi in choose(flags, rng) {
            let p = &programs[pi];
            let production = p.production.eval(&before);
            if !production.is_finite() {
                return Err(EngineError::NonFiniteProduction {
                    step: number,
                    membrane: sys.membranes()[mi].label.clone(),
                    program: pi,
                });
            }
            let unitary = production / p.coefficient_sum;
            applications.push(ProgramApplication {
                membrane: mi,
                program: pi,
                production,
                unitary,
                delivered: p
                    .targets
                    .iter()
                    .map(|&(slot, c)| (VarSlot(slot), unitary * c))
                    .collect(),
            });
        }
    }

    let mut after = before;
    for app in &applications {
        for &slot in &sys.compiled[app.membrane][app.program].inputs {
            after[slot] = 0.0;
        }
    }
    for app in &applications {
        for &(slot, amount) in &app.delivered {
            after[slot.0] += amount;
        }
    }
    sys.store(&after);

    Ok(StepTrace {
        step: number,
        names: sys.qualified_names().clone(),
        values: after,
        applications,
    })
}

/// Runs `n` steps and returns their traces in order.
pub fn run<R: Rng + ?Sized>(sys: &mut PSystem, n: usize, rng: &mut R) -> Result<Vec<StepTrace>, EngineError> {
    (1..=n as u64).map(|k| step_numbered(sys, rng, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Expression, Membrane, RepartitionEntry, VarRef};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn v(m: &str, n: &str) -> VarRef {
        VarRef::new(m, n)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn product_program(enzyme: &str) -> Program {
        Program::new(
            Expression::Product(vec![Expression::var("m", "x"), Expression::var("m", "y")]),
            vec![RepartitionEntry::new(1, v("m", "z"))],
        )
        .with_enzyme(v("m", enzyme))
    }

    fn env(pairs: &[(&str, f64)]) -> HashMap<VarRef, f64> {
        pairs.iter().map(|(n, x)| (v("m", n), *x)).collect()
    }

    #[test]
    fn enzyme_condition_is_strict() {
        let p = product_program("e");
        let base = [("x", 2.0), ("y", 3.0)];
        let with_e = |e| {
            let mut m = env(&base);
            m.insert(v("m", "e"), e);
            m
        };
        assert!(is_applicable(&p, &with_e(10.0)).unwrap());
        assert!(!is_applicable(&p, &with_e(2.0)).unwrap());
        assert!(is_applicable(&p, &with_e(2.0 + 1e-12)).unwrap());
    }

    #[test]
    fn non_enzymatic_is_always_applicable() {
        let p = Program::new(
            Expression::Constant(1.0),
            vec![RepartitionEntry::new(1, v("m", "z"))],
        );
        assert!(is_applicable(&p, &env(&[])).unwrap());
    }

    #[test]
    fn enzymatic_constant_production_never_fires() {
        let p = Program::new(
            Expression::Constant(5.0),
            vec![RepartitionEntry::new(1, v("m", "z"))],
        )
        .with_enzyme(v("m", "e"));
        assert!(!is_applicable(&p, &env(&[("e", 1e300)])).unwrap());
    }

    #[test]
    fn selection_mixes_parallel_enzymatic_and_one_plain_program() {
        let plain = |c| {
            Program::new(
                Expression::Constant(c),
                vec![RepartitionEntry::new(1, v("m", "z"))],
            )
        };
        let m = Membrane::new("m", None)
            .program(product_program("e"))
            .program(plain(1.0))
            .program(product_program("e"))
            .program(plain(2.0))
            .program(product_program("e"));
        let e = env(&[("x", 1.0), ("y", 1.0), ("e", 5.0)]);
        let picked = select_programs(&m, &e, &mut rng(3)).unwrap();
        assert_eq!(picked.iter().filter(|p| p.is_enzymatic()).count(), 3);
        assert_eq!(picked.iter().filter(|p| !p.is_enzymatic()).count(), 1);

        let again = select_programs(&m, &e, &mut rng(3)).unwrap();
        assert_eq!(picked, again);

        let mut seen = std::collections::HashSet::new();
        for seed in 0..64 {
            let p = select_programs(&m, &e, &mut rng(seed)).unwrap();
            let plain: Vec<_> = p.iter().filter(|p| !p.is_enzymatic()).collect();
            seen.insert(format!("{:?}", plain[0].production));
        }
        assert_eq!(seen.len(), 2, "both plain programs get chosen across seeds");
    }

    #[test]
    fn single_step_distributes_unitary_portions() {
        let mut sys = PSystem::new(vec![Membrane::new("m", None)
            .var("x", 4.0)
            .var("y", 0.0)
            .program(Program::new(
                Expression::scale(2.0, Expression::var("m", "x")),
                vec![
                    RepartitionEntry::new(1, v("m", "x")),
                    RepartitionEntry::new(3, v("m", "y")),
                ],
            ))])
        .unwrap();
        let t = step(&mut sys, &mut rng(0)).unwrap();
        assert_eq!(t.applications[0].unitary, 2.0);
        assert_eq!(sys.values(), [2.0, 6.0]);
        let t2 = step(&mut sys, &mut rng(0)).unwrap();
        assert_eq!(t2.applications[0].unitary, 1.0);
        assert_eq!(t2.values, [1.0, 9.0]);
    }

    #[test]
    fn zero_run_is_identity() {
        let mut sys = PSystem::new(vec![Membrane::new("m", None).var("x", 4.0)]).unwrap();
        let traces = run(&mut sys, 0, &mut rng(0)).unwrap();
        assert!(traces.is_empty());
        assert_eq!(sys.values(), [4.0]);
    }

    #[test]
    fn shared_input_is_consumed_once() {
        // Both programs read x = 5; each delivers its full production.
        let mut sys = PSystem::new(vec![Membrane::new("m", None)
            .var("x", 5.0)
            .var("a", 0.0)
            .var("b", 0.0)
            .var("e", 100.0)
            .program(
                Program::new(
                    Expression::var("m", "x"),
                    vec![RepartitionEntry::new(1, v("m", "a"))],
                )
                .with_enzyme(v("m", "e")),
            )
            .program(
                Program::new(
                    Expression::var("m", "x"),
                    vec![RepartitionEntry::new(1, v("m", "b"))],
                )
                .with_enzyme(v("m", "e")),
            )])
        .unwrap();
        step(&mut sys, &mut rng(0)).unwrap();
        assert_eq!(sys.values(), [0.0, 5.0, 5.0, 100.0]);
    }

    #[test]
    fn non_finite_production_is_reported() {
        let mut sys = PSystem::new(vec![Membrane::new("m", None).var("x", 1e300).program(
            Program::new(
                Expression::Product(vec![Expression::var("m", "x"), Expression::var("m", "x")]),
                vec![RepartitionEntry::new(1, v("m", "x"))],
            ),
        )])
        .unwrap();
        let err = run(&mut sys, 3, &mut rng(0)).unwrap_err();
        assert!(matches!(err, EngineError::NonFiniteProduction { step: 1, .. }));
    }
}
