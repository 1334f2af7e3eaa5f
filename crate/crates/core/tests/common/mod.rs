//! Helpers shared by the integration tests: a random EN P system generator
//! and a deliberately naive interpreter used as an oracle for the engine.

#![allow(dead_code)]

use std::collections::HashMap;

use enps_lab::engine::{Expression, Membrane, PSystem, Program, RepartitionEntry, VarRef};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn pick<'a, T, R: Rng>(rng: &mut R, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

fn random_value<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => rng.random_range(-5..=5) as f64,
        _ => rng.random_range(-2.0..2.0),
    }
}

fn random_expr<R: Rng>(rng: &mut R, vars: &[VarRef], depth: u32) -> Expression {
    let leaf = depth == 0 || rng.random_bool(0.4);
    if leaf {
        return if vars.is_empty() || rng.random_bool(0.2) {
            Expression::Constant(random_value(rng))
        } else {
            Expression::Var(pick(rng, vars).clone())
        };
    }
    let n = rng.random_range(1..=3);
    match rng.random_range(0..4) {
        0 => Expression::Sum((0..n).map(|_| random_expr(rng, vars, depth - 1)).collect()),
        1 => Expression::Product((0..n.min(2)).map(|_| random_expr(rng, vars, depth - 1)).collect()),
        2 => Expression::scale(rng.random_range(-1.5..1.5), random_expr(rng, vars, depth - 1)),
        _ => Expression::indicator(random_expr(rng, vars, depth - 1)),
    }
}

/// Random system with up to 5 membranes and up to 3 programs per membrane,
/// mixing enzymatic and non-enzymatic programs. Productions and repartition
/// targets use variables of the host membrane, its parent or its children.
pub fn random_system(rng: &mut ChaCha8Rng) -> PSystem {
    let m = rng.random_range(1..=5);
    let labels: Vec<String> = (0..m).map(|i| format!("m{i}")).collect();
    let parents: Vec<Option<usize>> = (0..m)
        .map(|i| {
            if i == 0 {
                None
            } else {
                Some(rng.random_range(0..i))
            }
        })
        .collect();
    let var_names: Vec<Vec<String>> = (0..m)
        .map(|_| (0..rng.random_range(1..=3)).map(|j| format!("x{j}")).collect())
        .collect();
    let mut membranes = Vec::new();
    for i in 0..m {
        let mut scope: Vec<VarRef> = Vec::new();
        let mut neighbours = vec![i];
        neighbours.extend(parents[i]);
        neighbours.extend((0..m).filter(|&j| parents[j] == Some(i)));
        for &j in &neighbours {
            scope.extend(var_names[j].iter().map(|n| VarRef::new(&labels[j], n)));
        }
        let mut mem = Membrane::new(&labels[i], parents[i].map(|p| labels[p].as_str()));
        for n in &var_names[i] {
            mem = mem.var(n, random_value(rng));
        }
        // one spare enzyme variable per membrane, never read or written by programs
        let enzyme = VarRef::new(&labels[i], "e");
        mem = mem.var("e", rng.random_range(-3.0..3.0));
        for _ in 0..rng.random_range(0..=3) {
            let production = random_expr(rng, &scope, 2);
            let repartition = (0..rng.random_range(1..=3))
                .map(|_| RepartitionEntry::new(rng.random_range(1..=3), pick(rng, &scope).clone()))
                .collect();
            let mut p = Program::new(production, repartition);
            if rng.random_bool(0.4) {
                p = p.with_enzyme(enzyme.clone());
            }
            mem = mem.program(p);
        }
        membranes.push(mem);
    }
    // hand the builder the membranes out of order
    membranes.reverse();
    PSystem::new(membranes).expect("generated systems are well formed")
}

/// Naive interpreter over qualified names, following the step rules directly.
pub struct NaiveInterpreter {
    membranes: Vec<Membrane>,
    order: Vec<usize>,
    pub values: HashMap<String, f64>,
}

fn key(v: &VarRef) -> String {
    format!("{}.{}", v.membrane, v.name)
}

impl NaiveInterpreter {
    pub fn new(membranes: &[Membrane]) -> Self {
        let root = membranes.iter().position(|m| m.parent.is_none()).expect("root");
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            order.push(i);
            let children: Vec<usize> = (0..membranes.len())
                .filter(|&j| membranes[j].parent.as_deref() == Some(membranes[i].label.as_str()))
                .collect();
            stack.extend(children.into_iter().rev());
        }
        let mut values = HashMap::new();
        for m in membranes {
            for v in &m.variables {
                values.insert(format!("{}.{}", m.label, v.name), v.value);
            }
        }
        Self {
            membranes: membranes.to_vec(),
            order,
            values,
        }
    }

    fn eval(&self, e: &Expression, env: &HashMap<String, f64>) -> f64 {
        match e {
            Expression::Constant(c) => *c,
            Expression::Var(v) => env[&key(v)],
            Expression::Sum(items) => {
                let mut s = 0.0;
                for i in items {
                    s += self.eval(i, env);
                }
                s
            }
            Expression::Product(items) => {
                let mut p = 1.0;
                for i in items {
                    p *= self.eval(i, env);
                }
                p
            }
            Expression::Scale(c, inner) => c * self.eval(inner, env),
            Expression::Indicator(inner) => {
                if self.eval(inner, env) == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn collect_vars(e: &Expression, out: &mut Vec<String>) {
        match e {
            Expression::Constant(_) => {}
            Expression::Var(v) => out.push(key(v)),
            Expression::Sum(items) | Expression::Product(items) => {
                items.iter().for_each(|i| Self::collect_vars(i, out))
            }
            Expression::Scale(_, inner) | Expression::Indicator(inner) => Self::collect_vars(inner, out),
        }
    }

    pub fn step(&mut self, rng: &mut impl Rng) {
        let before = self.values.clone();
        let mut fired: Vec<&Program> = Vec::new();
        for &mi in &self.order {
            let m = &self.membranes[mi];
            let mut chosen: Vec<usize> = Vec::new();
            let mut plain: Vec<usize> = Vec::new();
            for (pi, p) in m.programs.iter().enumerate() {
                match &p.enzyme {
                    None => plain.push(pi),
                    Some(e) => {
                        let mut vars = Vec::new();
                        Self::collect_vars(&p.production, &mut vars);
                        let min = vars.iter().map(|v| before[v]).fold(f64::INFINITY, f64::min);
                        if before[&key(e)] > min {
                            chosen.push(pi);
                        }
                    }
                }
            }
            if plain.len() == 1 {
                chosen.push(plain[0]);
            } else if plain.len() > 1 {
                chosen.push(plain[rng.random_range(0..plain.len())]);
            }
            chosen.sort();
            fired.extend(chosen.into_iter().map(|pi| &m.programs[pi]));
        }

        let mut deliveries: Vec<(String, f64)> = Vec::new();
        let mut consumed: Vec<String> = Vec::new();
        for p in &fired {
            let f = self.eval(&p.production, &before);
            let total: u64 = p.repartition.iter().map(|r| r.coefficient as u64).sum();
            let q = f / total as f64;
            for r in &p.repartition {
                deliveries.push((key(&r.target), q * r.coefficient as f64));
            }
            Self::collect_vars(&p.production, &mut consumed);
        }
        let mut after = before;
        for v in consumed {
            after.insert(v, 0.0);
        }
        for (v, amount) in deliveries {
            *after.get_mut(&v).expect("target exists") += amount;
        }
        self.values = after;
    }
}
