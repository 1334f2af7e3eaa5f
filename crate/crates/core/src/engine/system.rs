use std::collections::{HashMap, HashSet};

use super::expr::{Compiled, Expression, VarRef};
use super::EngineError;

/// One `coefficient | target` pair of a repartition protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct RepartitionEntry {
    pub coefficient: u32,
    pub target: VarRef,
}

impl RepartitionEntry {
    pub fn new(coefficient: u32, target: VarRef) -> Self {
        Self { coefficient, target }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub production: Expression,
    pub repartition: Vec<RepartitionEntry>,
    /// Enzyme guard; `None` for the non-enzymatic form.
    pub enzyme: Option<VarRef>,
}

impl Program {
    pub fn new(production: Expression, repartition: Vec<RepartitionEntry>) -> Self {
        Self {
            production,
            repartition,
            enzyme: None,
        }
    }

    pub fn with_enzyme(mut self, enzyme: VarRef) -> Self {
        self.enzyme = Some(enzyme);
        self
    }

    pub fn is_enzymatic(&self) -> bool {
        self.enzyme.is_some()
    }

    pub fn coefficient_sum(&self) -> u64 {
        self.repartition.iter().map(|e| e.coefficient as u64).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membrane {
    pub label: String,
    pub parent: Option<String>,
    pub variables: Vec<Variable>,
    pub programs: Vec<Program>,
}

impl Membrane {
    pub fn new(label: impl Into<String>, parent: Option<&str>) -> Self {
        Self {
            label: label.into(),
            parent: parent.map(str::to_owned),
            variables: Vec::new(),
            programs: Vec::new(),
        }
    }

    pub fn var(mut self, name: impl Into<String>, value: f64) -> Self {
        self.variables.push(Variable {
            name: name.into(),
            value,
        });
        self
    }

    pub fn program(mut self, program: Program) -> Self {
        self.programs.push(program);
        self
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.variables.iter().find(|v| v.name == name).map(|v| v.value)
    }
}

/// Flat index of a variable in the system valuation (membrane preorder, then declaration order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSlot(pub usize);

#[derive(Debug, Clone)]
pub(crate) struct CompiledProgram {
    pub production: Compiled,
    /// Slots read by the production; these are consumed when the program fires.
    pub inputs: Vec<usize>,
    pub enzyme: Option<usize>,
    pub targets: Vec<(usize, f64)>,
    pub coefficient_sum: f64,
}

/// An enzymatic numerical P system: a rooted membrane tree with variables and programs.
///
/// Membranes are kept in preorder of the tree (children in declaration order);
/// that order fixes the flat valuation layout and the order in which the engine
/// draws random numbers.
#[derive(Debug, Clone)]
pub struct PSystem {
    membranes: Vec<Membrane>,
    children: Vec<Vec<usize>>,
    parent_idx: Vec<Option<usize>>,
    slot_loc: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    names: std::sync::Arc<Vec<String>>,
    pub(crate) compiled: Vec<Vec<CompiledProgram>>,
}

impl PartialEq for PSystem {
    fn eq(&self, other: &Self) -> bool {
        self.membranes == other.membranes
    }
}

impl PSystem {
    /// Validates the membranes and arranges them in tree preorder. Productions
    /// are stored in [`Expression::normalized`] form.
    pub fn new(mut membranes: Vec<Membrane>) -> Result<Self, EngineError> {
        for p in membranes.iter_mut().flat_map(|m| m.programs.iter_mut()) {
            p.production = p.production.normalized();
        }
        if membranes.is_empty() {
            return Err(EngineError::Structure(
                "a system needs at least one membrane".into(),
            ));
        }
        let mut index = HashMap::new();
        for (i, m) in membranes.iter().enumerate() {
            if !is_identifier(&m.label) {
                return Err(EngineError::Structure(format!(
                    "invalid membrane label `{}`",
                    m.label
                )));
            }
            if index.insert(m.label.as_str(), i).is_some() {
                return Err(EngineError::DuplicateLabel(m.label.clone()));
            }
        }
        let mut roots = Vec::new();
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); membranes.len()];
        for (i, m) in membranes.iter().enumerate() {
            match &m.parent {
                None => roots.push(i),
                Some(p) => {
                    let &pi = index.get(p.as_str()).ok_or_else(|| {
                        EngineError::Structure(format!("membrane `{}` names unknown parent `{p}`", m.label))
                    })?;
                    kids[pi].push(i);
                }
            }
        }
        if roots.len() != 1 {
            return Err(EngineError::Structure(format!(
                "expected exactly one skin membrane, found {}",
                roots.len()
            )));
        }
        let mut order = Vec::with_capacity(membranes.len());
        let mut stack = vec![roots[0]];
        while let Some(i) = stack.pop() {
            order.push(i);
            stack.extend(kids[i].iter().rev());
        }
        if order.len() != membranes.len() {
            return Err(EngineError::Structure(
                "membrane parent links contain a cycle".into(),
            ));
        }
        let mut slots: Vec<Option<Membrane>> = membranes.into_iter().map(Some).collect();
        let ordered: Vec<Membrane> = order.iter().map(|&i| slots[i].take().unwrap()).collect();
        Self::from_preorder(ordered)
    }

    fn from_preorder(membranes: Vec<Membrane>) -> Result<Self, EngineError> {
        let index: HashMap<&str, usize> = membranes
            .iter()
            .enumerate()
            .map(|(i, m)| (m.label.as_str(), i))
            .collect();
        let parent_idx: Vec<Option<usize>> = membranes
            .iter()
            .map(|m| m.parent.as_deref().map(|p| index[p]))
            .collect();
        let mut children = vec![Vec::new(); membranes.len()];
        for (i, p) in parent_idx.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }

        let mut offsets = Vec::with_capacity(membranes.len());
        let mut slot_loc = Vec::new();
        let mut names = Vec::new();
        let mut slot_of: HashMap<VarRef, usize> = HashMap::new();
        for (mi, m) in membranes.iter().enumerate() {
            offsets.push(slot_loc.len());
            let mut seen = HashSet::new();
            for (vi, v) in m.variables.iter().enumerate() {
                if !is_identifier(&v.name) {
                    return Err(EngineError::Structure(format!(
                        "invalid variable name `{}` in membrane `{}`",
                        v.name, m.label
                    )));
                }
                if !seen.insert(v.name.as_str()) {
                    return Err(EngineError::DuplicateVariable(format!("{}.{}", m.label, v.name)));
                }
                if !v.value.is_finite() {
                    return Err(EngineError::NonFinite(format!("{}.{}", m.label, v.name)));
                }
                slot_of.insert(VarRef::new(&m.label, &v.name), slot_loc.len());
                slot_loc.push((mi, vi));
                names.push(format!("{}.{}", m.label, v.name));
            }
        }

        let mut compiled = Vec::with_capacity(membranes.len());
        for (mi, m) in membranes.iter().enumerate() {
            let adjacent = |label: &str| {
                label == m.label
                    || parent_idx[mi].is_some_and(|p| membranes[p].label == label)
                    || children[mi].iter().any(|&c| membranes[c].label == label)
            };
            let mut progs = Vec::with_capacity(m.programs.len());
            for (pi, p) in m.programs.iter().enumerate() {
                let ctx = |msg: String| EngineError::InvalidProgram {
                    membrane: m.label.clone(),
                    program: pi,
                    message: msg,
                };
                if p.repartition.is_empty() {
                    return Err(ctx("repartition protocol is empty".into()));
                }
                if p.repartition.iter().any(|e| e.coefficient == 0) {
                    return Err(ctx("repartition coefficients must be positive".into()));
                }
                if !p.production.all_constants_finite() {
                    return Err(ctx("production contains a non-finite constant".into()));
                }
                let resolve = |v: &VarRef| -> Option<usize> {
                    if adjacent(&v.membrane) {
                        slot_of.get(v).copied()
                    } else {
                        None
                    }
                };
                let production = Compiled::compile(&p.production, &resolve)
                    .map_err(|e| ctx(format!("production: {e}")))?;
                let inputs: Vec<usize> = p.production.variables().into_iter().map(|v| slot_of[v]).collect();
                let mut targets = Vec::with_capacity(p.repartition.len());
                for entry in &p.repartition {
                    let slot = resolve(&entry.target).ok_or_else(|| {
                        ctx(format!(
                            "repartition target `{}` is not in this membrane, its parent or a child",
                            entry.target
                        ))
                    })?;
                    targets.push((slot, entry.coefficient as f64));
                }
                let enzyme = match &p.enzyme {
                    None => None,
                    Some(e) => {
                        if e.membrane != m.label {
                            return Err(ctx(format!("enzyme `{e}` must live in the host membrane")));
                        }
                        let slot = slot_of
                            .get(e)
                            .copied()
                            .ok_or_else(|| ctx(format!("unknown enzyme `{e}`")))?;
                        if inputs.contains(&slot) {
                            return Err(ctx(format!("enzyme `{e}` must not appear in its own production")));
                        }
                        if targets.iter().any(|(t, _)| *t == slot) {
                            return Err(ctx(format!(
                                "enzyme `{e}` must not be a repartition target of its program"
                            )));
                        }
                        Some(slot)
                    }
                };
                progs.push(CompiledProgram {
                    production,
                    inputs,
                    enzyme,
                    coefficient_sum: p.coefficient_sum() as f64,
                    targets,
                });
            }
            compiled.push(progs);
        }

        Ok(Self {
            membranes,
            children,
            parent_idx,
            slot_loc,
            offsets,
            names: std::sync::Arc::new(names),
            compiled,
        })
    }

    pub fn membranes(&self) -> &[Membrane] {
        &self.membranes
    }

    /// Number of membranes.
    pub fn degree(&self) -> usize {
        self.membranes.len()
    }

    pub fn skin(&self) -> &Membrane {
        &self.membranes[0]
    }

    pub fn membrane(&self, label: &str) -> Option<&Membrane> {
        self.membranes.iter().find(|m| m.label == label)
    }

    pub fn membrane_index(&self, label: &str) -> Option<usize> {
        self.membranes.iter().position(|m| m.label == label)
    }

    pub fn children_of(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    pub fn parent_of(&self, index: usize) -> Option<usize> {
        self.parent_idx[index]
    }

    pub fn labels(&self) -> Vec<&str> {
        self.membranes.iter().map(|m| m.label.as_str()).collect()
    }

    /// Qualified `membrane.variable` names in slot order.
    pub fn qualified_names(&self) -> &std::sync::Arc<Vec<String>> {
        &self.names
    }

    pub fn variable_count(&self) -> usize {
        self.slot_loc.len()
    }

    pub fn slot(&self, var: &VarRef) -> Option<VarSlot> {
        let mi = self.membrane_index(&var.membrane)?;
        let vi = self.membranes[mi]
            .variables
            .iter()
            .position(|v| v.name == var.name)?;
        Some(VarSlot(self.offsets[mi] + vi))
    }

    pub fn get(&self, slot: VarSlot) -> f64 {
        let (m, v) = self.slot_loc[slot.0];
        self.membranes[m].variables[v].value
    }

    pub fn set(&mut self, slot: VarSlot, value: f64) {
        let (m, v) = self.slot_loc[slot.0];
        self.membranes[m].variables[v].value = value;
    }

    pub fn value(&self, var: &VarRef) -> Option<f64> {
        self.slot(var).map(|s| self.get(s))
    }

    pub fn set_value(&mut self, var: &VarRef, value: f64) -> Result<(), EngineError> {
        let slot = self
            .slot(var)
            .ok_or_else(|| EngineError::UnresolvedVariable(var.to_string()))?;
        self.set(slot, value);
        Ok(())
    }

    /// Current valuation in slot order.
    pub fn values(&self) -> Vec<f64> {
        self.slot_loc
            .iter()
            .map(|&(m, v)| self.membranes[m].variables[v].value)
            .collect()
    }

    pub(crate) fn store(&mut self, values: &[f64]) {
        for (slot, &(m, v)) in self.slot_loc.iter().enumerate() {
            self.membranes[m].variables[v].value = values[slot];
        }
    }
}

impl super::Valuation for PSystem {
    fn value_of(&self, var: &VarRef) -> Option<f64> {
        self.value(var)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
