use std::collections::HashMap;
use std::fmt;

use super::EngineError;

/// A variable reference qualified by the label of the membrane that owns it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub membrane: String,
    pub name: String,
}

impl VarRef {
    pub fn new(membrane: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            membrane: membrane.into(),
            name: name.into(),
        }
    }

    /// Parses `membrane.variable`.
    pub fn parse_qualified(text: &str) -> Option<Self> {
        let (m, v) = text.split_once('.')?;
        if m.is_empty() || v.is_empty() || v.contains('.') {
            return None;
        }
        Some(Self::new(m, v))
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.membrane, self.name)
    }
}

/// Arithmetic tree of a production function.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Constant(f64),
    Var(VarRef),
    Sum(Vec<Expression>),
    Product(Vec<Expression>),
    Scale(f64, Box<Expression>),
    /// 1 when the inner value is exactly zero, 0 otherwise.
    Indicator(Box<Expression>),
}

/// Source of variable values for [`evaluate`].
pub trait Valuation {
    fn value_of(&self, var: &VarRef) -> Option<f64>;
}

impl Valuation for HashMap<VarRef, f64> {
    fn value_of(&self, var: &VarRef) -> Option<f64> {
        self.get(var).copied()
    }
}

impl<F: Fn(&VarRef) -> Option<f64>> Valuation for F {
    fn value_of(&self, var: &VarRef) -> Option<f64> {
        self(var)
    }
}

impl Expression {
    pub fn var(membrane: &str, name: &str) -> Self {
        Expression::Var(VarRef::new(membrane, name))
    }

    pub fn scale(coefficient: f64, inner: Expression) -> Self {
        Expression::Scale(coefficient, Box::new(inner))
    }

    pub fn indicator(inner: Expression) -> Self {
        Expression::Indicator(Box::new(inner))
    }

    /// Variable references in first-occurrence order, without duplicates.
    pub fn variables(&self) -> Vec<&VarRef> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a VarRef>) {
        match self {
            Expression::Constant(_) => {}
            Expression::Var(v) => {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            Expression::Sum(items) | Expression::Product(items) => {
                for item in items {
                    item.collect_vars(out);
                }
            }
            Expression::Scale(_, inner) | Expression::Indicator(inner) => inner.collect_vars(out),
        }
    }

    /// Rewrites every variable reference through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&VarRef) -> VarRef) -> Expression {
        match self {
            Expression::Constant(c) => Expression::Constant(*c),
            Expression::Var(v) => Expression::Var(f(v)),
            Expression::Sum(items) => Expression::Sum(items.iter().map(|e| e.map_vars(f)).collect()),
            Expression::Product(items) => Expression::Product(items.iter().map(|e| e.map_vars(f)).collect()),
            Expression::Scale(c, inner) => Expression::Scale(*c, Box::new(inner.map_vars(f))),
            Expression::Indicator(inner) => Expression::Indicator(Box::new(inner.map_vars(f))),
        }
    }

    /// Same value with one-term sums and products replaced by their term; an
    /// empty sum becomes 0 and an empty product 1.
    pub fn normalized(&self) -> Expression {
        match self {
            Expression::Sum(items) | Expression::Product(items) if items.len() == 1 => items[0].normalized(),
            Expression::Sum(items) if items.is_empty() => Expression::Constant(0.0),
            Expression::Product(items) if items.is_empty() => Expression::Constant(1.0),
            Expression::Sum(items) => Expression::Sum(items.iter().map(Expression::normalized).collect()),
            Expression::Product(items) => {
                Expression::Product(items.iter().map(Expression::normalized).collect())
            }
            Expression::Scale(c, inner) => Expression::scale(*c, inner.normalized()),
            Expression::Indicator(inner) => Expression::indicator(inner.normalized()),
            Expression::Constant(_) | Expression::Var(_) => self.clone(),
        }
    }

    pub(crate) fn all_constants_finite(&self) -> bool {
        match self {
            Expression::Constant(c) => c.is_finite(),
            Expression::Var(_) => true,
            Expression::Sum(items) | Expression::Product(items) => {
                items.iter().all(Expression::all_constants_finite)
            }
            Expression::Scale(c, inner) => c.is_finite() && inner.all_constants_finite(),
            Expression::Indicator(inner) => inner.all_constants_finite(),
        }
    }
}

/// Evaluates a production function against a valuation.
pub fn evaluate(expr: &Expression, env: &impl Valuation) -> Result<f64, EngineError> {
    Ok(match expr {
        Expression::Constant(c) => *c,
        Expression::Var(v) => env
            .value_of(v)
            .ok_or_else(|| EngineError::UnresolvedVariable(v.to_string()))?,
        Expression::Sum(items) => {
            let mut acc = 0.0;
            for item in items {
                acc += evaluate(item, env)?;
            }
            acc
        }
        Expression::Product(items) => {
            let mut acc = 1.0;
            for item in items {
                acc *= evaluate(item, env)?;
            }
            acc
        }
        Expression::Scale(c, inner) => c * evaluate(inner, env)?,
        Expression::Indicator(inner) => indicator(evaluate(inner, env)?),
    })
}

#[inline]
pub(crate) fn indicator(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Expression with variable references resolved to flat valuation slots.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Compiled {
    Constant(f64),
    Slot(usize),
    Sum(Vec<Compiled>),
    Product(Vec<Compiled>),
    Scale(f64, Box<Compiled>),
    Indicator(Box<Compiled>),
}

impl Compiled {
    pub(crate) fn compile(
        expr: &Expression,
        resolve: &impl Fn(&VarRef) -> Option<usize>,
    ) -> Result<Self, EngineError> {
        Ok(match expr {
            Expression::Constant(c) => Compiled::Constant(*c),
            Expression::Var(v) => {
                Compiled::Slot(resolve(v).ok_or_else(|| EngineError::UnresolvedVariable(v.to_string()))?)
            }
            Expression::Sum(items) => Compiled::Sum(
                items
                    .iter()
                    .map(|e| Compiled::compile(e, resolve))
                    .collect::<Result<_, _>>()?,
            ),
            Expression::Product(items) => Compiled::Product(
                items
                    .iter()
                    .map(|e| Compiled::compile(e, resolve))
                    .collect::<Result<_, _>>()?,
            ),
            Expression::Scale(c, inner) => Compiled::Scale(*c, Box::new(Compiled::compile(inner, resolve)?)),
            Expression::Indicator(inner) => Compiled::Indicator(Box::new(Compiled::compile(inner, resolve)?)),
        })
    }

    pub(crate) fn eval(&self, values: &[f64]) -> f64 {
        match self {
            Compiled::Constant(c) => *c,
            Compiled::Slot(i) => values[*i],
            Compiled::Sum(items) => items.iter().map(|e| e.eval(values)).sum(),
            Compiled::Product(items) => items.iter().fold(1.0, |acc, e| acc * e.eval(values)),
            Compiled::Scale(c, inner) => c * inner.eval(values),
            Compiled::Indicator(inner) => indicator(inner.eval(values)),
        }
    }
}
