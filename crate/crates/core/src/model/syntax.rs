use std::fmt;

use crate::engine::{EngineError, Expression, Membrane, PSystem, Program, RepartitionEntry, VarRef};

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number { value: f64, integer: Option<u64> },
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Eq,
    Plus,
    Star,
    Bar,
    Dot,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number { value, .. } => write!(f, "number {value}"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' | '}' | '(' | ')' | ';' | '=' | '+' | '*' | '|' | '.' => {
                let t = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '|' => Tok::Bar,
                    _ => Tok::Dot,
                };
                out.push((t, pos));
                advance(1, &mut i, &mut col);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                advance(2, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || c == '-' => {
                let start = i;
                let mut j = i;
                if chars[j] == '-' {
                    j += 1;
                }
                let digits_start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == digits_start {
                    return Err(err(pos, "`-` must be followed by digits or `>`"));
                }
                let mut integer = true;
                if j < chars.len() && chars[j] == '.' {
                    integer = false;
                    j += 1;
                    let frac = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == frac {
                        return Err(err(pos, "expected digits after decimal point"));
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    integer = false;
                    j += 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    let exp = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == exp {
                        return Err(err(pos, "expected exponent digits"));
                    }
                }
                let lexeme: String = chars[start..j].iter().collect();
                let value: f64 = lexeme
                    .parse()
                    .map_err(|_| err(pos, format!("invalid number `{lexeme}`")))?;
                if !value.is_finite() {
                    return Err(err(pos, format!("number `{lexeme}` is out of range")));
                }
                let integer = if integer && chars[start] != '-' {
                    lexeme.parse::<u64>().ok()
                } else {
                    None
                };
                out.push((Tok::Number { value, integer }, pos));
                advance(j - start, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push((Tok::Ident(chars[start..j].iter().collect()), pos));
                advance(j - start, &mut i, &mut col);
            }
            other => return Err(err(pos, format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

/// A name as written in the source; unqualified names refer to the host membrane.
#[derive(Debug, Clone)]
struct RawRef {
    membrane: Option<String>,
    name: String,
}

impl RawRef {
    fn resolve(&self, host: &str) -> VarRef {
        VarRef::new(self.membrane.as_deref().unwrap_or(host), &self.name)
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    membranes: Vec<Membrane>,
    /// Source positions of each membrane header and of each of its programs.
    positions: Vec<(String, Pos, Vec<Pos>)>,
}

const KEYWORDS: [&str; 3] = ["membrane", "var", "program"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (t, p) = self.bump();
        if t == want {
            Ok(p)
        } else {
            Err(err(p, format!("expected {want}, found {t}")))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.bump() {
            (Tok::Ident(s), p) if !KEYWORDS.contains(&s.as_str()) => Ok((s, p)),
            (t, p) => Err(err(p, format!("expected identifier, found {t}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        match self.bump() {
            (Tok::Ident(s), p) if s == kw => Ok(p),
            (t, p) => Err(err(p, format!("expected `{kw}`, found {t}"))),
        }
    }

    fn document(&mut self) -> Result<(), ParseError> {
        let p = self.pos();
        if *self.peek() == Tok::Eof {
            return Err(err(p, "empty model: expected `membrane`"));
        }
        self.membrane(None)?;
        if *self.peek() != Tok::Eof {
            return Err(err(self.pos(), "a model has exactly one outermost membrane"));
        }
        Ok(())
    }

    fn membrane(&mut self, parent: Option<&str>) -> Result<(), ParseError> {
        self.keyword("membrane")?;
        let (label, label_pos) = self.ident()?;
        if let Some((_, first, _)) = self.positions.iter().find(|(l, _, _)| *l == label) {
            return Err(err(
                label_pos,
                format!(
                    "duplicate membrane label `{label}` (first declared at {}:{})",
                    first.line, first.column
                ),
            ));
        }
        self.expect(Tok::LBrace)?;
        let idx = self.membranes.len();
        self.membranes.push(Membrane::new(&label, parent));
        self.positions.push((label.clone(), label_pos, Vec::new()));
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(());
                }
                Tok::Ident(kw) if kw == "membrane" => self.membrane(Some(&label))?,
                Tok::Ident(kw) if kw == "var" => {
                    self.bump();
                    let (name, npos) = self.ident()?;
                    if self.membranes[idx].variables.iter().any(|v| v.name == name) {
                        return Err(err(npos, format!("duplicate variable `{label}.{name}`")));
                    }
                    self.expect(Tok::Eq)?;
                    let value = match self.bump() {
                        (Tok::Number { value, .. }, _) => value,
                        (t, p) => return Err(err(p, format!("expected number, found {t}"))),
                    };
                    self.expect(Tok::Semi)?;
                    let m = std::mem::replace(&mut self.membranes[idx], Membrane::new("", None));
                    self.membranes[idx] = m.var(name, value);
                }
                Tok::Ident(kw) if kw == "program" => {
                    let ppos = self.bump().1;
                    let program = self.program(&label)?;
                    self.membranes[idx].programs.push(program);
                    self.positions[idx].2.push(ppos);
                }
                t => {
                    return Err(err(
                        self.pos(),
                        format!("expected `var`, `program`, `membrane` or `}}`, found {t}"),
                    ))
                }
            }
        }
    }

    fn program(&mut self, host: &str) -> Result<Program, ParseError> {
        let production = self.expr(host)?;
        self.expect(Tok::Arrow)?;
        let mut repartition = vec![self.entry(host)?];
        while *self.peek() == Tok::Plus {
            self.bump();
            repartition.push(self.entry(host)?);
        }
        let mut program = Program::new(production, repartition);
        if *self.peek() == Tok::Bar {
            self.bump();
            let r = self.var_ref()?;
            program.enzyme = Some(r.resolve(host));
        }
        self.expect(Tok::Semi)?;
        Ok(program)
    }

    fn entry(&mut self, host: &str) -> Result<RepartitionEntry, ParseError> {
        let coefficient = match self.bump() {
            (Tok::Number { integer: Some(n), .. }, p) => {
                if n == 0 || n > u32::MAX as u64 {
                    return Err(err(
                        p,
                        format!("repartition coefficient {n} must be in 1..=4294967295"),
                    ));
                }
                n as u32
            }
            (t, p) => {
                return Err(err(
                    p,
                    format!("expected positive integer coefficient, found {t}"),
                ))
            }
        };
        self.expect(Tok::Bar)?;
        let target = self.var_ref()?.resolve(host);
        Ok(RepartitionEntry::new(coefficient, target))
    }

    fn var_ref(&mut self) -> Result<RawRef, ParseError> {
        let (first, _) = self.ident()?;
        if *self.peek() == Tok::Dot {
            self.bump();
            let (name, _) = self.ident()?;
            Ok(RawRef {
                membrane: Some(first),
                name,
            })
        } else {
            Ok(RawRef {
                membrane: None,
                name: first,
            })
        }
    }

    fn expr(&mut self, host: &str) -> Result<Expression, ParseError> {
        let mut terms = vec![self.term(host)?];
        while *self.peek() == Tok::Plus {
            self.bump();
            terms.push(self.term(host)?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expression::Sum(terms)
        })
    }

    /// A product whose first factor is a bare numeric literal becomes `Scale`.
    fn term(&mut self, host: &str) -> Result<Expression, ParseError> {
        let leading = match self.peek() {
            Tok::Number { value, .. } => Some(*value),
            _ => None,
        };
        let mut factors = vec![self.factor(host)?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor(host)?);
        }
        Ok(match (leading, factors.len()) {
            (_, 1) => factors.pop().unwrap(),
            (Some(c), 2) => Expression::scale(c, factors.pop().unwrap()),
            (Some(c), _) => Expression::scale(c, Expression::Product(factors.split_off(1))),
            (None, _) => Expression::Product(factors),
        })
    }

    fn factor(&mut self, host: &str) -> Result<Expression, ParseError> {
        match self.peek().clone() {
            Tok::Number { value, .. } => {
                self.bump();
                Ok(Expression::Constant(value))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(host)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) if name == "f" && self.toks[self.at + 1].0 == Tok::LParen => {
                self.bump();
                self.bump();
                let e = self.expr(host)?;
                self.expect(Tok::RParen)?;
                Ok(Expression::indicator(e))
            }
            Tok::Ident(_) => {
                let r = self.var_ref()?;
                Ok(Expression::Var(r.resolve(host)))
            }
            t => Err(err(self.pos(), format!("expected expression, found {t}"))),
        }
    }
}

/// Parses a model document into a validated system.
pub fn parse_model(text: &str) -> Result<PSystem, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        membranes: Vec::new(),
        positions: Vec::new(),
    };
    p.document()?;
    let positions = p.positions;
    let first = positions
        .first()
        .map(|(_, pos, _)| *pos)
        .unwrap_or(Pos { line: 1, column: 1 });
    PSystem::new(p.membranes).map_err(|e| {
        let pos = match &e {
            EngineError::InvalidProgram {
                membrane, program, ..
            } => positions
                .iter()
                .find(|(l, _, _)| l == membrane)
                .and_then(|(_, _, progs)| progs.get(*program).copied()),
            EngineError::DuplicateLabel(l) => positions
                .iter()
                .filter(|(x, _, _)| x == l)
                .nth(1)
                .map(|(_, p, _)| *p),
            _ => None,
        };
        err(pos.unwrap_or(first), e.to_string())
    })
}

fn number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn name(r: &VarRef, host: &str) -> String {
    if r.membrane == host {
        r.name.clone()
    } else {
        r.to_string()
    }
}

/// Prints an expression so that [`parse_model`] rebuilds the identical tree.
pub(crate) fn print_expr(e: &Expression, host: &str) -> String {
    match e {
        Expression::Constant(c) => number(*c),
        Expression::Var(v) => name(v, host),
        Expression::Sum(items) => items
            .iter()
            .map(|i| match i {
                Expression::Sum(_) => format!("({})", print_expr(i, host)),
                _ => print_expr(i, host),
            })
            .collect::<Vec<_>>()
            .join(" + "),
        Expression::Product(items) => items
            .iter()
            .enumerate()
            .map(|(k, i)| match i {
                Expression::Sum(_) | Expression::Product(_) | Expression::Scale(..) => {
                    format!("({})", print_expr(i, host))
                }
                Expression::Constant(_) if k == 0 => format!("({})", print_expr(i, host)),
                _ => print_expr(i, host),
            })
            .collect::<Vec<_>>()
            .join(" * "),
        Expression::Scale(c, inner) => {
            let body = match inner.as_ref() {
                Expression::Product(items) if items.len() >= 2 => print_expr(inner, host),
                Expression::Sum(_) | Expression::Scale(..) | Expression::Product(_) => {
                    format!("({})", print_expr(inner, host))
                }
                _ => print_expr(inner, host),
            };
            format!("{} * {body}", number(*c))
        }
        Expression::Indicator(inner) => format!("f({})", print_expr(inner, host)),
    }
}

/// Canonical text of a system: per membrane, variables, then child membranes, then programs.
pub fn serialize_model(sys: &PSystem) -> String {
    let mut out = String::new();
    write_membrane(sys, 0, 0, &mut out);
    out
}

fn write_membrane(sys: &PSystem, idx: usize, depth: usize, out: &mut String) {
    let m = &sys.membranes()[idx];
    let pad = "  ".repeat(depth);
    out.push_str(&format!("{pad}membrane {} {{\n", m.label));
    for v in &m.variables {
        out.push_str(&format!("{pad}  var {} = {};\n", v.name, number(v.value)));
    }
    for &c in sys.children_of(idx) {
        write_membrane(sys, c, depth + 1, out);
    }
    for p in &m.programs {
        let entries = p
            .repartition
            .iter()
            .map(|e| format!("{}|{}", e.coefficient, name(&e.target, &m.label)))
            .collect::<Vec<_>>()
            .join(" + ");
        let enzyme = p
            .enzyme
            .as_ref()
            .map(|e| format!(" | {}", name(e, &m.label)))
            .unwrap_or_default();
        out.push_str(&format!(
            "{pad}  program {} -> {entries}{enzyme};\n",
            print_expr(&p.production, &m.label)
        ));
    }
    out.push_str(&format!("{pad}}}\n"));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let sys = parse_model("membrane skin { var x = 1.5; }").unwrap();
        assert_eq!(sys.degree(), 1);
        assert_eq!(sys.skin().value("x"), Some(1.5));
    }

    #[test]
    fn comments_and_nesting() {
        let text = "# controller\nmembrane a {\n  var x = 4; # four\n  membrane b { var y = 0; }\n  program 2 * x -> 1|x + 3|b.y;\n}\n";
        let sys = parse_model(text).unwrap();
        assert_eq!(sys.labels(), ["a", "b"]);
        let p = &sys.skin().programs[0];
        assert_eq!(p.production, Expression::scale(2.0, Expression::var("a", "x")));
        assert_eq!(p.repartition[1].target, VarRef::new("b", "y"));
    }

    #[test]
    fn enzyme_in_own_production_is_rejected_with_position() {
        let text = "membrane a {\n  var x = 1;\n  var e = 2;\n  program x * e -> 1|x | e;\n}";
        let e = parse_model(text).unwrap_err();
        assert_eq!((e.line, e.column), (4, 3));
        assert!(e.message.contains("must not appear in its own production"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_model("membrane a {\n  var x = ;\n}").unwrap_err();
        assert_eq!((e.line, e.column), (2, 11));
        let e = parse_model("membrane a { program x -> 0|x; var x = 1; }").unwrap_err();
        assert!(e.message.contains("coefficient"), "{e}");
        let e = parse_model("membrane a { } membrane b { }").unwrap_err();
        assert!(e.message.contains("exactly one outermost"), "{e}");
    }

    #[test]
    fn unresolved_target_and_duplicate_label() {
        let e = parse_model("membrane a { var x = 1; program x -> 1|nope; }").unwrap_err();
        assert!(e.message.contains("a.nope"), "{e}");
        let e = parse_model("membrane a { membrane b { } membrane b { } }").unwrap_err();
        assert!(e.message.contains("duplicate membrane label"), "{e}");
        assert_eq!(e.column, 38);
    }

    #[test]
    fn scale_and_product_forms_survive_printing() {
        let x = || Expression::var("m", "x");
        let y = || Expression::var("m", "y");
        let cases = vec![
            Expression::scale(0.0, Expression::Product(vec![x(), y()])),
            Expression::Product(vec![Expression::Constant(3.0), x()]),
            Expression::Product(vec![Expression::scale(2.0, x()), y()]),
            Expression::scale(2.0, Expression::scale(3.0, x())),
            Expression::scale(2.0, Expression::Constant(-3.5)),
            Expression::Sum(vec![Expression::Sum(vec![x(), y()]), Expression::Constant(1e-9)]),
            Expression::indicator(Expression::Sum(vec![x(), Expression::Constant(-1e300)])),
        ];
        for e in cases {
            let text = format!(
                "membrane m {{ var x = 0; var y = 0; program {} -> 1|x; }}",
                print_expr(&e, "m")
            );
            let sys = parse_model(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
            assert_eq!(sys.skin().programs[0].production, e, "{text}");
        }
    }

    #[test]
    fn empty_program_membrane_round_trips() {
        let sys = parse_model("membrane a { var x = 1; membrane b { } }").unwrap();
        assert_eq!(parse_model(&serialize_model(&sys)).unwrap(), sys);
    }
}
