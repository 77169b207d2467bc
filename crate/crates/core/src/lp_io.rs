//! Reader and writer for a subset of the CPLEX LP text format.
//!
//! Supported sections: `Maximize`/`Minimize`, `Subject To`, `Bounds`,
//! `Generals`, `Binaries`, `End`. Comments start with `\` and run to the end
//! of the line. Ranged rows, line continuations, SOS and semi-continuous
//! sections are not supported.
//!
//! Writing is deterministic: terms appear in variable-id order, unit
//! coefficients print as a bare sign (`+ x`), other numbers use the shortest
//! decimal that round-trips (never scientific notation).

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ilp::{LinExpr, Model, ModelError, ObjectiveSense, Sense, VarKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("line {line}, column {column}: expected {expected}, found {found}")]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("line {line}: unsupported section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraintName(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn number(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, model: &Model, expr: &LinExpr, with_constant: bool) {
    let mut first = true;
    for (v, c) in expr.terms() {
        if !first {
            out.push(' ');
        }
        first = false;
        out.push(if c < 0.0 { '-' } else { '+' });
        let a = c.abs();
        if a != 1.0 {
            let _ = write!(out, " {}", number(a));
        }
        let _ = write!(out, " {}", model.variable(v).name);
    }
    let k = expr.constant_term();
    if with_constant && k != 0.0 {
        if first {
            out.push_str(&number(k));
        } else {
            let _ = write!(out, " {} {}", if k < 0.0 { '-' } else { '+' }, number(k.abs()));
        }
        first = false;
    }
    if first {
        out.push('0');
    }
}

/// Serializes `model` in LP format.
pub fn write_lp(model: &Model) -> String {
    let mut out = String::new();
    let objective = model.objective();
    out.push_str(match objective.sense {
        ObjectiveSense::Maximize => "Maximize\n",
        ObjectiveSense::Minimize => "Minimize\n",
    });
    out.push_str("obj: ");
    write_expr(&mut out, model, &objective.expr, true);
    out.push('\n');

    out.push_str("Subject To\n");
    let mut used = vec![false; model.num_vars()];
    objective.expr.terms().for_each(|(v, _)| used[v.0] = true);
    for c in model.constraints() {
        c.expr.terms().for_each(|(v, _)| used[v.0] = true);
        let _ = write!(out, "{}: ", c.name);
        write_expr(&mut out, model, &c.expr, false);
        let _ = writeln!(out, " {} {}", c.sense.as_str(), number(c.rhs));
    }

    let mut bounds = String::new();
    for (var, &u) in model.variables().iter().zip(&used) {
        if var.kind == VarKind::Binary {
            continue;
        }
        let (l, h, name) = (var.lower, var.upper, &var.name);
        let line = match (l, h) {
            (l, h) if l == f64::NEG_INFINITY && h == f64::INFINITY => format!("{name} free"),
            (l, h) if l == 0.0 && h == f64::INFINITY => {
                // Declare unused continuous variables so they survive a round trip.
                if u || var.kind == VarKind::Integer {
                    continue;
                }
                format!("{name} >= 0")
            }
            (l, h) if h == f64::INFINITY => format!("{name} >= {}", number(l)),
            (l, h) if l == 0.0 => format!("{name} <= {}", number(h)),
            (l, h) => format!("{} <= {name} <= {}", number(l), number(h)),
        };
        bounds.push_str(&line);
        bounds.push('\n');
    }
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        out.push_str(&bounds);
    }
    for (header, kind) in [("Generals", VarKind::Integer), ("Binaries", VarKind::Binary)] {
        let mut names = model.variables().iter().filter(|v| v.kind == kind).peekable();
        if names.peek().is_some() {
            out.push_str(header);
            out.push('\n');
            for v in names {
                out.push_str(&v.name);
                out.push('\n');
            }
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Rel(Sense),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(x) => format!("number {x}"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Rel(s) => format!("`{}`", s.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective(ObjectiveSense),
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_header(line: &str) -> Option<Result<Section, String>> {
    let words: Vec<String> = line.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    let joined = words.join(" ");
    let section = match joined.as_str() {
        "maximize" | "maximise" | "maximum" | "max" => Section::Objective(ObjectiveSense::Maximize),
        "minimize" | "minimise" | "minimum" | "min" => Section::Objective(ObjectiveSense::Minimize),
        "subject to" | "such that" | "st" | "s.t." | "st." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "generals" | "general" | "gen" | "integers" => Section::Generals,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "end" => Section::End,
        _ => {
            let first = words.first()?;
            let unsupported = ["semi-continuous", "semis", "semi", "sos", "pwl", "lazy", "user", "general_constraints"];
            if unsupported.contains(&first.as_str()) {
                return Some(Err(line.trim().to_string()));
            }
            return None;
        }
    };
    Some(Ok(section))
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize_line(text: &str, line: usize, out: &mut Vec<Spanned>) -> Result<(), LpError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, column });
        match c {
            '\\' => break,
            c if c.is_whitespace() => i += 1,
            '+' => {
                push(out, Tok::Plus);
                i += 1;
            }
            '-' => {
                push(out, Tok::Minus);
                i += 1;
            }
            ':' => {
                push(out, Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let next = chars.get(i + 1).copied();
                let (sense, len) = match (c, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (Sense::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (Sense::Ge, 2),
                    ('<', _) => (Sense::Le, 1),
                    ('>', _) => (Sense::Ge, 1),
                    _ => (Sense::Eq, 1),
                };
                push(out, Tok::Rel(sense));
                i += len;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // Exponent only when followed by digits, so `2e` + `x` stays apart.
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lexeme: String = chars[start..i].iter().collect();
                let value = lexeme.parse::<f64>().map_err(|_| LpError::Syntax {
                    line,
                    column,
                    expected: "a number".into(),
                    found: format!("`{lexeme}`"),
                })?;
                push(out, Tok::Num(value));
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let lower = word.to_ascii_lowercase();
                if lower == "inf" || lower == "infinity" {
                    push(out, Tok::Num(f64::INFINITY));
                } else {
                    push(out, Tok::Ident(word));
                }
            }
            other => {
                return Err(LpError::Syntax { line, column, expected: "a token".into(), found: format!("`{other}`") })
            }
        }
    }
    Ok(())
}

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    /// Position reported when the section runs out of tokens.
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn error(&self, expected: &str) -> LpError {
        let (line, column, found) = match self.toks.get(self.pos) {
            Some(s) => (s.line, s.column, s.tok.describe()),
            None => (self.end.0, self.end.1, "end of section".into()),
        };
        LpError::Syntax { line, column, expected: expected.into(), found }
    }

    fn ident(&mut self, expected: &str) -> Result<&'a str, LpError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(expected)),
        }
    }

    /// Optional sign followed by a number.
    fn signed_number(&mut self) -> Result<f64, LpError> {
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Some(Tok::Plus) => self.pos += 1,
                Some(Tok::Minus) => {
                    sign = -sign;
                    self.pos += 1;
                }
                Some(Tok::Num(x)) => {
                    self.pos += 1;
                    return Ok(sign * x);
                }
                _ => return Err(self.error("a number")),
            }
        }
    }

    /// Optional `name:` label.
    fn label(&mut self) -> Option<&'a str> {
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Ident(name)), Some(Tok::Colon)) => {
                self.pos += 2;
                Some(name)
            }
            _ => None,
        }
    }
}

/// Expression terms as `(name, coefficient)` plus a constant.
type RawExpr = (Vec<(String, f64)>, f64);

fn parse_expr(cur: &mut Cursor<'_>, allow_constant_only: bool) -> Result<RawExpr, LpError> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut any = false;
    loop {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some(t) = cur.peek() {
            match t {
                Tok::Plus => {}
                Tok::Minus => sign = -sign,
                _ => break,
            }
            saw_sign = true;
            cur.pos += 1;
        }
        match cur.peek() {
            Some(Tok::Num(x)) => {
                let x = *x;
                cur.pos += 1;
                if let Some(Tok::Ident(name)) = cur.peek() {
                    cur.pos += 1;
                    terms.push((name.clone(), sign * x));
                } else {
                    constant += sign * x;
                }
            }
            Some(Tok::Ident(name)) => {
                cur.pos += 1;
                terms.push((name.clone(), sign));
            }
            _ if saw_sign || !any => {
                return Err(cur.error("a number or variable name"));
            }
            _ => break,
        }
        any = true;
        // A term is followed by a sign (next term) or something else (end).
        if !matches!(cur.peek(), Some(Tok::Plus | Tok::Minus)) {
            break;
        }
    }
    if !allow_constant_only && terms.is_empty() && constant != 0.0 {
        return Err(cur.error("a variable term"));
    }
    Ok((terms, constant))
}

struct Builder {
    order: Vec<String>,
    index: HashMap<String, usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    kind: Vec<VarKind>,
}

impl Builder {
    fn declare(&mut self, name: &str) -> usize {
        if let Some(&k) = self.index.get(name) {
            return k;
        }
        let k = self.order.len();
        self.order.push(name.to_string());
        self.index.insert(name.to_string(), k);
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        self.kind.push(VarKind::Continuous);
        k
    }
}

/// Parses LP text into a [`Model`]. Variables are numbered in order of first
/// appearance.
pub fn parse_lp(text: &str) -> Result<Model, LpError> {
    let mut sections: Vec<(Section, usize, Vec<Spanned>)> = Vec::new();
    let mut saw_end = false;
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = raw.split('\\').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        match section_header(content) {
            Some(Ok(Section::End)) => {
                saw_end = true;
                break;
            }
            Some(Ok(section)) => sections.push((section, line, Vec::new())),
            Some(Err(name)) => return Err(LpError::UnknownSection { line, name }),
            None => {
                let Some((_, _, toks)) = sections.last_mut() else {
                    let column = raw.len() - raw.trim_start().len() + 1;
                    return Err(LpError::Syntax {
                        line,
                        column,
                        expected: "`Maximize` or `Minimize`".into(),
                        found: format!("`{}`", content.trim()),
                    });
                };
                tokenize_line(content, line, toks)?;
            }
        }
    }
    if !saw_end {
        return Err(LpError::Syntax {
            line: last_line + 1,
            column: 1,
            expected: "`End`".into(),
            found: "end of input".into(),
        });
    }
    match sections.first() {
        Some((Section::Objective(_), _, _)) => {}
        Some((_, line, _)) => {
            return Err(LpError::Syntax {
                line: *line,
                column: 1,
                expected: "`Maximize` or `Minimize`".into(),
                found: "another section".into(),
            })
        }
        None => {
            return Err(LpError::Syntax {
                line: last_line,
                column: 1,
                expected: "`Maximize` or `Minimize`".into(),
                found: "`End`".into(),
            })
        }
    }

    let mut b =
        Builder { order: Vec::new(), index: HashMap::new(), lower: Vec::new(), upper: Vec::new(), kind: Vec::new() };
    let mut objective: Option<(ObjectiveSense, Vec<(usize, f64)>, f64)> = None;
    let mut rows: Vec<(String, Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    let mut row_names = HashMap::new();

    for (section, header_line, toks) in &sections {
        let end = toks.last().map_or((*header_line + 1, 1), |s| (s.line, s.column + 1));
        let mut cur = Cursor { toks, pos: 0, end };
        match *section {
            Section::Objective(sense) => {
                if objective.is_some() {
                    return Err(LpError::Syntax {
                        line: *header_line,
                        column: 1,
                        expected: "a single objective section".into(),
                        found: "a second one".into(),
                    });
                }
                cur.label();
                let (terms, constant) = if cur.done() { (Vec::new(), 0.0) } else { parse_expr(&mut cur, true)? };
                if !cur.done() {
                    return Err(cur.error("`+`, `-` or the next section"));
                }
                let terms = terms.into_iter().map(|(n, c)| (b.declare(&n), c)).collect();
                objective = Some((sense, terms, constant));
            }
            Section::Constraints => {
                while !cur.done() {
                    let name = match cur.label() {
                        Some(n) => n.to_string(),
                        None => {
                            let mut k = rows.len() + 1;
                            while row_names.contains_key(&format!("R{k}")) {
                                k += 1;
                            }
                            format!("R{k}")
                        }
                    };
                    let (terms, constant) = parse_expr(&mut cur, true)?;
                    let sense = match cur.next() {
                        Some(Tok::Rel(s)) => *s,
                        _ => {
                            cur.pos -= 1;
                            return Err(cur.error("`<=`, `>=` or `=`"));
                        }
                    };
                    let rhs = cur.signed_number()?;
                    if row_names.insert(name.clone(), rows.len()).is_some() {
                        return Err(LpError::DuplicateConstraintName(name));
                    }
                    let terms = terms.into_iter().map(|(n, c)| (b.declare(&n), c)).collect();
                    rows.push((name, terms, sense, rhs - constant));
                }
            }
            Section::Bounds => {
                while !cur.done() {
                    parse_bound(&mut cur, &mut b)?;
                }
            }
            Section::Generals | Section::Binaries => {
                while !cur.done() {
                    let name = cur.ident("a variable name")?;
                    let k = b.declare(name);
                    if *section == Section::Binaries {
                        b.kind[k] = VarKind::Binary;
                    } else if b.kind[k] != VarKind::Binary {
                        b.kind[k] = VarKind::Integer;
                    }
                }
            }
            Section::End => unreachable!("End stops the scan"),
        }
    }

    let mut model = Model::new("lp");
    for k in 0..b.order.len() {
        let (l, u) = if b.kind[k] == VarKind::Binary { (0.0, 1.0) } else { (b.lower[k], b.upper[k]) };
        model.add_variable(b.order[k].clone(), l, u, b.kind[k])?;
    }
    let to_expr =
        |terms: Vec<(usize, f64)>| -> LinExpr { terms.into_iter().map(|(k, c)| (crate::ilp::VarId(k), c)).collect() };
    if let Some((sense, terms, constant)) = objective {
        let mut expr = to_expr(terms);
        expr.add_constant(constant);
        model.set_objective(sense, expr)?;
    }
    for (name, terms, sense, rhs) in rows {
        model.add_constraint(name, to_expr(terms), sense, rhs)?;
    }
    Ok(model)
}

fn parse_bound(cur: &mut Cursor<'_>, b: &mut Builder) -> Result<(), LpError> {
    let apply = |b: &mut Builder, k: usize, sense: Sense, value: f64, var_on_left: bool| {
        let sense = match (sense, var_on_left) {
            (Sense::Le, false) => Sense::Ge,
            (Sense::Ge, false) => Sense::Le,
            (s, _) => s,
        };
        match sense {
            Sense::Le => b.upper[k] = value,
            Sense::Ge => b.lower[k] = value,
            Sense::Eq => {
                b.lower[k] = value;
                b.upper[k] = value;
            }
        }
    };
    let rel = |cur: &mut Cursor<'_>| match cur.next() {
        Some(Tok::Rel(s)) => Ok(*s),
        _ => {
            cur.pos -= 1;
            Err(cur.error("`<=`, `>=` or `=`"))
        }
    };
    match cur.peek() {
        Some(Tok::Ident(name)) => {
            cur.pos += 1;
            let k = b.declare(name);
            if matches!(cur.peek(), Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("free")) {
                cur.pos += 1;
                b.lower[k] = f64::NEG_INFINITY;
                b.upper[k] = f64::INFINITY;
                return Ok(());
            }
            let s = rel(cur)?;
            let v = cur.signed_number()?;
            apply(b, k, s, v, true);
        }
        Some(Tok::Num(_) | Tok::Plus | Tok::Minus) => {
            let v = cur.signed_number()?;
            let s = rel(cur)?;
            let name = cur.ident("a variable name")?;
            let k = b.declare(name);
            apply(b, k, s, v, false);
            if matches!(cur.peek(), Some(Tok::Rel(_))) {
                let s = rel(cur)?;
                let v = cur.signed_number()?;
                apply(b, k, s, v, true);
            }
        }
        _ => return Err(cur.error("a bound")),
    }
    Ok(())
}
