//! Irreducible Nagano pairs `(g, α)` and their structural data.
//!
//! Text fields are templates in which `$…$` encloses a parameter expression,
//! e.g. `"Gr_$p$(ℝ^{$p+q$})"`; they render symbolically or, once parameters
//! are bound, with numbers substituted.

use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    N,
    P,
    Q,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::N => "n",
            Param::P => "p",
            Param::Q => "q",
        }
    }

    pub fn parse(s: &str) -> Option<Param> {
        match s {
            "n" => Some(Param::N),
            "p" => Some(Param::P),
            "q" => Some(Param::Q),
            _ => None,
        }
    }
}

/// Integer expression in the parameters; serialized as its text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(u64),
    Var(Param),
    /// `k·e`, written `kn` or `k(e)`.
    Scale(u64, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    FloorDiv(Box<Expr>, u64),
}

impl Expr {
    /// Value under `env`; `None` for unbound parameters or a negative result.
    pub fn eval(&self, env: &BTreeMap<Param, u64>) -> Option<u64> {
        Some(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => *env.get(v)?,
            Expr::Scale(k, e) => k.checked_mul(e.eval(env)?)?,
            Expr::Add(a, b) => a.eval(env)?.checked_add(b.eval(env)?)?,
            Expr::Sub(a, b) => a.eval(env)?.checked_sub(b.eval(env)?)?,
            Expr::Min(a, b) => a.eval(env)?.min(b.eval(env)?),
            Expr::FloorDiv(a, k) => a.eval(env)?.checked_div(*k)?,
        })
    }

    pub fn params(&self, out: &mut Vec<Param>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Expr::Scale(_, e) | Expr::FloorDiv(e, _) => e.params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Min(a, b) => {
                a.params(out);
                b.params(out);
            }
        }
    }

    pub fn parse(s: &str) -> Result<Expr> {
        let mut p = ExprParser {
            s: s.as_bytes(),
            pos: 0,
        };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.error());
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Scale(k, e) => match **e {
                Expr::Var(v) => write!(f, "{k}{}", v.name()),
                _ => write!(f, "{k}({e})"),
            },
            Expr::Add(a, b) => write!(f, "{a}+{b}"),
            Expr::Sub(a, b) => match **b {
                Expr::Add(..) | Expr::Sub(..) => write!(f, "{a}-({b})"),
                _ => write!(f, "{a}-{b}"),
            },
            Expr::Min(a, b) => write!(f, "min({a},{b})"),
            Expr::FloorDiv(a, k) => write!(f, "floor({a}/{k})"),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self) -> Error {
        Error::InvalidInput(format!(
            "bad expression `{}` at byte {}",
            String::from_utf8_lossy(self.s),
            self.pos
        ))
    }

    fn skip_ws(&mut self) {
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn keyword(&mut self, k: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(k.as_bytes()) {
            self.pos += k.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Option<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat(b'+') {
                e = Expr::Add(Box::new(e), Box::new(self.atom()?));
            } else if self.eat(b'-') {
                e = Expr::Sub(Box::new(e), Box::new(self.atom()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        if self.keyword("min(") {
            let a = self.sum()?;
            self.expect(b',')?;
            let b = self.sum()?;
            self.expect(b')')?;
            return Ok(Expr::Min(Box::new(a), Box::new(b)));
        }
        if self.keyword("floor(") {
            let a = self.sum()?;
            self.expect(b'/')?;
            let k = self.number().filter(|k| *k > 0).ok_or_else(|| self.error())?;
            self.expect(b')')?;
            return Ok(Expr::FloorDiv(Box::new(a), k));
        }
        if self.eat(b'(') {
            let e = self.sum()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if let Some(k) = self.number() {
            // a coefficient directly followed by a variable or a group
            return Ok(match self.s.get(self.pos) {
                Some(b'(') => {
                    self.pos += 1;
                    let e = self.sum()?;
                    self.expect(b')')?;
                    Expr::Scale(k, Box::new(e))
                }
                Some(c) if Param::parse(&(*c as char).to_string()).is_some() => {
                    let v = Param::parse(&(*c as char).to_string()).expect("checked");
                    self.pos += 1;
                    Expr::Scale(k, Box::new(Expr::Var(v)))
                }
                _ => Expr::Const(k),
            });
        }
        self.skip_ws();
        let c = *self.s.get(self.pos).ok_or_else(|| self.error())?;
        let v = Param::parse(&(c as char).to_string()).ok_or_else(|| self.error())?;
        self.pos += 1;
        Ok(Expr::Var(v))
    }
}

/// Display template with `$expr$` holes; serialized verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label {
    template: String,
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Hole(Expr),
}

impl Label {
    pub fn parse(template: &str) -> Result<Label> {
        let parts: Vec<&str> = template.split('$').collect();
        if parts.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("unbalanced `$` in `{template}`")));
        }
        let mut pieces = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            if i % 2 == 0 {
                if !part.is_empty() {
                    pieces.push(Piece::Text(part.to_string()));
                }
            } else {
                pieces.push(Piece::Hole(Expr::parse(part)?));
            }
        }
        Ok(Label {
            template: template.to_string(),
            pieces,
        })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    /// With the expressions written out.
    pub fn symbolic(&self) -> String {
        let mut out = String::new();
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Hole(e) => {
                    let _ = write!(out, "{e}");
                }
            }
        }
        out
    }

    pub fn render(&self, env: &BTreeMap<Param, u64>) -> Option<String> {
        let mut out = String::new();
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Hole(e) => {
                    let _ = write!(out, "{}", e.eval(env)?);
                }
            }
        }
        Some(out)
    }

    fn params(&self, out: &mut Vec<Param>) {
        for piece in &self.pieces {
            if let Piece::Hole(e) = piece {
                e.params(out);
            }
        }
    }
}

impl TryFrom<String> for Label {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Label::parse(&s)
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.template
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbolic())
    }
}

/// `expr ≥ min`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub expr: Expr,
    pub min: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaganoPairRow {
    pub id: String,
    pub algebra: Label,
    pub root: Label,
    pub space: Label,
    pub dim_g_alpha: Expr,
    pub compact_isometry: Label,
    pub noncompact_dual: Label,
    pub rank: Expr,
    pub parameters: Vec<Param>,
    /// Admissible ranges, one per parameter plus any joint conditions.
    pub constraints: Vec<Constraint>,
    /// Name of the space in rank one, when it has a more familiar one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_one_space: Option<Label>,
}

impl NaganoPairRow {
    /// Real type: the root space `g_α` is one-dimensional.
    pub fn is_real_type(&self) -> bool {
        self.dim_g_alpha == Expr::Const(1)
    }
}

/// A row with its parameters bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcreteRow {
    pub id: String,
    pub bindings: BTreeMap<Param, u64>,
    pub algebra: String,
    pub root: String,
    pub space: String,
    pub dim_g_alpha: u64,
    pub compact_isometry: String,
    pub noncompact_dual: String,
    pub rank: u64,
    pub real_type: bool,
    pub higher_rank: bool,
}

struct Entry {
    id: &'static str,
    algebra: &'static str,
    root: &'static str,
    space: &'static str,
    dim: &'static str,
    compact: &'static str,
    dual: &'static str,
    rank: &'static str,
    constraints: &'static [(&'static str, u64)],
    rank_one_space: Option<&'static str>,
}

const fn entry(
    id: &'static str,
    algebra: &'static str,
    root: &'static str,
    space: &'static str,
    dim: &'static str,
    compact: &'static str,
    dual: &'static str,
    rank: &'static str,
    constraints: &'static [(&'static str, u64)],
) -> Entry {
    Entry {
        id,
        algebra,
        root,
        space,
        dim,
        compact,
        dual,
        rank,
        constraints,
        rank_one_space: None,
    }
}

const ROOT_PQ: &str = "α_$p$ = ε_$p$ − ε_{$p+1$}";
const ROOT_12: &str = "α_1 = ε_1 − ε_2";

const ENTRIES: [Entry; 19] = [
    entry("i", "so($n$,$n$)", "α_i, i ∈ {$n-1$, $n$}", "SO($n$)", "1", "SO($n$) × SO($n$)", "SO($n$,ℂ)", "floor(n/2)", &[("n", 4)]),
    entry("ii", "sp($n$,$n$)", "α_$n$ = ε_$n$", "Sp($n$)", "3", "Sp($n$) × Sp($n$)", "Sp($2n$,ℂ)", "n", &[("n", 1)]),
    entry("iii", "su($n$,$n$)", "α_$n$ = 2ε_$n$", "U($n$)", "1", "S(U($n$) × U($n$))", "SL($n$,ℂ) × ℝ", "n", &[("n", 2)]),
    Entry {
        rank_one_space: Some("P(ℝ^{$p+q$})"),
        ..entry("iv", "sl($p+q$,ℝ)", ROOT_PQ, "Gr_$p$(ℝ^{$p+q$})", "1", "SO($p+q$)", "SO($p$,$q$)", "min(p,q)", &[("p", 1), ("q", 1)])
    },
    entry("v", "sl($p+q$,ℂ)", ROOT_PQ, "Gr_$p$(ℂ^{$p+q$})", "2", "SU($p+q$)", "SU($p$,$q$)", "min(p,q)", &[("p", 1), ("q", 1)]),
    entry("vi", "sl($p+q$,ℍ)", ROOT_PQ, "Gr_$p$(ℍ^{$p+q$})", "4", "Sp($p+q$)", "Sp($p$,$q$)", "min(p,q)", &[("p", 1), ("q", 1)]),
    entry("vii", "e6(6)", "α_i, i ∈ {1, 5}", "Sp(4)/(Sp(2) × Sp(2))", "1", "Sp(4)", "Sp(2,2)", "2", &[]),
    entry("viii", "so($p+1$,$q+1$)", ROOT_12, "S^$p$ × S^$q$", "1", "SO($p+1$) × SO($q+1$)", "SO($p$,1) × SO(1,$q$)", "2", &[("p", 1), ("q", 1), ("p+q", 3)]),
    entry("ix", "so($n$,1)", ROOT_12, "S^{$n-1$}", "n-1", "SO($n+1$)", "SO($n-1$,1)", "1", &[("n", 2)]),
    entry("x", "so*($4n$)", "α_$n$ = 2ε_$n$", "(SU($2n$)/Sp($n$)) × S¹", "1", "U($2n$)", "SL($n$,ℍ) × ℝ", "n", &[("n", 2)]),
    entry("xi", "sp($2n$,ℝ)", "α_$n$ = 2ε_$n$", "(SU($n$)/SO($n$)) × S¹", "1", "U($n$)", "SL($n$,ℝ) × ℝ", "n", &[("n", 2)]),
    entry("xii", "e7(−25)", "α_3", "(E7/F4) × S¹", "1", "E6 × S¹", "E6(−26) × ℝ", "3", &[]),
    entry("xiii", "so($n+2$,ℂ)", ROOT_12, "SO($n+2$)/S(O(2) × O($n$))", "2", "SO($n+2$)", "SO($n$,2)", "min(n,2)", &[("n", 1)]),
    entry("xiv", "so($2n$,ℂ)", "α_i, i ∈ {$n-1$, $n$}", "SO($2n$)/U($n$)", "2", "SO($2n$)", "SO*($2n$)", "floor(n/2)", &[("n", 2)]),
    entry("xv", "sp($2n$,ℂ)", "α_$n$ = 2ε_$n$", "Sp($n$)/U($n$)", "2", "Sp($n$)", "Sp($2n$,ℝ)", "n", &[("n", 1)]),
    entry("xvi", "e6,ℂ", "α_i, i ∈ {1, 5}", "E6/(SO(2) × SO(10))", "2", "E6", "E6(−14)", "2", &[]),
    entry("xvii", "e7,ℂ", "α_7", "E7/(SO(2) × E6)", "2", "E7", "E7(−25)", "3", &[]),
    entry("xviii", "e6(−26)", "α_i, i ∈ {1, 2}", "F4/B4", "8", "F4", "F4(−20)", "1", &[]),
    entry("xix", "e7(7)", "α_7", "SU(8)/Sp(4)", "1", "SU(8)", "SL(4,ℍ)", "3", &[]),
];

fn build(s: &Entry) -> NaganoPairRow {
    let label = |t: &str| Label::parse(t).expect("static template");
    let expr = |t: &str| Expr::parse(t).expect("static expression");
    let row = NaganoPairRow {
        id: s.id.to_string(),
        algebra: label(s.algebra),
        root: label(s.root),
        space: label(s.space),
        dim_g_alpha: expr(s.dim),
        compact_isometry: label(s.compact),
        noncompact_dual: label(s.dual),
        rank: expr(s.rank),
        parameters: Vec::new(),
        constraints: s
            .constraints
            .iter()
            .map(|(e, min)| Constraint {
                expr: expr(e),
                min: *min,
            })
            .collect(),
        rank_one_space: s.rank_one_space.map(label),
    };
    let mut params = Vec::new();
    for l in [&row.algebra, &row.root, &row.space, &row.compact_isometry, &row.noncompact_dual] {
        l.params(&mut params);
    }
    row.dim_g_alpha.params(&mut params);
    row.rank.params(&mut params);
    params.sort();
    NaganoPairRow { parameters: params, ..row }
}

/// All nineteen rows, in table order.
pub fn rows() -> &'static [NaganoPairRow] {
    static ROWS: OnceLock<Vec<NaganoPairRow>> = OnceLock::new();
    ROWS.get_or_init(|| ENTRIES.iter().map(build).collect())
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '(' && *c != ')')
        .map(|c| match c {
            'ℝ' => 'r',
            'ℂ' => 'c',
            'ℍ' => 'h',
            '−' => '-',
            _ => c.to_ascii_lowercase(),
        })
        .collect()
}

/// Row by id (`"iv"` or `"(iv)"`) or by the symbolic name of its algebra or space.
pub fn lookup(key: &str) -> Result<&'static NaganoPairRow> {
    let k = key.trim();
    let id = k.trim_start_matches('(').trim_end_matches(')').to_ascii_lowercase();
    if let Some(r) = rows().iter().find(|r| r.id == id) {
        return Ok(r);
    }
    let nk = normalize(k);
    rows()
        .iter()
        .find(|r| normalize(&r.algebra.symbolic()) == nk || normalize(&r.space.symbolic()) == nk)
        .ok_or_else(|| Error::UnknownPair(key.to_string()))
}

/// The real-type rows: those with `dim g_α = 1`.
pub fn real_type_rows() -> Vec<&'static NaganoPairRow> {
    rows().iter().filter(|r| r.is_real_type()).collect()
}

/// Binds every parameter of the row and evaluates its fields.
pub fn instantiate(id: &str, bindings: &BTreeMap<Param, u64>) -> Result<ConcreteRow> {
    let row = lookup(id)?;
    for p in bindings.keys() {
        if !row.parameters.contains(p) {
            return Err(Error::BindingOutOfRange(format!("row {} has no parameter {}", row.id, p.name())));
        }
    }
    for p in &row.parameters {
        if !bindings.contains_key(p) {
            return Err(Error::BindingOutOfRange(format!("row {} needs a value for {}", row.id, p.name())));
        }
    }
    for c in &row.constraints {
        let v = c.expr.eval(bindings).unwrap_or(0);
        if v < c.min {
            return Err(Error::BindingOutOfRange(format!(
                "row {} requires {} >= {} (got {v})",
                row.id, c.expr, c.min
            )));
        }
    }
    let eval = |e: &Expr| {
        e.eval(bindings)
            .ok_or_else(|| Error::BindingOutOfRange(format!("cannot evaluate {e} for row {}", row.id)))
    };
    let render = |l: &Label| {
        l.render(bindings)
            .ok_or_else(|| Error::BindingOutOfRange(format!("cannot render `{l}` for row {}", row.id)))
    };
    let rank = eval(&row.rank)?;
    let space = match (&row.rank_one_space, rank) {
        (Some(l), 1) => render(l)?,
        _ => render(&row.space)?,
    };
    if row.id == "iv" {
        let m = bindings[&Param::P].min(bindings[&Param::Q]);
        if (rank >= 2) != (m >= 2) {
            return Err(Error::InvariantViolation(format!("rank {rank} of Gr with min(p,q) = {m}")));
        }
    }
    Ok(ConcreteRow {
        id: row.id.clone(),
        bindings: bindings.clone(),
        algebra: render(&row.algebra)?,
        root: render(&row.root)?,
        space,
        dim_g_alpha: eval(&row.dim_g_alpha)?,
        compact_isometry: render(&row.compact_isometry)?,
        noncompact_dual: render(&row.noncompact_dual)?,
        rank,
        real_type: row.is_real_type(),
        higher_rank: rank >= 2,
    })
}

/// Fixed-width text table; real-type rows are marked with `*`.
pub fn format_table(rows: &[&NaganoPairRow]) -> String {
    let header = ["#", "g", "α", "F(g,α)", "dim g_α", "Isom(F)", "Isom(X)", "rank"];
    let body: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                format!("{}{}", r.id, if r.is_real_type() { "*" } else { "" }),
                r.algebra.symbolic(),
                r.root.symbolic(),
                r.space.symbolic(),
                r.dim_g_alpha.to_string(),
                r.compact_isometry.symbolic(),
                r.noncompact_dual.symbolic(),
                r.rank.to_string(),
            ]
        })
        .collect();
    let mut width = header.map(|h| h.chars().count());
    for row in &body {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join(" | ").trim_end());
    };
    line(&header.map(String::from));
    line(&width.map(|w| "-".repeat(w)));
    for row in &body {
        line(row);
    }
    out
}
