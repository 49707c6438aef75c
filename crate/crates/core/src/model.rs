//! Declarative model files.
//!
//! Line-oriented sections `[kind NAME]`; `#` starts a comment. See the README
//! for the full grammar. [`parse`] checks syntax and resolves every name, and
//! [`ModelFile`]'s `Display` prints a canonical form that parses back to an
//! equal value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::cdga::{Point, StandardFormCdga};
use crate::darboux::{DarbouxLayout, DarbouxSpec, Pair};
use crate::dcrit::{CriticalChart, GlueDatum};
use crate::expr::{parse_element, ExprError};
use crate::graded::{AlgebraElement, GeneratorSet, Q};
use crate::motive::{
    Evaluator, GroupKind, MorphismKind, MotiveElement, MotiveError, OdotRule, Square, StackContext, Stratum,
    StratumData, Universe,
};
use crate::vanishing::{builtin_datum, Divisor, ResolutionDatum, StratumClass};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A piece of source text; equality ignores its position.
#[derive(Debug, Clone, Default)]
pub struct Text {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Text {
    fn eq(&self, o: &Text) -> bool {
        self.text == o.text
    }
}

impl Eq for Text {}

impl fmt::Display for Text {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text)
    }
}

impl Text {
    fn error(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column + column.saturating_sub(1), message: message.into() }
    }

    fn expr_error(&self, e: ExprError) -> ParseError {
        self.error(e.column, e.message)
    }

    fn motive_error(&self, e: MotiveError) -> ParseError {
        match e {
            MotiveError::Syntax { message, column } => self.error(column, message),
            other => self.error(1, other.to_string()),
        }
    }

    pub fn element(&self, set: &Arc<GeneratorSet>) -> Result<AlgebraElement, ParseError> {
        parse_element(&self.text, set).map_err(|e| self.expr_error(e))
    }

    pub fn motive(&self, ev: &Evaluator<'_>) -> Result<MotiveElement, ParseError> {
        ev.eval(&self.text).map_err(|e| self.motive_error(e))
    }
}

pub type PointSpec = Vec<(String, Q)>;

pub fn to_point(p: &PointSpec) -> Point {
    p.iter().cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenLine {
    pub name: String,
    pub degree: i32,
    pub image: Option<Text>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlgebraSection {
    pub name: String,
    pub base: Vec<String>,
    pub gens: Vec<GenLine>,
    pub point: Option<PointSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DarbouxSection {
    pub name: String,
    pub k: Option<i32>,
    pub blocks: Vec<usize>,
    pub z: usize,
    pub w: usize,
    pub pairs: Vec<Pair>,
    pub selfs: Vec<String>,
    pub stacky: Vec<String>,
    pub images: Vec<(String, Text)>,
    pub h: Option<Text>,
    pub point: Option<PointSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChartSection {
    pub name: String,
    pub vars: Vec<String>,
    pub f: Option<Text>,
    pub point: Option<PointSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GlueSection {
    pub name: String,
    pub vars: Vec<String>,
    pub ideal: Vec<Text>,
    pub f: Option<(Vec<String>, Text)>,
    pub f_prime: Option<(Vec<String>, Text)>,
    pub theta: Vec<(String, Text)>,
    pub theta_prime: Vec<(String, Text)>,
    pub bound: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MotiveItem {
    Class { name: String, base: String, order: u32, invertible: bool, euler: Option<Q> },
    Bundle { name: String, base: String, euler: Option<Q> },
    Morphism { name: String, source: String, target: String, kind: MorphismKind },
    Square(Square),
    Rule { left: Text, right: Text, result: Text },
    Euler { symbol: String, value: Q },
    Let { name: String, expr: Text },
    Expect { name: String, expr: Text },
    ExpectEuler { name: String, value: Q },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MotiveSection {
    pub name: String,
    pub items: Vec<MotiveItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumLine {
    pub label: String,
    pub inclusion: String,
    pub group: u32,
    pub atlas: String,
    pub via: String,
    pub dim: u32,
    pub chart: Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StackSection {
    pub name: String,
    pub motive: Option<String>,
    pub base: Option<String>,
    pub strata: Vec<StratumLine>,
    pub atlas_classes: Vec<(String, Text)>,
    pub expect: Option<Text>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumSpec {
    pub divisors: Vec<String>,
    pub over_x0: bool,
    pub class: Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResolutionSection {
    pub name: String,
    pub builtin: Option<String>,
    pub base: Option<String>,
    pub dim: Option<u32>,
    pub divisors: Vec<Divisor>,
    pub classes: Vec<(String, u32, Option<Q>)>,
    pub strata: Vec<StratumSpec>,
    pub away: Option<Text>,
    pub x0_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Section {
    Algebra(AlgebraSection),
    Darboux(DarbouxSection),
    Chart(ChartSection),
    Glue(GlueSection),
    Motive(MotiveSection),
    Stack(StackSection),
    Resolution(ResolutionSection),
}

impl Section {
    pub fn name(&self) -> &str {
        match self {
            Section::Algebra(s) => &s.name,
            Section::Darboux(s) => &s.name,
            Section::Chart(s) => &s.name,
            Section::Glue(s) => &s.name,
            Section::Motive(s) => &s.name,
            Section::Stack(s) => &s.name,
            Section::Resolution(s) => &s.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Section::Algebra(_) => "algebra",
            Section::Darboux(_) => "darboux",
            Section::Chart(_) => "chart",
            Section::Glue(_) => "glue",
            Section::Motive(_) => "motive",
            Section::Stack(_) => "stack",
            Section::Resolution(_) => "resolution",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelFile {
    pub sections: Vec<Section>,
}

// ---------------------------------------------------------------- lexing

/// A line remainder with its starting column.
#[derive(Clone, Copy)]
struct Cur<'a> {
    s: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Cur<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.col, message: message.into() }
    }

    fn advance(&self, bytes: usize) -> Cur<'a> {
        let col = self.col + self.s[..bytes].chars().count();
        Cur { s: &self.s[bytes..], line: self.line, col }
    }

    fn trim(&self) -> Cur<'a> {
        let lead = self.s.len() - self.s.trim_start().len();
        let c = self.advance(lead);
        Cur { s: c.s.trim_end(), ..c }
    }

    fn is_empty(&self) -> bool {
        self.s.trim().is_empty()
    }

    /// First whitespace-delimited word and the rest.
    fn word(&self) -> (Cur<'a>, Cur<'a>) {
        let t = self.trim();
        let end = t.s.find(char::is_whitespace).unwrap_or(t.s.len());
        (Cur { s: &t.s[..end], ..t }, t.advance(end).trim())
    }

    fn need_word(&self, what: &str) -> Result<(Cur<'a>, Cur<'a>), ParseError> {
        let (w, rest) = self.word();
        if w.s.is_empty() {
            return Err(self.trim().err(format!("expected {what}")));
        }
        Ok((w, rest))
    }

    fn split_once(&self, c: char) -> Option<(Cur<'a>, Cur<'a>)> {
        let i = self.s.find(c)?;
        Some((Cur { s: &self.s[..i], ..*self }.trim(), self.advance(i + c.len_utf8()).trim()))
    }

    fn text(&self) -> Result<Text, ParseError> {
        let t = self.trim();
        if t.s.is_empty() {
            return Err(t.err("expected an expression"));
        }
        Ok(Text { text: t.s.to_string(), line: t.line, column: t.col })
    }

    /// `= EXPR` or `EXPR`.
    fn rhs(&self) -> Result<Text, ParseError> {
        let t = self.trim();
        match t.s.strip_prefix('=') {
            Some(_) => t.advance(1).text(),
            None => Err(t.err("expected `=`")),
        }
    }

    fn list(&self) -> Vec<Cur<'a>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, ch) in self.s.char_indices() {
            if ch == ',' {
                out.push(Cur { s: &self.s[start..i], ..self.advance(start) }.trim());
                start = i + 1;
            }
        }
        out.push(self.advance(start).trim());
        out.retain(|c| !c.s.is_empty());
        out
    }

    fn name(&self) -> Result<String, ParseError> {
        let t = self.trim();
        let ok = !t.s.is_empty()
            && t.s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && t.s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
        if ok {
            Ok(t.s.to_string())
        } else {
            Err(t.err(format!("`{}` is not a valid name", t.s)))
        }
    }

    fn names(&self) -> Result<Vec<String>, ParseError> {
        self.list().iter().map(Cur::name).collect()
    }

    fn int<T: std::str::FromStr>(&self) -> Result<T, ParseError> {
        let t = self.trim();
        let s = t.s.strip_prefix('=').map(str::trim).unwrap_or(t.s);
        s.parse().map_err(|_| t.err(format!("expected an integer, found `{s}`")))
    }

    fn rational(&self) -> Result<Q, ParseError> {
        let t = self.trim();
        t.s.parse::<Q>().map_err(|_| t.err(format!("expected a rational number, found `{}`", t.s)))
    }

    fn point(&self) -> Result<PointSpec, ParseError> {
        let mut out: PointSpec = Vec::new();
        for item in self.list() {
            let (k, v) = item.split_once('=').ok_or_else(|| item.err("expected `name=value`"))?;
            let name = k.name()?;
            if out.iter().any(|(n, _)| *n == name) {
                return Err(k.err(format!("`{name}` given twice")));
            }
            out.push((name, v.rational()?));
        }
        Ok(out)
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(self.trim().err(format!("unexpected `{}`", self.trim().s)))
        }
    }
}

// ---------------------------------------------------------------- parsing

pub fn parse(text: &str) -> Result<ModelFile, ParseError> {
    let mut file = ModelFile::default();
    let mut current: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let cur = Cur { s: body, line: i + 1, col: 1 };
        if cur.is_empty() {
            continue;
        }
        let t = cur.trim();
        if t.s.starts_with('[') {
            if let Some(done) = current.take() {
                file.sections.push(done);
            }
            current = Some(header(t)?);
            continue;
        }
        let section = current.as_mut().ok_or_else(|| t.err("content before the first section header"))?;
        section_line(section, t)?;
    }
    if let Some(done) = current.take() {
        file.sections.push(done);
    }
    validate(&file)?;
    Ok(file)
}

/// A point such as `x=0, y=1/2`.
pub fn parse_point(text: &str) -> Result<PointSpec, ParseError> {
    Cur { s: text, line: 1, col: 1 }.point()
}

fn header(t: Cur<'_>) -> Result<Section, ParseError> {
    let inner = t.s.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(|| t.err("unterminated section header"))?;
    let c = t.advance(1);
    let c = Cur { s: inner, ..c };
    let (kind, rest) = c.need_word("a section kind")?;
    let name = rest.name()?;
    Ok(match kind.s {
        "algebra" => Section::Algebra(AlgebraSection { name, ..Default::default() }),
        "darboux" => Section::Darboux(DarbouxSection { name, ..Default::default() }),
        "chart" => Section::Chart(ChartSection { name, ..Default::default() }),
        "glue" => Section::Glue(GlueSection { name, ..Default::default() }),
        "motive" => Section::Motive(MotiveSection { name, ..Default::default() }),
        "stack" => Section::Stack(StackSection { name, ..Default::default() }),
        "resolution" => Section::Resolution(ResolutionSection { name, ..Default::default() }),
        other => return Err(kind.err(format!("unknown section kind `{other}`"))),
    })
}

fn section_line(section: &mut Section, t: Cur<'_>) -> Result<(), ParseError> {
    match section {
        Section::Algebra(s) => algebra_line(s, t),
        Section::Darboux(s) => darboux_line(s, t),
        Section::Chart(s) => chart_line(s, t),
        Section::Glue(s) => glue_line(s, t),
        Section::Motive(s) => motive_line(s, t),
        Section::Stack(s) => stack_line(s, t),
        Section::Resolution(s) => resolution_line(s, t),
    }
}

fn unknown_key(w: Cur<'_>, kind: &str) -> ParseError {
    w.err(format!("unknown key `{}` in a [{kind}] section", w.s))
}

fn algebra_line(s: &mut AlgebraSection, t: Cur<'_>) -> Result<(), ParseError> {
    let (w, rest) = t.word();
    match w.s {
        "base" => s.base.extend(rest.names()?),
        "gen" => {
            let (name, rest) = rest.split_once(':').ok_or_else(|| rest.err("expected `gen NAME : DEGREE`"))?;
            let (deg, image) = match rest.split_once('=') {
                Some((d, e)) => (d, Some(e.text()?)),
                None => (rest, None),
            };
            let degree: i32 = deg.int()?;
            if degree > 0 {
                return Err(deg.err("degrees must be ≤ 0"));
            }
            s.gens.push(GenLine { name: name.name()?, degree, image });
        }
        "point" => s.point = Some(rest.point()?),
        _ => return Err(unknown_key(w, "algebra")),
    }
    Ok(())
}

fn darboux_line(s: &mut DarbouxSection, t: Cur<'_>) -> Result<(), ParseError> {
    let (w, rest) = t.word();
    match w.s {
        "k" => s.k = Some(rest.int()?),
        "blocks" => s.blocks = rest.list().iter().map(Cur::int).collect::<Result<_, _>>()?,
        "z" => s.z = rest.int()?,
        "w" => s.w = rest.int()?,
        "pair" => {
            let (x, r) = rest.need_word("an x name")?;
            let (y, r) = r.need_word("a y name")?;
            let (i, r) = r.need_word("the block index i")?;
            r.done()?;
            s.pairs.push(Pair { x: x.name()?, y: y.name()?, i: i.int()? });
        }
        "self" => s.selfs.push(rest.name()?),
        "stacky" => s.stacky.push(rest.name()?),
        "image" => {
            let (g, e) = rest.split_once('=').ok_or_else(|| rest.err("expected `image NAME = EXPR`"))?;
            s.images.push((g.name()?, e.text()?));
        }
        "H" => s.h = Some(rest.rhs()?),
        "point" => s.point = Some(rest.point()?),
        _ => return Err(unknown_key(w, "darboux")),
    }
    Ok(())
}

fn chart_line(s: &mut ChartSection, t: Cur<'_>) -> Result<(), ParseError> {
    let (w, rest) = t.word();
    match w.s {
        "vars" => s.vars.extend(rest.names()?),
        "f" => s.f = Some(rest.rhs()?),
        "point" => s.point = Some(rest.point()?),
        _ => return Err(unknown_key(w, "chart")),
    }
    Ok(())
}

fn glue_line(s: &mut GlueSection, t: Cur<'_>) -> Result<(), ParseError> {
    for (prefix, prime) in [("f'(", true), ("f(", false)] {
        if t.s.starts_with(prefix) {
            let after = t.advance(prefix.len());
            let (vars, rest) = after.split_once(')').ok_or_else(|| after.err("expected `)`"))?;
            let value = Some((vars.names()?, rest.rhs()?));
            if prime {
                s.f_prime = value;
            } else {
                s.f = value;
            }
            return Ok(());
        }
    }
    let (w, rest) = t.word();
    match w.s {
        "vars" => s.vars.extend(rest.names()?),
        "ideal" => {
            for item in rest.list() {
                s.ideal.push(item.text()?);
            }
        }
        "theta" | "theta'" => {
            let (g, e) = rest.split_once('=').ok_or_else(|| rest.err("expected `theta NAME = EXPR`"))?;
            let entry = (g.name()?, e.text()?);
            if w.s == "theta" {
                s.theta.push(entry);
            } else {
                s.theta_prime.push(entry);
            }
        }
        "bound" => s.bound = Some(rest.int()?),
        _ => return Err(unknown_key(w, "glue")),
    }
    Ok(())
}

fn opt_euler(rest: Cur<'_>) -> Result<Option<Q>, ParseError> {
    if rest.is_empty() {
        return Ok(None);
    }
    let (w, r) = rest.word();
    if w.s != "euler" {
        return Err(w.err("expected `euler VALUE`"));
    }
    Ok(Some(r.rational()?))
}

fn motive_line(s: &mut MotiveSection, t: Cur<'_>) -> Result<(), ParseError> {
    let (w, rest) = t.word();
    let item = match w.s {
        "class" => {
            let (name, r) = rest.split_once(':').ok_or_else(|| rest.err("expected `class NAME : BASE ...`"))?;
            let (base, mut r) = r.need_word("a base")?;
            let mut order = 1;
            let mut invertible = false;
            let mut euler = None;
            while !r.is_empty() {
                let (k, r2) = r.word();
                match k.s {
                    "order" => {
                        let (v, r3) = r2.need_word("an order")?;
                        order = v.int()?;
                        if order == 0 {
                            return Err(v.err("action order must be ≥ 1"));
                        }
                        r = r3;
                    }
                    "invertible" => {
                        invertible = true;
                        r = r2;
                    }
                    "euler" => {
                        let (v, r3) = r2.need_word("a value")?;
                        euler = Some(v.rational()?);
                        r = r3;
                    }
                    _ => return Err(k.err(format!("unknown class attribute `{}`", k.s))),
                }
            }
            MotiveItem::Class { name: name.name()?, base: base.name()?, order, invertible, euler }
        }
        "bundle" => {
            let (name, r) = rest.split_once(':').ok_or_else(|| rest.err("expected `bundle NAME : BASE`"))?;
            let (base, r) = r.need_word("a base")?;
            MotiveItem::Bundle { name: name.name()?, base: base.name()?, euler: opt_euler(r)? }
        }
        "morphism" => {
            let (name, r) = rest.split_once(':').ok_or_else(|| rest.err("expected `morphism NAME : SRC -> TGT KIND`"))?;
            let (src, r) = r.need_word("a source")?;
            let (arrow, r) = r.need_word("`->`")?;
            if arrow.s != "->" {
                return Err(arrow.err("expected `->`"));
            }
            let (tgt, r) = r.need_word("a target")?;
            MotiveItem::Morphism { name: name.name()?, source: src.name()?, target: tgt.name()?, kind: morphism_kind(r)? }
        }
        "square" => {
            let (a, r) = rest.need_word("a morphism")?;
            let (b, r) = r.need_word("a morphism")?;
            let (c, r) = r.need_word("a morphism")?;
            let (d, r) = r.need_word("a morphism")?;
            r.done()?;
            MotiveItem::Square(Square { pull: a.name()?, push: b.name()?, new_pull: c.name()?, new_push: d.name()? })
        }
        "rule" => {
            let (lhs, rhs) = rest.split_once('=').ok_or_else(|| rest.err("expected `rule A, B = EXPR`"))?;
            let (l, r) = lhs.split_once(',').ok_or_else(|| lhs.err("expected `A, B`"))?;
            MotiveItem::Rule { left: l.text()?, right: r.text()?, result: rhs.text()? }
        }
        "euler" => {
            let eq = rest.s.rfind('=').ok_or_else(|| rest.err("expected `euler SYMBOL = VALUE`"))?;
            let sym = Cur { s: &rest.s[..eq], ..rest }.trim();
            MotiveItem::Euler { symbol: sym.s.to_string(), value: rest.advance(eq + 1).rational()? }
        }
        "let" => {
            let (n, e) = rest.split_once('=').ok_or_else(|| rest.err("expected `let NAME = EXPR`"))?;
            MotiveItem::Let { name: n.name()?, expr: e.text()? }
        }
        "expect" => {
            let (n, e) = rest.split_once('=').ok_or_else(|| rest.err("expected `expect NAME = EXPR`"))?;
            let (first, more) = n.word();
            if first.s == "euler" && !more.is_empty() {
                MotiveItem::ExpectEuler { name: more.name()?, value: e.rational()? }
            } else {
                MotiveItem::Expect { name: n.name()?, expr: e.text()? }
            }
        }
        _ => return Err(unknown_key(w, "motive")),
    };
    s.items.push(item);
    Ok(())
}

fn morphism_kind(r: Cur<'_>) -> Result<MorphismKind, ParseError> {
    let (k, r) = r.need_word("a morphism kind")?;
    let kind = match k.s {
        "identity" => MorphismKind::Identity,
        "representable" => MorphismKind::Representable,
        "stratum" => MorphismKind::Stratum,
        "stack" => MorphismKind::Stack,
        "smooth" => {
            let (n, r2) = r.need_word("a relative dimension")?;
            r2.done()?;
            return Ok(MorphismKind::Smooth(n.int()?));
        }
        "bundle" => {
            let (g, r2) = r.need_word("`GL N` or `special G`")?;
            let (v, r3) = r2.need_word("a group parameter")?;
            r3.done()?;
            return Ok(match g.s {
                "GL" => MorphismKind::Bundle(GroupKind::Gl(v.int()?)),
                "special" => MorphismKind::Bundle(GroupKind::Special(v.name()?)),
                _ => return Err(g.err("expected `GL` or `special`")),
            });
        }
        "compose" => {
            let mut parts = Vec::new();
            let mut r = r;
            while !r.is_empty() {
                let (p, r2) = r.word();
                parts.push(p.name()?);
                r = r2;
            }
            if parts.len() < 2 {
                return Err(k.err("compose needs at least two morphisms"));
            }
            return Ok(MorphismKind::Composite(parts));
        }
        other => return Err(k.err(format!("unknown morphism kind `{other}`"))),
    };
    r.done()?;
    Ok(kind)
}

fn stack_line(s: &mut StackSection, t: Cur<'_>) -> Result<(), ParseError> {
    let (w, rest) = t.word();
    match w.s {
        "motive" => s.motive = Some(rest.name()?),
        "base" => s.base = Some(rest.name()?),
        "stratum" => {
            let (head, chart) = rest.split_once('=').ok_or_else(|| rest.err("expected `stratum LABEL ... = EXPR`"))?;
            let (label, mut r) = head.need_word("a stratum label")?;
            let label = label.name()?;
            let mut line = StratumLine {
                atlas: label.clone(),
                label,
                inclusion: "id".into(),
                group: 0,
                via: "id".into(),
                dim: 0,
                chart: chart.text()?,
            };
            while !r.is_empty() {
                let (k, r2) = r.word();
                let (v, r3) = r2.need_word("a value")?;
                match k.s {
                    "incl" => line.inclusion = v.name()?,
                    "group" => line.group = v.int()?,
                    "atlas" => line.atlas = v.name()?,
                    "via" => line.via = v.name()?,
                    "dim" => line.dim = v.int()?,
                    _ => return Err(k.err(format!("unknown stratum attribute `{}`", k.s))),
                }
                r = r3;
            }
            s.strata.push(line);
        }
        "atlas_class" => {
            let (l, e) = rest.split_once('=').ok_or_else(|| rest.err("expected `atlas_class LABEL = EXPR`"))?;
            s.atlas_classes.push((l.name()?, e.text()?));
        }
        "expect" => s.expect = Some(rest.rhs()?),
        _ => return Err(unknown_key(w, "stack")),
    }
    Ok(())
}

fn resolution_line(s: &mut ResolutionSection, t: Cur<'_>) -> Result<(), ParseError> {
    let (w, rest) = t.word();
    match w.s {
        "builtin" => s.builtin = Some(rest.trim().s.to_string()),
        "base" => s.base = Some(rest.name()?),
        "dim" => s.dim = Some(rest.int()?),
        "x0_empty" => {
            rest.done()?;
            s.x0_empty = true;
        }
        "divisor" => {
            let (name, r) = rest.need_word("a divisor name")?;
            let (n, r) = r.need_word("N")?;
            let (nu, r) = r.need_word("ν")?;
            let (flag, r) = r.word();
            r.done()?;
            let strict = match flag.s {
                "" => false,
                "strict" => true,
                _ => return Err(flag.err("expected `strict` or end of line")),
            };
            s.divisors.push(Divisor { name: name.name()?, n: n.int()?, nu: nu.int()?, strict });
        }
        "class" => {
            let (name, r) = rest.split_once(':').ok_or_else(|| rest.err("expected `class NAME : ORDER [euler V]`"))?;
            let (order, r) = r.need_word("an action order")?;
            s.classes.push((name.name()?, order.int()?, opt_euler(r)?));
        }
        "stratum" => {
            let (head, class) = rest.split_once('=').ok_or_else(|| rest.err("expected `stratum E1,E2 [x0] = EXPR`"))?;
            let (divs, r) = head.need_word("divisor names")?;
            let over_x0 = match r.trim().s {
                "" => false,
                "x0" => true,
                _ => return Err(r.err("expected `x0` or `=`")),
            };
            s.strata.push(StratumSpec { divisors: divs.names()?, over_x0, class: class.text()? });
        }
        "away" => s.away = Some(rest.rhs()?),
        _ => return Err(unknown_key(w, "resolution")),
    }
    Ok(())
}

// ---------------------------------------------------------------- resolution

fn check_unique_sections(file: &ModelFile) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for s in &file.sections {
        if !seen.insert((s.kind(), s.name())) {
            return Err(ParseError { line: 0, column: 0, message: format!("duplicate section [{} {}]", s.kind(), s.name()) });
        }
    }
    Ok(())
}

fn validate(file: &ModelFile) -> Result<(), ParseError> {
    check_unique_sections(file)?;
    for s in &file.sections {
        match s {
            Section::Algebra(a) => {
                a.resolve_images()?;
            }
            Section::Darboux(d) => {
                d.resolve()?;
            }
            Section::Chart(c) => {
                c.resolve()?;
            }
            Section::Glue(g) => {
                g.resolve()?;
            }
            Section::Motive(m) => {
                m.resolve()?;
            }
            Section::Stack(st) => {
                st.resolve(file)?;
            }
            Section::Resolution(r) => {
                r.resolve()?;
            }
        }
    }
    Ok(())
}

fn whole(message: impl Into<String>) -> ParseError {
    ParseError { line: 0, column: 0, message: message.into() }
}

fn check_point(set: &GeneratorSet, p: &Option<PointSpec>) -> Result<(), ParseError> {
    for (n, _) in p.iter().flatten() {
        if set.lookup(n).is_none() {
            return Err(whole(format!("point names unknown coordinate `{n}`")));
        }
    }
    Ok(())
}

impl AlgebraSection {
    pub fn generator_set(&self) -> Result<Arc<GeneratorSet>, ParseError> {
        let mut gens: Vec<(String, i32)> = self.base.iter().map(|b| (b.clone(), 0)).collect();
        gens.extend(self.gens.iter().map(|g| (g.name.clone(), g.degree)));
        GeneratorSet::new(gens).map_err(|e| whole(format!("[algebra {}]: {e}", self.name)))
    }

    pub fn resolve_images(&self) -> Result<(Arc<GeneratorSet>, BTreeMap<String, AlgebraElement>), ParseError> {
        let set = self.generator_set()?;
        check_point(&set, &self.point)?;
        let mut images = BTreeMap::new();
        for g in &self.gens {
            if let Some(t) = &g.image {
                images.insert(g.name.clone(), t.element(&set)?);
            }
        }
        Ok((set, images))
    }

    /// Builds the cdga; type errors (degrees, d² ≠ 0) are returned as text.
    pub fn build(&self) -> Result<Result<StandardFormCdga, String>, ParseError> {
        let (set, images) = self.resolve_images()?;
        let images = images.into_iter().map(|(n, e)| (set.lookup(&n).expect("declared"), e)).collect();
        Ok(StandardFormCdga::build(&set, images).map_err(|e| e.to_string()))
    }
}

impl DarbouxSection {
    pub fn layout(&self) -> Result<DarbouxLayout, ParseError> {
        let k = self.k.ok_or_else(|| whole(format!("[darboux {}] needs `k`", self.name)))?;
        let mut layout = DarbouxLayout::standard(k, &self.blocks, self.z, self.w);
        layout.pairs.extend(self.pairs.iter().cloned());
        layout.selfs.extend(self.selfs.iter().cloned());
        layout.stacky.extend(self.stacky.iter().cloned());
        Ok(layout)
    }

    /// The unverified spec; Hamiltonian degree errors surface here.
    pub fn resolve(&self) -> Result<DarbouxSpec, ParseError> {
        let layout = self.layout()?;
        let set = layout.generator_set().map_err(|e| whole(format!("[darboux {}]: {e}", self.name)))?;
        check_point(&set, &self.point)?;
        let h = match &self.h {
            Some(t) => t.element(&set)?,
            None => AlgebraElement::zero(&set),
        };
        let err = |e: crate::darboux::DarbouxError| match &self.h {
            Some(t) => t.error(1, e.to_string()),
            None => whole(e.to_string()),
        };
        let mut spec = DarbouxSpec::new(layout, h).map_err(err)?;
        for (w, t) in &self.images {
            let e = t.element(spec.set())?;
            spec.set_stacky_image(w, e).map_err(|e| t.error(1, e.to_string()))?;
        }
        Ok(spec)
    }
}

fn coordinate_set(vars: &[String], what: &str) -> Result<Arc<GeneratorSet>, ParseError> {
    GeneratorSet::new(vars.iter().map(|v| (v.clone(), 0)).collect()).map_err(|e| whole(format!("{what}: {e}")))
}

impl ChartSection {
    pub fn resolve(&self) -> Result<(CriticalChart, Point), ParseError> {
        let set = coordinate_set(&self.vars, &format!("[chart {}]", self.name))?;
        check_point(&set, &self.point)?;
        let f = match &self.f {
            Some(t) => t.element(&set)?,
            None => return Err(whole(format!("[chart {}] needs `f`", self.name))),
        };
        let chart = CriticalChart::new(f, None).map_err(|e| whole(e.to_string()))?;
        let mut p: Point = self.vars.iter().map(|v| (v.clone(), Q::from_integer(0.into()))).collect();
        p.extend(to_point(self.point.as_ref().unwrap_or(&Vec::new())));
        Ok((chart, p))
    }
}

impl GlueSection {
    pub fn resolve(&self) -> Result<GlueDatum, ParseError> {
        let what = format!("[glue {}]", self.name);
        let v = coordinate_set(&self.vars, &what)?;
        let ideal = self.ideal.iter().map(|t| t.element(&v)).collect::<Result<Vec<_>, _>>()?;
        let side = |f: &Option<(Vec<String>, Text)>, theta: &[(String, Text)], label: &str| {
            let (vars, text) = f.as_ref().ok_or_else(|| whole(format!("{what} needs `{label}(...) = EXPR`")))?;
            let set = coordinate_set(vars, &what)?;
            let poly = text.element(&set)?;
            let mut map = BTreeMap::new();
            for x in vars {
                let img = match theta.iter().find(|(n, _)| n == x) {
                    Some((_, t)) => t.element(&v)?,
                    None if v.lookup(x).is_some() => parse_element(x, &v).expect("coordinate"),
                    None => return Err(whole(format!("{what}: no image for `{x}` in `{label}`'s chart"))),
                };
                map.insert(x.clone(), img);
            }
            for (n, t) in theta {
                if !vars.contains(n) {
                    return Err(t.error(1, format!("`{n}` is not a coordinate of `{label}`")));
                }
            }
            Ok((poly, map))
        };
        let (f, theta) = side(&self.f, &self.theta, "f")?;
        let (f_prime, theta_prime) = side(&self.f_prime, &self.theta_prime, "f'")?;
        Ok(GlueDatum { v, ideal, f, f_prime, theta, theta_prime, bound: self.bound })
    }
}

/// A motive section after evaluation.
#[derive(Debug, Clone)]
pub struct ResolvedMotive {
    pub universe: Universe,
    pub euler: BTreeMap<String, Q>,
    pub values: Vec<(String, MotiveElement)>,
    pub expects: Vec<(String, MotiveElement)>,
    pub expect_euler: Vec<(String, Q)>,
}

impl ResolvedMotive {
    pub fn value(&self, name: &str) -> Option<&MotiveElement> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

fn single_atom(e: &MotiveElement) -> Option<crate::motive::Atom> {
    let (m, c) = e.terms().iter().next()?;
    if e.terms().len() != 1 || !c.is_one() || m.0.len() != 1 || m.0.values().any(|&k| k != 1) {
        return None;
    }
    m.0.keys().next().cloned()
}

impl MotiveSection {
    pub fn resolve(&self) -> Result<ResolvedMotive, ParseError> {
        let mut out = ResolvedMotive {
            universe: Universe::new(),
            euler: BTreeMap::new(),
            values: Vec::new(),
            expects: Vec::new(),
            expect_euler: Vec::new(),
        };
        let decl = |e: MotiveError| whole(format!("[motive {}]: {e}", self.name));
        for item in &self.items {
            let ev = Evaluator { universe: &out.universe, stacks: &[] };
            match item {
                MotiveItem::Class { name, base, order, invertible, euler } => {
                    out.universe.declare_class(name, base, *order, *invertible, euler.clone()).map_err(decl)?;
                }
                MotiveItem::Bundle { name, base, euler } => {
                    out.universe.declare_bundle(name, base, euler.clone()).map_err(decl)?;
                }
                MotiveItem::Morphism { name, source, target, kind } => {
                    out.universe.declare_morphism(name, source, target, kind.clone()).map_err(decl)?;
                }
                MotiveItem::Square(sq) => out.universe.declare_square(sq.clone()).map_err(decl)?,
                MotiveItem::Rule { left, right, result } => {
                    let l = single_atom(&left.motive(&ev)?).ok_or_else(|| left.error(1, "expected a single symbol"))?;
                    let r = single_atom(&right.motive(&ev)?).ok_or_else(|| right.error(1, "expected a single symbol"))?;
                    let result = result.motive(&ev)?;
                    out.universe.declare_rule(OdotRule { left: l, right: r, result });
                }
                MotiveItem::Euler { symbol, value } => {
                    out.euler.insert(symbol.clone(), value.clone());
                }
                MotiveItem::Let { name, expr } => {
                    if out.value(name).is_some() {
                        return Err(expr.error(1, format!("`{name}` is already defined")));
                    }
                    let v = expr.motive(&ev)?;
                    out.values.push((name.clone(), v));
                }
                MotiveItem::Expect { name, expr } => {
                    if out.value(name).is_none() {
                        return Err(expr.error(1, format!("`{name}` is not defined")));
                    }
                    let v = expr.motive(&ev)?;
                    out.expects.push((name.clone(), v));
                }
                MotiveItem::ExpectEuler { name, value } => {
                    if out.value(name).is_none() {
                        return Err(whole(format!("[motive {}]: `{name}` is not defined", self.name)));
                    }
                    out.expect_euler.push((name.clone(), value.clone()));
                }
            }
        }
        Ok(out)
    }
}

/// A stack section after evaluation.
#[derive(Debug, Clone)]
pub struct ResolvedStack {
    pub motive: ResolvedMotive,
    pub context: StackContext,
    pub data: Vec<StratumData>,
    pub expect: Option<MotiveElement>,
}

impl StackSection {
    pub fn resolve(&self, file: &ModelFile) -> Result<ResolvedStack, ParseError> {
        let what = format!("[stack {}]", self.name);
        let mname = self.motive.as_ref().ok_or_else(|| whole(format!("{what} needs `motive NAME`")))?;
        let msec = file
            .sections
            .iter()
            .find_map(|s| match s {
                Section::Motive(m) if &m.name == mname => Some(m),
                _ => None,
            })
            .ok_or_else(|| whole(format!("{what}: no [motive {mname}] section")))?;
        let motive = msec.resolve()?;
        let base = self.base.clone().ok_or_else(|| whole(format!("{what} needs `base`")))?;
        let context = StackContext {
            base: base.clone(),
            strata: self
                .strata
                .iter()
                .map(|s| Stratum {
                    label: s.label.clone(),
                    inclusion: s.inclusion.clone(),
                    group: s.group,
                    atlas: s.atlas.clone(),
                    atlas_map: s.via.clone(),
                    rel_dim: s.dim,
                })
                .collect(),
        };
        for (l, t) in &self.atlas_classes {
            if !self.strata.iter().any(|s| &s.label == l) {
                return Err(t.error(1, format!("no stratum `{l}`")));
            }
        }
        let stacks = [context.clone()];
        let ev = Evaluator { universe: &motive.universe, stacks: &stacks };
        let mut data = Vec::new();
        for s in &self.strata {
            let chart = s.chart.motive(&ev)?;
            let atlas_class = match self.atlas_classes.iter().find(|(l, _)| l == &s.label) {
                Some((_, t)) => Some(t.motive(&ev)?),
                None => None,
            };
            data.push(StratumData { atlas_class, chart_motive: chart.rebased_if_scalar(&s.atlas), rel_dim: s.dim });
        }
        let expect = match &self.expect {
            Some(t) => Some(t.motive(&ev)?),
            None => None,
        };
        Ok(ResolvedStack { motive, context, data, expect })
    }
}

impl MotiveElement {
    /// Scalars written without a base are placed over `base`.
    pub fn rebased_if_scalar(self, base: &str) -> MotiveElement {
        if self.base() == crate::motive::POINT {
            self.rebased(base)
        } else {
            self
        }
    }
}

impl ResolutionSection {
    pub fn resolve(&self) -> Result<ResolutionDatum, ParseError> {
        let what = format!("[resolution {}]", self.name);
        if let Some(b) = &self.builtin {
            return builtin_datum(b).map_err(|e| whole(format!("{what}: {e}")));
        }
        let base = self.base.clone().unwrap_or_else(|| "X0".to_string());
        let mut d = ResolutionDatum::empty(&base);
        d.dim_u = self.dim;
        d.x0_empty = self.x0_empty;
        d.divisors = self.divisors.clone();
        let mut u = Universe::new();
        for (name, order, euler) in &self.classes {
            u.declare_class(name, &base, *order, false, euler.clone()).map_err(|e| whole(format!("{what}: {e}")))?;
            if let Some(v) = euler {
                d.euler.insert(name.clone(), v.clone());
            }
        }
        let ev = Evaluator { universe: &u, stacks: &[] };
        for s in &self.strata {
            let mut subset = BTreeSet::new();
            for n in &s.divisors {
                let i = d
                    .divisors
                    .iter()
                    .position(|x| &x.name == n)
                    .ok_or_else(|| s.class.error(1, format!("unknown divisor `{n}`")))?;
                subset.insert(i);
            }
            let class = s.class.motive(&ev)?.rebased_if_scalar(&base);
            d.strata.push(StratumClass { subset, class, over_x0: s.over_x0 });
        }
        if let Some(t) = &self.away {
            d.away_class = Some(t.motive(&ev)?.rebased_if_scalar(&base));
        }
        d.validate().map_err(|e| whole(format!("{what}: {e}")))?;
        Ok(d)
    }
}

// ---------------------------------------------------------------- printing

fn point_text(p: &PointSpec) -> String {
    p.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(", ")
}

fn kind_text(k: &MorphismKind) -> String {
    match k {
        MorphismKind::Identity => "identity".into(),
        MorphismKind::Representable => "representable".into(),
        MorphismKind::Smooth(n) => format!("smooth {n}"),
        MorphismKind::Bundle(GroupKind::Gl(n)) => format!("bundle GL {n}"),
        MorphismKind::Bundle(GroupKind::Special(g)) => format!("bundle special {g}"),
        MorphismKind::Stratum => "stratum".into(),
        MorphismKind::Stack => "stack".into(),
        MorphismKind::Composite(parts) => format!("compose {}", parts.join(" ")),
    }
}

fn euler_suffix(e: &Option<Q>) -> String {
    e.as_ref().map(|v| format!(" euler {v}")).unwrap_or_default()
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{} {}]", self.kind(), self.name())?;
        match self {
            Section::Algebra(s) => {
                if !s.base.is_empty() {
                    writeln!(f, "base {}", s.base.join(", "))?;
                }
                for g in &s.gens {
                    match &g.image {
                        Some(t) => writeln!(f, "gen {} : {} = {t}", g.name, g.degree)?,
                        None => writeln!(f, "gen {} : {}", g.name, g.degree)?,
                    }
                }
                if let Some(p) = &s.point {
                    writeln!(f, "point {}", point_text(p))?;
                }
            }
            Section::Darboux(s) => {
                if let Some(k) = s.k {
                    writeln!(f, "k {k}")?;
                }
                if !s.blocks.is_empty() {
                    let b: Vec<String> = s.blocks.iter().map(ToString::to_string).collect();
                    writeln!(f, "blocks {}", b.join(", "))?;
                }
                if s.z > 0 {
                    writeln!(f, "z {}", s.z)?;
                }
                if s.w > 0 {
                    writeln!(f, "w {}", s.w)?;
                }
                for p in &s.pairs {
                    writeln!(f, "pair {} {} {}", p.x, p.y, p.i)?;
                }
                for z in &s.selfs {
                    writeln!(f, "self {z}")?;
                }
                for w in &s.stacky {
                    writeln!(f, "stacky {w}")?;
                }
                for (w, t) in &s.images {
                    writeln!(f, "image {w} = {t}")?;
                }
                if let Some(h) = &s.h {
                    writeln!(f, "H = {h}")?;
                }
                if let Some(p) = &s.point {
                    writeln!(f, "point {}", point_text(p))?;
                }
            }
            Section::Chart(s) => {
                writeln!(f, "vars {}", s.vars.join(", "))?;
                if let Some(t) = &s.f {
                    writeln!(f, "f = {t}")?;
                }
                if let Some(p) = &s.point {
                    writeln!(f, "point {}", point_text(p))?;
                }
            }
            Section::Glue(s) => {
                writeln!(f, "vars {}", s.vars.join(", "))?;
                if !s.ideal.is_empty() {
                    let parts: Vec<&str> = s.ideal.iter().map(|t| t.text.as_str()).collect();
                    writeln!(f, "ideal {}", parts.join(", "))?;
                }
                if let Some((vars, t)) = &s.f {
                    writeln!(f, "f({}) = {t}", vars.join(", "))?;
                }
                if let Some((vars, t)) = &s.f_prime {
                    writeln!(f, "f'({}) = {t}", vars.join(", "))?;
                }
                for (n, t) in &s.theta {
                    writeln!(f, "theta {n} = {t}")?;
                }
                for (n, t) in &s.theta_prime {
                    writeln!(f, "theta' {n} = {t}")?;
                }
                if let Some(b) = s.bound {
                    writeln!(f, "bound {b}")?;
                }
            }
            Section::Motive(s) => {
                for item in &s.items {
                    match item {
                        MotiveItem::Class { name, base, order, invertible, euler } => {
                            let inv = if *invertible { " invertible" } else { "" };
                            writeln!(f, "class {name} : {base} order {order}{inv}{}", euler_suffix(euler))?;
                        }
                        MotiveItem::Bundle { name, base, euler } => {
                            writeln!(f, "bundle {name} : {base}{}", euler_suffix(euler))?;
                        }
                        MotiveItem::Morphism { name, source, target, kind } => {
                            writeln!(f, "morphism {name} : {source} -> {target} {}", kind_text(kind))?;
                        }
                        MotiveItem::Square(sq) => {
                            writeln!(f, "square {} {} {} {}", sq.pull, sq.push, sq.new_pull, sq.new_push)?;
                        }
                        MotiveItem::Rule { left, right, result } => writeln!(f, "rule {left}, {right} = {result}")?,
                        MotiveItem::Euler { symbol, value } => writeln!(f, "euler {symbol} = {value}")?,
                        MotiveItem::Let { name, expr } => writeln!(f, "let {name} = {expr}")?,
                        MotiveItem::Expect { name, expr } => writeln!(f, "expect {name} = {expr}")?,
                        MotiveItem::ExpectEuler { name, value } => writeln!(f, "expect euler {name} = {value}")?,
                    }
                }
            }
            Section::Stack(s) => {
                if let Some(m) = &s.motive {
                    writeln!(f, "motive {m}")?;
                }
                if let Some(b) = &s.base {
                    writeln!(f, "base {b}")?;
                }
                for st in &s.strata {
                    writeln!(
                        f,
                        "stratum {} incl {} group {} atlas {} via {} dim {} = {}",
                        st.label, st.inclusion, st.group, st.atlas, st.via, st.dim, st.chart
                    )?;
                }
                for (l, t) in &s.atlas_classes {
                    writeln!(f, "atlas_class {l} = {t}")?;
                }
                if let Some(t) = &s.expect {
                    writeln!(f, "expect = {t}")?;
                }
            }
            Section::Resolution(s) => {
                if let Some(b) = &s.builtin {
                    writeln!(f, "builtin {b}")?;
                }
                if let Some(b) = &s.base {
                    writeln!(f, "base {b}")?;
                }
                if let Some(d) = s.dim {
                    writeln!(f, "dim {d}")?;
                }
                if s.x0_empty {
                    writeln!(f, "x0_empty")?;
                }
                for d in &s.divisors {
                    let strict = if d.strict { " strict" } else { "" };
                    writeln!(f, "divisor {} {} {}{strict}", d.name, d.n, d.nu)?;
                }
                for (n, o, e) in &s.classes {
                    writeln!(f, "class {n} : {o}{}", euler_suffix(e))?;
                }
                for st in &s.strata {
                    let x0 = if st.over_x0 { " x0" } else { "" };
                    writeln!(f, "stratum {}{x0} = {}", st.divisors.join(","), st.class)?;
                }
                if let Some(t) = &s.away {
                    writeln!(f, "away = {t}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        assert_eq!(parse("").unwrap(), ModelFile::default());
        assert_eq!(parse("# nothing\n\n").unwrap(), ModelFile::default());
    }

    #[test]
    fn algebra_round_trip() {
        let text = "[algebra A]\nbase x\ngen y : -1 = x^2\ngen w:-2\npoint x=1/2\n";
        let m = parse(text).unwrap();
        let again = parse(&m.to_string()).unwrap();
        assert_eq!(m, again);
        assert_eq!(m.to_string(), again.to_string());
    }

    #[test]
    fn positive_degree_is_rejected() {
        let err = parse("[algebra A]\nbase x\ngen y : +1\n").unwrap_err();
        assert_eq!(err.message, "degrees must be ≤ 0");
        assert_eq!((err.line, err.column), (3, 9));
    }

    #[test]
    fn expression_errors_have_positions() {
        let err = parse("[chart C]\nvars x\nf = x^2 + q\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 11));
        let err = parse("[motive M]\nlet a = L^(1/2) . L\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 17));
        assert!(parse("x = 1\n").is_err());
        assert!(parse("[nope N]\n").is_err());
    }
}
