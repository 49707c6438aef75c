//! Command pipelines behind the `darbouxkit` binary.
//!
//! [`run`] never prints; it returns the exit code and a [`Report`] that the
//! binary renders as text or JSON.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cdga::Point;
use crate::darboux::{build_darboux, nondegenerate_at, DarbouxModel, Pair};
use crate::dcrit::{chart_section_check, derived_crit, dual_name, glue_check, point_dims, GlueOutcome};
use crate::expr::referenced_names;
use crate::graded::{AlgebraElement, Q};
use crate::model::{
    self, parse_point, AlgebraSection, ChartSection, DarbouxSection, GlueSection, ModelFile, ParseError,
    PointSpec, ResolutionSection, Section, StackSection, Text,
};
use crate::vanishing::{euler_specialize, motivic_nearby, motivic_vanishing, strict_transform_check};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    DarbouxBuild,
    DarbouxCheck,
    Crit,
    Cotangent,
    Glue,
    MotiveEval,
    Vanish,
    Atlas,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::DarbouxBuild => "darboux build",
            Command::DarbouxCheck => "darboux check",
            Command::Crit => "crit",
            Command::Cotangent => "cotangent",
            Command::Glue => "glue",
            Command::MotiveEval => "motive eval",
            Command::Vanish => "vanish",
            Command::Atlas => "atlas",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub seed: Option<u64>,
    pub degree_bound: Option<u32>,
    pub point: Option<String>,
    pub builtin: Option<String>,
    pub phi: bool,
    pub k: Option<i32>,
    pub hamiltonian: Option<String>,
    pub blocks: Option<String>,
    pub f: Option<String>,
    /// Random points for nondegeneracy when no point is given.
    pub samples: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub options: Options,
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<String>,
    pub checks: Vec<Check>,
    pub normal_forms: serde_json::Map<String, serde_json::Value>,
    pub timing: Timing,
}

impl Report {
    fn new(inv: &Invocation) -> Self {
        Report {
            command: inv.command.name().to_string(),
            inputs: inv.inputs.iter().map(|p| p.display().to_string()).collect(),
            checks: Vec::new(),
            normal_forms: serde_json::Map::new(),
            timing: Timing { elapsed_ms: 0 },
        }
    }

    fn check(&mut self, name: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
    }

    fn pass_if(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.check(name, if ok { Status::Pass } else { Status::Fail }, detail);
    }

    fn form(&mut self, key: impl Into<String>, value: impl ToString) {
        self.normal_forms.insert(key.into(), serde_json::Value::String(value.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{}: {verdict}\n", self.command));
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "pass ",
                Status::Fail => "FAIL ",
                Status::Error => "ERROR",
            };
            if c.detail.is_empty() {
                out.push_str(&format!("  {tag} {}\n", c.name));
            } else {
                out.push_str(&format!("  {tag} {}: {}\n", c.name, c.detail));
            }
        }
        if !self.normal_forms.is_empty() {
            out.push_str("normal forms:\n");
            for (k, v) in &self.normal_forms {
                let v = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                out.push_str(&format!("  {k} = {v}\n"));
            }
        }
        out
    }
}

/// Input errors: exit code 2.
struct InputError(String);

impl From<ParseError> for InputError {
    fn from(e: ParseError) -> Self {
        InputError(e.to_string())
    }
}

pub fn run(inv: &Invocation) -> (i32, Report) {
    let start = Instant::now();
    let mut report = Report::new(inv);
    let result = dispatch(inv, &mut report);
    report.timing.elapsed_ms = start.elapsed().as_millis() as u64;
    match result {
        Err(InputError(msg)) => {
            report.check("input", Status::Error, msg);
            (2, report)
        }
        Ok(()) if report.passed() => (0, report),
        Ok(()) => (1, report),
    }
}

fn load(inv: &Invocation) -> Result<Vec<ModelFile>, InputError> {
    inv.inputs
        .iter()
        .map(|path| {
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            model::parse(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
        })
        .collect()
}

fn flag_text(text: &str) -> Text {
    Text { text: text.to_string(), line: 1, column: 1 }
}

fn names_in(text: &str) -> Result<Vec<String>, InputError> {
    let names = referenced_names(text).map_err(|e| InputError(format!("`{text}`: {e}")))?;
    Ok(names.into_iter().collect())
}

/// Sections given by flags rather than files.
fn flag_sections(inv: &Invocation) -> Result<Vec<Section>, InputError> {
    let o = &inv.options;
    let mut out = Vec::new();
    match inv.command {
        Command::DarbouxBuild | Command::DarbouxCheck => {
            if let Some(k) = o.k {
                let h = o.hamiltonian.clone().unwrap_or_else(|| "0".into());
                let mut sec = DarbouxSection { name: "cli".into(), k: Some(k), h: Some(flag_text(&h)), ..Default::default() };
                match &o.blocks {
                    Some(b) => {
                        sec.blocks = b
                            .split(',')
                            .map(|s| s.trim().parse().map_err(|_| InputError(format!("bad --blocks `{b}`"))))
                            .collect::<Result<_, _>>()?;
                    }
                    None => {
                        sec.pairs = names_in(&h)?
                            .into_iter()
                            .map(|x| Pair { y: dual_name(&x), x, i: 0 })
                            .collect();
                    }
                }
                sec.resolve()?;
                out.push(Section::Darboux(sec));
            } else if o.hamiltonian.is_some() {
                return Err(InputError("--H needs --k".into()));
            }
        }
        Command::Crit | Command::Cotangent => {
            if let Some(f) = &o.f {
                let sec = ChartSection { name: "cli".into(), vars: names_in(f)?, f: Some(flag_text(f)), point: None };
                sec.resolve()?;
                out.push(Section::Chart(sec));
            }
        }
        Command::Vanish => {
            if let Some(b) = &o.builtin {
                let sec = ResolutionSection { name: b.clone(), builtin: Some(b.clone()), ..Default::default() };
                sec.resolve()?;
                out.push(Section::Resolution(sec));
            }
        }
        _ => {}
    }
    Ok(out)
}

fn dispatch(inv: &Invocation, report: &mut Report) -> Result<(), InputError> {
    let files = load(inv)?;
    let flags = ModelFile { sections: flag_sections(inv)? };
    let point_override = inv.options.point.as_deref().map(parse_point).transpose()?;
    let all: Vec<(&ModelFile, &Section)> = files
        .iter()
        .chain(std::iter::once(&flags))
        .flat_map(|f| f.sections.iter().map(move |s| (f, s)))
        .collect();
    let ctx = Ctx { opts: &inv.options, point: point_override };
    let before = (report.checks.len(), report.normal_forms.len());
    match inv.command {
        Command::DarbouxBuild | Command::DarbouxCheck => {
            let full = inv.command == Command::DarbouxCheck;
            for (_, s) in &all {
                if let Section::Darboux(d) = s {
                    ctx.darboux(d, full, report)?;
                }
            }
        }
        Command::Crit => {
            for (_, s) in &all {
                if let Section::Chart(c) = s {
                    ctx.crit(c, report)?;
                }
            }
        }
        Command::Cotangent => {
            for (_, s) in &all {
                match s {
                    Section::Algebra(a) => ctx.cotangent_algebra(a, report)?,
                    Section::Chart(c) => ctx.cotangent_chart(c, report)?,
                    _ => {}
                }
            }
        }
        Command::Glue => {
            for (_, s) in &all {
                if let Section::Glue(g) = s {
                    let outcome = ctx.glue_outcome(g);
                    glue_report(g, outcome, report);
                }
            }
        }
        Command::MotiveEval => {
            for (f, s) in &all {
                match s {
                    Section::Motive(m) => motive_report(m, report)?,
                    Section::Stack(st) => stack_report(st, f, report)?,
                    _ => {}
                }
            }
        }
        Command::Vanish => {
            for (_, s) in &all {
                if let Section::Resolution(r) = s {
                    ctx.vanish(r, report)?;
                }
            }
        }
        Command::Atlas => ctx.atlas(&all, report)?,
    }
    if (report.checks.len(), report.normal_forms.len()) == before {
        return Err(InputError(format!("no input sections for `{}`", inv.command.name())));
    }
    Ok(())
}

struct Ctx<'a> {
    opts: &'a Options,
    point: Option<PointSpec>,
}

fn point_text(p: &Point) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

fn dims_text(dims: &BTreeMap<i32, usize>) -> String {
    dims.iter().rev().map(|(d, n)| format!("H^{d}: {n}")).collect::<Vec<_>>().join(", ")
}

fn presentation(base: &[String], relations: &[AlgebraElement]) -> String {
    let rels: Vec<String> = relations.iter().map(ToString::to_string).collect();
    format!("Q[{}]/({})", base.join(", "), rels.join(", "))
}

impl Ctx<'_> {
    /// Explicit flag, then the section's own point, then the origin.
    fn point_for(&self, coords: &[String], own: &Option<PointSpec>) -> Point {
        let mut p: Point = coords.iter().map(|c| (c.clone(), Q::from_integer(0.into()))).collect();
        p.extend(model::to_point(own.as_ref().unwrap_or(&Vec::new())));
        if let Some(o) = &self.point {
            p.extend(model::to_point(o));
        }
        p
    }

    fn random_points(&self, coords: &[String]) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed.unwrap_or(0));
        (0..self.opts.samples.unwrap_or(5))
            .map(|_| {
                coords
                    .iter()
                    .map(|c| (c.clone(), Q::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=3).into())))
                    .collect()
            })
            .collect()
    }

    fn darboux(&self, d: &DarbouxSection, full: bool, report: &mut Report) -> Result<(), InputError> {
        let n = &d.name;
        let spec = d.resolve()?;
        let model = match build_darboux(&spec) {
            Ok(m) => m,
            Err(e) => {
                report.check(format!("{n}: build"), Status::Fail, e.to_string());
                return Ok(());
            }
        };
        report.check(format!("{n}: build"), Status::Pass, "");
        darboux_forms(n, &model, report);
        if !full {
            return Ok(());
        }
        for c in model.identity_checks() {
            report.pass_if(format!("{n}: {}", c.name), c.passed(), c.residual.to_string());
        }
        for (g, r) in model.bracket_checks() {
            report.pass_if(format!("{n}: d({g}) = {{H,{g}}}"), r.is_zero(), r.to_string());
        }
        let hh = spec.poisson_bracket(&spec.hamiltonian, &spec.hamiltonian).map_err(|e| InputError(e.to_string()))?;
        report.pass_if(format!("{n}: {{H,H}}"), hh.is_zero(), hh.to_string());
        let coords: Vec<String> = model.set().gens().iter().filter(|g| g.degree == 0).map(|g| g.name.clone()).collect();
        let points = if self.point.is_some() || d.point.is_some() {
            vec![self.point_for(&coords, &d.point)]
        } else {
            self.random_points(&coords)
        };
        for p in points {
            let name = format!("{n}: nondegenerate at ({})", point_text(&p));
            match nondegenerate_at(&model.omega0, model.set(), &p) {
                Ok(ok) => report.pass_if(name, ok, ""),
                Err(e) => report.check(name, Status::Error, e.to_string()),
            }
        }
        Ok(())
    }

    fn crit(&self, c: &ChartSection, report: &mut Report) -> Result<(), InputError> {
        let n = &c.name;
        let (chart, _) = c.resolve()?;
        let p = self.point_for(&chart.coordinates(), &c.point);
        let model = match derived_crit(&chart.f) {
            Ok(m) => m,
            Err(e) => {
                report.check(format!("{n}: build"), Status::Fail, e.to_string());
                return Ok(());
            }
        };
        report.check(format!("{n}: build"), Status::Pass, "");
        match chart_section_check(&chart, &p) {
            Ok(ok) => report.pass_if(
                format!("{n}: critical section at ({})", point_text(&p)),
                ok,
                if ok { String::new() } else { "df ≠ 0 or f ≠ 0 at the point".into() },
            ),
            Err(e) => report.check(format!("{n}: critical section"), Status::Error, e.to_string()),
        }
        for (g, img) in model.cdga.d().images() {
            report.form(format!("{n}.d({})", model.set().get(*g).name), img);
        }
        report.form(format!("{n}.H0"), presentation(&model.cdga.base_names(), &model.cdga.h0_presentation()));
        match model.cdga.cohomology_dims(&p) {
            Ok(dims) => report.form(format!("{n}.cohomology"), dims_text(&dims)),
            Err(e) => report.check(format!("{n}: cohomology"), Status::Error, e.to_string()),
        }
        Ok(())
    }

    fn cotangent_algebra(&self, a: &AlgebraSection, report: &mut Report) -> Result<(), InputError> {
        let n = &a.name;
        let cdga = match a.build()? {
            Ok(c) => c,
            Err(e) => {
                report.check(format!("{n}: build"), Status::Fail, e);
                return Ok(());
            }
        };
        report.check(format!("{n}: build"), Status::Pass, "");
        let p = self.point_for(&cdga.base_names(), &a.point);
        report.form(format!("{n}.H0"), presentation(&cdga.base_names(), &cdga.h0_presentation()));
        match (cdga.fibre_complex(&p), cdga.cohomology_dims(&p), cdga.is_minimal_at(&p)) {
            (Ok(fc), Ok(dims), Ok(minimal)) => {
                let ranks: Vec<String> =
                    fc.basis.iter().rev().map(|(d, b)| format!("{d}: {}", b.len())).collect();
                report.form(format!("{n}.fibre ranks"), ranks.join(", "));
                report.form(format!("{n}.cohomology"), dims_text(&dims));
                report.form(format!("{n}.minimal"), minimal);
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                report.check(format!("{n}: fibre at ({})", point_text(&p)), Status::Error, e.to_string());
            }
        }
        Ok(())
    }

    fn cotangent_chart(&self, c: &ChartSection, report: &mut Report) -> Result<(), InputError> {
        let n = &c.name;
        let (chart, _) = c.resolve()?;
        let p = self.point_for(&chart.coordinates(), &c.point);
        match point_dims(&chart.f, &p) {
            Ok(d) => {
                report.check(format!("{n}: critical at ({})", point_text(&p)), Status::Pass, "");
                report.form(format!("{n}.hessian rank"), d.rank);
                report.form(format!("{n}.tangent dim"), d.tangent_dim);
                let s: Vec<String> = d.sequence.iter().map(ToString::to_string).collect();
                report.form(format!("{n}.sequence"), s.join(" -> "));
                report.form(format!("{n}.canonical exponent"), d.canonical_exponent);
            }
            Err(e) => report.check(format!("{n}: critical at ({})", point_text(&p)), Status::Fail, e.to_string()),
        }
        Ok(())
    }

    fn glue_outcome(&self, g: &GlueSection) -> Result<(GlueOutcome, bool), String> {
        let mut datum = g.resolve().map_err(|e| e.to_string())?;
        if let Some(b) = self.opts.degree_bound {
            datum.bound = Some(b);
        }
        let outcome = glue_check(&datum).map_err(|e| e.to_string())?;
        let verified = outcome.verify(&datum.ideal);
        Ok((outcome, verified))
    }

    fn vanish(&self, r: &ResolutionSection, report: &mut Report) -> Result<(), InputError> {
        let n = &r.name;
        let d = r.resolve()?;
        let strict = strict_transform_check(&d);
        report.pass_if(format!("{n}: strict transform"), strict.ok, strict.diagnostics.join("; "));
        let (key, value) = if self.opts.phi { ("phi", motivic_vanishing(&d)) } else { ("psi", motivic_nearby(&d)) };
        match value {
            Ok(v) => {
                report.form(format!("{n}.{key}"), &v);
                match euler_specialize(&d, &v) {
                    Ok(chi) => report.form(format!("{n}.chi({key})"), chi),
                    Err(e) => report.form(format!("{n}.chi({key})"), format!("unavailable: {e}")),
                }
            }
            Err(e) => report.check(format!("{n}: {key}"), Status::Error, e.to_string()),
        }
        Ok(())
    }

    fn atlas(&self, all: &[(&ModelFile, &Section)], report: &mut Report) -> Result<(), InputError> {
        enum Job<'s> {
            Chart(&'s ChartSection),
            Glue(&'s GlueSection),
        }
        let jobs: Vec<Job<'_>> = all
            .iter()
            .filter_map(|(_, s)| match s {
                Section::Chart(c) => Some(Job::Chart(c)),
                Section::Glue(g) => Some(Job::Glue(g)),
                _ => None,
            })
            .collect();
        let results: Vec<Report> = std::thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .iter()
                .map(|job| {
                    scope.spawn(move || {
                        let mut local = Report {
                            command: String::new(),
                            inputs: Vec::new(),
                            checks: Vec::new(),
                            normal_forms: serde_json::Map::new(),
                            timing: Timing { elapsed_ms: 0 },
                        };
                        match job {
                            Job::Chart(c) => {
                                if let Err(InputError(e)) = self.crit(c, &mut local) {
                                    local.check(format!("{}: chart", c.name), Status::Error, e);
                                }
                            }
                            Job::Glue(g) => glue_report(g, self.glue_outcome(g), &mut local),
                        }
                        local
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for r in results {
            report.checks.extend(r.checks);
            report.normal_forms.extend(r.normal_forms);
        }
        Ok(())
    }
}

fn darboux_forms(n: &str, model: &DarbouxModel, report: &mut Report) {
    report.form(format!("{n}.class"), model.classification);
    for (g, img) in model.cdga.d().images() {
        report.form(format!("{n}.d({})", model.set().get(*g).name), img);
    }
    report.form(format!("{n}.omega0"), &model.omega0);
    report.form(format!("{n}.Phi"), &model.big_phi);
    report.form(format!("{n}.phi"), &model.small_phi);
}

fn glue_report(g: &GlueSection, outcome: Result<(GlueOutcome, bool), String>, report: &mut Report) {
    let n = &g.name;
    match outcome {
        Ok((o, verified)) => {
            report.form(format!("{n}.difference"), &o.difference);
            report.form(format!("{n}.bound"), o.bound);
            if o.member {
                let cert: Vec<String> = o
                    .certificate
                    .iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|((a, b), c)| format!("c({a},{b}) = {c}"))
                    .collect();
                report.form(format!("{n}.certificate"), if cert.is_empty() { "0".into() } else { cert.join("; ") });
                report.pass_if(
                    format!("{n}: f∘θ − f′∘θ′ ∈ I²"),
                    verified,
                    if verified { "certificate verified" } else { "certificate does not reproduce the difference" },
                );
            } else {
                report.check(
                    format!("{n}: f∘θ − f′∘θ′ ∈ I²"),
                    Status::Fail,
                    format!("{} is not in I² with cofactors of degree ≤ {}", o.difference, o.bound),
                );
            }
        }
        Err(e) => report.check(format!("{n}: f∘θ − f′∘θ′ ∈ I²"), Status::Error, e),
    }
}

fn motive_report(m: &model::MotiveSection, report: &mut Report) -> Result<(), InputError> {
    let n = &m.name;
    let r = m.resolve()?;
    for (name, v) in &r.values {
        report.form(format!("{n}.{name}"), v);
    }
    for (name, expected) in &r.expects {
        let got = r.value(name).expect("resolved");
        match got.sub(expected) {
            Ok(diff) => report.pass_if(
                format!("{n}: {name}"),
                diff.is_zero(),
                if diff.is_zero() { String::new() } else { format!("differs from the expected value by {diff}") },
            ),
            Err(e) => report.check(format!("{n}: {name}"), Status::Error, e.to_string()),
        }
    }
    for (name, expected) in &r.expect_euler {
        let got = r.value(name).expect("resolved");
        match r.universe.euler(got, &r.euler) {
            Ok(chi) => report.pass_if(
                format!("{n}: chi({name})"),
                &chi == expected,
                if &chi == expected { String::new() } else { format!("got {chi}, expected {expected}") },
            ),
            Err(e) => report.check(format!("{n}: chi({name})"), Status::Error, e.to_string()),
        }
    }
    Ok(())
}

fn stack_report(st: &StackSection, file: &ModelFile, report: &mut Report) -> Result<(), InputError> {
    let n = &st.name;
    let r = st.resolve(file)?;
    match r.motive.universe.assemble_stack_motive(&r.context, &r.data) {
        Ok(total) => {
            report.form(format!("{n}.motive"), &total);
            if let Some(expected) = &r.expect {
                match total.sub(expected) {
                    Ok(diff) => report.pass_if(format!("{n}: assembly"), diff.is_zero(), diff.to_string()),
                    Err(e) => report.check(format!("{n}: assembly"), Status::Error, e.to_string()),
                }
            }
        }
        Err(e) => report.check(format!("{n}: assembly"), Status::Error, e.to_string()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(command: Command, options: Options) -> (i32, Report) {
        run(&Invocation { command, options, inputs: Vec::new() })
    }

    #[test]
    fn darboux_check_from_flags() {
        let (code, r) = flags(
            Command::DarbouxCheck,
            Options { k: Some(-1), hamiltonian: Some("x^2".into()), ..Default::default() },
        );
        assert_eq!(code, 0, "{}", r.to_text());
        assert!(r.checks.iter().any(|c| c.name == "cli: dPhi"));
        assert_eq!(r.normal_forms["cli.d(y_x)"], "2*x");
    }

    #[test]
    fn vanish_builtin_phi() {
        let (code, r) = flags(Command::Vanish, Options { builtin: Some("power:2".into()), phi: true, ..Default::default() });
        assert_eq!(code, 0);
        assert_eq!(r.normal_forms["power:2.phi"], "1");
    }

    #[test]
    fn missing_input_is_exit_2() {
        let (code, _) = flags(Command::Glue, Options::default());
        assert_eq!(code, 2);
        let (code, _) = flags(Command::Vanish, Options { builtin: Some("nope".into()), ..Default::default() });
        assert_eq!(code, 2);
    }
}
