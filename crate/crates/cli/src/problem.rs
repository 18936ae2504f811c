//! Problem files: declarations of charts, relations, functions,
//! hamiltonians and coordinate changes, plus a task list.
//!
//! Bodies are strings in the polynomial text grammar:
//!
//! ```text
//! poly    = ["+" | "-"] term { ("+" | "-") term }
//! term    = factor { "*" factor }
//! factor  = atom [ "^" integer ]
//! atom    = rational | name | "(" poly ")"
//! rational = integer [ "/" integer ]
//! ```
//!
//! Names resolve against the chart in play. Fiber coordinates are `p_x` over
//! a cotangent chart and `x_star` over an anticotangent one.

use std::collections::{BTreeMap, HashMap};

use microformal::brackets::Hamiltonian;
use microformal::geometry::{Chart, CoordinateChange, FiberKind, PhaseChart};
use microformal::microformal::{Kind, MicroRelation};
use microformal::superalg::{parse_poly, Scope};
use microformal::{Caps, Parity, SuperPoly};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub charts: Vec<ChartDecl>,
    #[serde(default)]
    pub relations: Vec<RelationDecl>,
    #[serde(default)]
    pub functions: Vec<FunctionDecl>,
    #[serde(default)]
    pub hamiltonians: Vec<HamiltonianDecl>,
    #[serde(default)]
    pub changes: Vec<ChangeDecl>,
    #[serde(default)]
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDecl {
    pub name: String,
    /// `[name, parity]` pairs.
    pub coords: Vec<(String, Parity)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub kind: Kind,
    /// Generating function in the source coordinates and target fibers.
    pub body: String,
    pub fiber_cap: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDecl {
    pub name: String,
    pub chart: String,
    pub body: String,
    pub parity: Option<Parity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDecl {
    pub name: String,
    pub chart: String,
    pub kind: FiberKind,
    pub body: String,
    pub parity: Option<Parity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangeDecl {
    pub name: String,
    pub old: String,
    pub new: String,
    /// Old coordinates as functions of the new ones, in chart order.
    pub forward: Vec<String>,
    /// Truncation order for non-affine changes.
    pub order: Option<u32>,
}

/// One step of a problem file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Pullback { relation: String, function: String, order: Option<u32>, name: Option<String> },
    Compose { outer: String, inner: String, fiber_cap: Option<u32>, name: String },
    Coords { relation: String, change: String, name: String },
    Bracket { left: String, right: String, name: Option<String> },
    Derived { hamiltonian: String, args: Vec<String> },
    Jacobiator { hamiltonian: String, args: Vec<String> },
    Master { hamiltonian: String },
    HjApply { hamiltonian: String, function: String },
    HjCommutator { h: String, f: String, f0: String },
    Related { relation: String, source: String, target: String },
    Morphism { relation: String, source: String, target: String, function: String, order: Option<u32> },
}

impl Task {
    pub fn op(&self) -> &'static str {
        match self {
            Task::Pullback { .. } => "pullback",
            Task::Compose { .. } => "compose",
            Task::Coords { .. } => "coords",
            Task::Bracket { .. } => "bracket",
            Task::Derived { .. } => "derived",
            Task::Jacobiator { .. } => "jacobiator",
            Task::Master { .. } => "master",
            Task::HjApply { .. } => "hj_apply",
            Task::HjCommutator { .. } => "hj_commutator",
            Task::Related { .. } => "related",
            Task::Morphism { .. } => "morphism",
        }
    }
}

/// Flags that fill in values a declaration leaves open.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub order: u32,
    pub fiber_cap: Option<u32>,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { order: 2, fiber_cap: None }
    }
}

/// A function together with the chart it lives on.
#[derive(Debug, Clone)]
pub struct Function {
    pub chart: String,
    pub poly: SuperPoly,
}

/// Resolved declarations; tasks add their named results.
#[derive(Debug, Clone)]
pub struct Session {
    pub defaults: Defaults,
    pub charts: BTreeMap<String, Chart>,
    phases: HashMap<(String, FiberKind), PhaseChart>,
    pub relations: BTreeMap<String, MicroRelation>,
    pub functions: BTreeMap<String, Function>,
    pub hamiltonians: BTreeMap<String, Hamiltonian>,
    pub changes: BTreeMap<String, CoordinateChange>,
}

pub fn parse_file(text: &str) -> Result<ProblemFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("problem file, line {}, column {}: {e}", e.line(), e.column())))
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn parse_in(what: &str, src: &str, scope: &Scope) -> Result<SuperPoly, CliError> {
    parse_poly(src, scope).map_err(|e| input(format!("{what}: {e}")))
}

impl Session {
    pub fn load(file: &ProblemFile, defaults: Defaults) -> Result<Session, CliError> {
        let mut s = Session {
            defaults,
            charts: BTreeMap::new(),
            phases: HashMap::new(),
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            hamiltonians: BTreeMap::new(),
            changes: BTreeMap::new(),
        };
        for c in &file.charts {
            if s.charts.contains_key(&c.name) {
                return Err(input(format!("chart {} declared twice", c.name)));
            }
            let coords: Vec<(&str, Parity)> = c.coords.iter().map(|(n, p)| (n.as_str(), *p)).collect();
            let chart = Chart::new(&c.name, &coords).map_err(|e| input(format!("chart {}: {e}", c.name)))?;
            s.charts.insert(c.name.clone(), chart);
        }
        for f in &file.functions {
            s.fresh(&f.name, "function")?;
            let chart = s.chart(&f.chart)?.clone();
            let poly = parse_in(&format!("function {}", f.name), &f.body, &chart.scope())?;
            if let Some(p) = f.parity {
                if !poly.has_parity(p) {
                    return Err(input(format!(
                        "function {} is declared {p} but has {} terms {}",
                        f.name,
                        p.flip(),
                        poly.parity_part(p.flip())
                    )));
                }
            }
            s.functions.insert(f.name.clone(), Function { chart: f.chart.clone(), poly });
        }
        for h in &file.hamiltonians {
            s.fresh(&h.name, "hamiltonian")?;
            let phase = s.phase(&h.chart, h.kind)?;
            let body = parse_in(&format!("hamiltonian {}", h.name), &h.body, &phase.scope())?;
            let ham = match h.parity {
                Some(p) => Hamiltonian::with_parity(&phase, body, p),
                None => Hamiltonian::new(&phase, body),
            }
            .map_err(|e| input(format!("hamiltonian {}: {e}", h.name)))?;
            s.hamiltonians.insert(h.name.clone(), ham);
        }
        for r in &file.relations {
            s.fresh(&r.name, "relation")?;
            let source = s.phase(&r.source, r.kind.fiber_kind())?;
            let target = s.phase(&r.target, r.kind.fiber_kind())?;
            let mut scope = source.base().scope();
            for &q in target.fibers() {
                scope.insert(q.name().to_string(), q);
            }
            let body = parse_in(&format!("relation {}", r.name), &r.body, &scope)?;
            let caps = match r.fiber_cap.or(defaults.fiber_cap) {
                Some(0) => return Err(input(format!("relation {}: fiber cap must be positive", r.name))),
                Some(d) => Caps::fiber(d),
                None => Caps::NONE,
            };
            let rel = MicroRelation::new(&source, &target, r.kind, body, caps)
                .map_err(|e| input(format!("relation {}: {e}", r.name)))?;
            s.relations.insert(r.name.clone(), rel);
        }
        for c in &file.changes {
            s.fresh(&c.name, "change")?;
            let old = s.chart(&c.old)?.clone();
            let new = s.chart(&c.new)?.clone();
            let forward = c
                .forward
                .iter()
                .enumerate()
                .map(|(i, src)| parse_in(&format!("change {} component {i}", c.name), src, &new.scope()))
                .collect::<Result<Vec<_>, _>>()?;
            let order = c.order.unwrap_or(4);
            if order == 0 {
                return Err(input(format!("change {}: order must be positive", c.name)));
            }
            let cc = CoordinateChange::new(&old, &new, forward, order).map_err(|e| input(format!("change {}: {e}", c.name)))?;
            s.changes.insert(c.name.clone(), cc);
        }
        s.validate(&file.tasks)?;
        Ok(s)
    }

    fn fresh(&self, name: &str, what: &str) -> Result<(), CliError> {
        let taken = self.relations.contains_key(name)
            || self.functions.contains_key(name)
            || self.hamiltonians.contains_key(name)
            || self.changes.contains_key(name);
        if taken {
            return Err(input(format!("{what} {name}: name already in use")));
        }
        Ok(())
    }

    pub fn chart(&self, name: &str) -> Result<&Chart, CliError> {
        self.charts.get(name).ok_or_else(|| input(format!("unknown chart {name}")))
    }

    /// The phase chart over `chart`; one per chart and kind so that fiber
    /// names resolve to the same variables everywhere.
    pub fn phase(&mut self, chart: &str, kind: FiberKind) -> Result<PhaseChart, CliError> {
        let key = (chart.to_string(), kind);
        if let Some(p) = self.phases.get(&key) {
            return Ok(p.clone());
        }
        let p = PhaseChart::build(self.chart(chart)?, kind);
        self.phases.insert(key, p.clone());
        Ok(p)
    }

    /// Registers a phase chart built elsewhere, e.g. by a coordinate change.
    pub fn adopt_phase(&mut self, chart: &Chart, phase: &PhaseChart) {
        self.charts.entry(chart.name().to_string()).or_insert_with(|| chart.clone());
        self.phases.entry((chart.name().to_string(), phase.kind())).or_insert_with(|| phase.clone());
    }

    pub fn relation(&self, name: &str) -> Result<&MicroRelation, CliError> {
        self.relations.get(name).ok_or_else(|| input(format!("unknown relation {name}")))
    }

    pub fn function(&self, name: &str) -> Result<&Function, CliError> {
        self.functions.get(name).ok_or_else(|| input(format!("unknown function {name}")))
    }

    pub fn hamiltonian(&self, name: &str) -> Result<&Hamiltonian, CliError> {
        self.hamiltonians.get(name).ok_or_else(|| input(format!("unknown hamiltonian {name}")))
    }

    pub fn change(&self, name: &str) -> Result<&CoordinateChange, CliError> {
        self.changes.get(name).ok_or_else(|| input(format!("unknown change {name}")))
    }

    /// Static checks over the task list: every reference resolves to a
    /// declaration or an earlier result, and declared functions handed to a
    /// relation have its parity.
    fn validate(&self, tasks: &[Task]) -> Result<(), CliError> {
        let mut made_rel: Vec<&str> = Vec::new();
        let mut made_fun: Vec<&str> = Vec::new();
        let mut made_ham: Vec<&str> = Vec::new();
        for (i, t) in tasks.iter().enumerate() {
            let at = |e: CliError| input(format!("task {} ({}): {e}", i + 1, t.op()));
            let rel = |n: &str| if made_rel.contains(&n) { Ok(()) } else { self.relation(n).map(|_| ()) };
            let fun = |n: &str| if made_fun.contains(&n) { Ok(()) } else { self.function(n).map(|_| ()) };
            let ham = |n: &str| if made_ham.contains(&n) { Ok(()) } else { self.hamiltonian(n).map(|_| ()) };
            match t {
                Task::Pullback { relation, function, name, .. } => {
                    rel(relation).and_then(|_| fun(function)).map_err(at)?;
                    self.check_kind(relation, function).map_err(at)?;
                    if let Some(n) = name {
                        made_fun.push(n);
                    }
                }
                Task::Compose { outer, inner, name, .. } => {
                    rel(outer).and_then(|_| rel(inner)).map_err(at)?;
                    made_rel.push(name);
                }
                Task::Coords { relation, change, name } => {
                    rel(relation).and_then(|_| self.change(change).map(|_| ())).map_err(at)?;
                    made_rel.push(name);
                }
                Task::Bracket { left, right, name } => {
                    ham(left).and_then(|_| ham(right)).map_err(at)?;
                    if let Some(n) = name {
                        made_ham.push(n);
                    }
                }
                Task::Derived { hamiltonian, args } | Task::Jacobiator { hamiltonian, args } => {
                    ham(hamiltonian).map_err(at)?;
                    for a in args {
                        fun(a).map_err(at)?;
                    }
                }
                Task::Master { hamiltonian } => ham(hamiltonian).map_err(at)?,
                Task::HjApply { hamiltonian, function } => ham(hamiltonian).and_then(|_| fun(function)).map_err(at)?,
                Task::HjCommutator { h, f, f0 } => ham(h).and_then(|_| ham(f)).and_then(|_| fun(f0)).map_err(at)?,
                Task::Related { relation, source, target } => {
                    rel(relation).and_then(|_| ham(source)).and_then(|_| ham(target)).map_err(at)?
                }
                Task::Morphism { relation, source, target, function, .. } => {
                    rel(relation)
                        .and_then(|_| ham(source))
                        .and_then(|_| ham(target))
                        .and_then(|_| fun(function))
                        .map_err(at)?;
                    self.check_kind(relation, function).map_err(at)?;
                }
            }
        }
        Ok(())
    }

    /// For declared objects, a function pulled back by a relation must live on
    /// its target and carry the relation's parity.
    fn check_kind(&self, relation: &str, function: &str) -> Result<(), CliError> {
        let (Some(rel), Some(f)) = (self.relations.get(relation), self.functions.get(function)) else {
            return Ok(());
        };
        self.check_on_target(rel, function, f)
    }

    pub fn check_on_target(&self, rel: &MicroRelation, name: &str, f: &Function) -> Result<(), CliError> {
        let chart = self.chart(&f.chart)?;
        if chart != rel.target().base() {
            return Err(input(format!(
                "function {name} lives on {} but the relation targets {}",
                f.chart,
                rel.target().base().name()
            )));
        }
        let want = rel.kind().parity();
        if !f.poly.has_parity(want) {
            let bad = f.poly.parity_part(want.flip());
            let symbols: Vec<String> = bad.vars().iter().map(|v| v.name().to_string()).collect();
            return Err(input(format!(
                "function {name} must be {want} for a {want}-kind relation; offending part {bad} (symbols: {})",
                symbols.join(", ")
            )));
        }
        Ok(())
    }
}
