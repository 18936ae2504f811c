//! Task execution against a loaded session.

use std::time::Instant;

use microformal::brackets::{
    canonical_poisson, canonical_schouten, derived_bracket_direct, derived_bracket_nested, jacobiator, master_defect,
};
use microformal::geometry::FiberKind;
use microformal::hamjac::{hj_apply, hj_commutator_defect, morphism_defect, relatedness_defect};
use microformal::microformal::{change_target_coords, compose, pullback, MicroRelation};
use microformal::{Caps, SuperPoly};

use crate::problem::{Defaults, Function, ProblemFile, Session, Task};
use crate::report::{Entry, Report, TaskReport, Verdict};
use crate::CliError;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub defaults: Defaults,
    /// Record wall time per task.
    pub timing: bool,
}

pub fn caps_text(c: Caps) -> Option<String> {
    let mut parts = Vec::new();
    if let Some(d) = c.fiber {
        parts.push(format!("fiber<={d}"));
    }
    if let Some(d) = c.base {
        parts.push(format!("base<={d}"));
    }
    if let Some(d) = c.parameter {
        parts.push(format!("parameter<={d}"));
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join(","))
    }
}

fn verdict(p: &SuperPoly) -> Verdict {
    if p.is_zero() {
        Verdict::Zero
    } else {
        Verdict::Nonzero
    }
}

/// Loads the declarations and runs every task in order.
pub fn run_problem(file: &ProblemFile, opts: RunOptions) -> Result<Report, CliError> {
    let mut session = Session::load(file, opts.defaults)?;
    let mut reports = Vec::with_capacity(file.tasks.len());
    for (i, task) in file.tasks.iter().enumerate() {
        let start = Instant::now();
        let mut rep = execute(&mut session, i + 1, task)
            .map_err(|e| CliError::Input(format!("task {} ({}): {e}", i + 1, task.op())))?;
        if opts.timing {
            rep.millis = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        reports.push(rep);
    }
    Ok(Report::new(reports))
}

fn relation_entry(name: &str, rel: &MicroRelation) -> Entry {
    Entry::new(format!("relation {name}"), rel.body())
}

fn register_relation(s: &mut Session, name: &str, rel: MicroRelation) -> Result<(), CliError> {
    if s.relations.contains_key(name) || s.functions.contains_key(name) || s.hamiltonians.contains_key(name) {
        return Err(CliError::Input(format!("result name {name} already in use")));
    }
    s.relations.insert(name.to_string(), rel);
    Ok(())
}

pub fn execute(s: &mut Session, index: usize, task: &Task) -> Result<TaskReport, CliError> {
    let mut rep = TaskReport::new(index, task.op());
    match task {
        Task::Pullback { relation, function, order, name } => {
            let rel = s.relation(relation)?.clone();
            let g = s.function(function)?.clone();
            s.check_on_target(&rel, function, &g)?;
            let order = order.unwrap_or(s.defaults.order);
            let r = pullback(&rel, &g.poly, order)?;
            rep.inputs.push(relation_entry(relation, &rel));
            rep.inputs.push(Entry::new(format!("function {function}"), &g.poly));
            rep.results.push(Entry::new("f", r.f()));
            for (y, phi) in rel.target().base().vars().iter().zip(r.target_map()) {
                rep.results.push(Entry::new(format!("φ_g({y})"), phi));
            }
            rep.order = Some(order);
            rep.caps = caps_text(rel.caps());
            rep.iterations = Some(r.iterations());
            if let Some(n) = name {
                if s.functions.contains_key(n) || s.relations.contains_key(n) || s.hamiltonians.contains_key(n) {
                    return Err(CliError::Input(format!("result name {n} already in use")));
                }
                let chart = rel.source().base().name().to_string();
                s.functions.insert(n.clone(), Function { chart, poly: r.value() });
            }
        }
        Task::Compose { outer, inner, fiber_cap, name } => {
            let a = s.relation(outer)?.clone();
            let b = s.relation(inner)?.clone();
            let cap = fiber_cap
                .or(s.defaults.fiber_cap)
                .or_else(|| a.caps().fiber.max(b.caps().fiber))
                .ok_or_else(|| CliError::Input("compose needs a fiber cap (task field or --fiber-cap)".into()))?;
            if cap == 0 {
                return Err(CliError::Input("fiber cap must be positive".into()));
            }
            let c = compose(&a, &b, Caps::fiber(cap))?;
            rep.inputs.push(relation_entry(outer, &a));
            rep.inputs.push(relation_entry(inner, &b));
            rep.results.push(Entry::new(name.as_str(), c.body()));
            rep.caps = caps_text(c.caps());
            register_relation(s, name, c)?;
        }
        Task::Coords { relation, change, name } => {
            let rel = s.relation(relation)?.clone();
            let cc = s.change(change)?.clone();
            let nt = s.phase(cc.new_chart().name(), rel.kind().fiber_kind())?;
            let moved = change_target_coords(&rel, &cc, &nt)?;
            rep.inputs.push(relation_entry(relation, &rel));
            for (y, f) in cc.old().vars().iter().zip(cc.forward()) {
                rep.inputs.push(Entry::new(format!("change {change}: {y}"), f));
            }
            rep.results.push(Entry::new(name.as_str(), moved.body()));
            rep.order = (!cc.is_exact()).then(|| cc.order());
            rep.caps = caps_text(moved.caps());
            register_relation(s, name, moved)?;
        }
        Task::Bracket { left, right, name } => {
            let h = s.hamiltonian(left)?.clone();
            let f = s.hamiltonian(right)?.clone();
            let b = match h.phase().kind() {
                FiberKind::Cotangent => canonical_poisson(&h, &f)?,
                FiberKind::Anticotangent => canonical_schouten(&h, &f)?,
            };
            rep.inputs.push(Entry::new(format!("hamiltonian {left}"), h.body()));
            rep.inputs.push(Entry::new(format!("hamiltonian {right}"), f.body()));
            rep.results.push(Entry::new("bracket", b.body()));
            if let Some(n) = name {
                if s.hamiltonians.contains_key(n) || s.functions.contains_key(n) || s.relations.contains_key(n) {
                    return Err(CliError::Input(format!("result name {n} already in use")));
                }
                s.hamiltonians.insert(n.clone(), b);
            }
        }
        Task::Derived { hamiltonian, args } => {
            let h = s.hamiltonian(hamiltonian)?.clone();
            let fs = functions(s, args)?;
            let direct = derived_bracket_direct(&h, &fs)?;
            let nested = derived_bracket_nested(&h, &fs)?;
            rep.inputs.push(Entry::new(format!("hamiltonian {hamiltonian}"), h.body()));
            push_args(&mut rep, args, &fs);
            let gap = &nested - &direct;
            rep.results.push(Entry::new("bracket", &direct));
            rep.results.push(Entry::new("nested - direct", &gap));
            rep.verdict = Some(verdict(&gap));
        }
        Task::Jacobiator { hamiltonian, args } => {
            let h = s.hamiltonian(hamiltonian)?.clone();
            let fs = functions(s, args)?;
            let j = jacobiator(&h, &fs)?;
            rep.inputs.push(Entry::new(format!("hamiltonian {hamiltonian}"), h.body()));
            push_args(&mut rep, args, &fs);
            rep.results.push(Entry::new(format!("J_{}", fs.len()), &j));
            rep.verdict = Some(verdict(&j));
        }
        Task::Master { hamiltonian } => {
            let h = s.hamiltonian(hamiltonian)?.clone();
            let d = master_defect(&h)?;
            rep.inputs.push(Entry::new(format!("hamiltonian {hamiltonian}"), h.body()));
            rep.results.push(Entry::new("master defect", d.body()));
            rep.verdict = Some(verdict(d.body()));
        }
        Task::HjApply { hamiltonian, function } => {
            let h = s.hamiltonian(hamiltonian)?.clone();
            let f = s.function(function)?.clone();
            let out = hj_apply(&h, &f.poly)?;
            rep.inputs.push(Entry::new(format!("hamiltonian {hamiltonian}"), h.body()));
            rep.inputs.push(Entry::new(format!("function {function}"), &f.poly));
            rep.results.push(Entry::new("H(x, ∂f/∂x)", out));
        }
        Task::HjCommutator { h, f, f0 } => {
            let hh = s.hamiltonian(h)?.clone();
            let ff = s.hamiltonian(f)?.clone();
            let g = s.function(f0)?.clone();
            let d = hj_commutator_defect(&hh, &ff, &g.poly)?;
            rep.inputs.push(Entry::new(format!("hamiltonian {h}"), hh.body()));
            rep.inputs.push(Entry::new(format!("hamiltonian {f}"), ff.body()));
            rep.inputs.push(Entry::new(format!("function {f0}"), &g.poly));
            let residual = &(&d.defect + &d.bracket) + &d.remainder;
            rep.results.push(Entry::new("defect", &d.defect));
            rep.results.push(Entry::new("bracket field on f0", &d.bracket));
            rep.results.push(Entry::new("defect + bracket field", &residual));
            if hh.phase().kind() == FiberKind::Anticotangent && !d.holds() {
                rep.notes.push(format!(
                    "the sign (-1)^H̃ with H̃ = {} would predict {}; observed defect is minus the bracket field",
                    hh.parity(),
                    d.predicted
                ));
            }
            rep.verdict = Some(verdict(&residual));
        }
        Task::Related { relation, source, target } => {
            let rel = s.relation(relation)?.clone();
            let h1 = s.hamiltonian(source)?.clone();
            let h2 = s.hamiltonian(target)?.clone();
            let d = relatedness_defect(&rel, &h1, &h2)?;
            rep.inputs.push(relation_entry(relation, &rel));
            rep.inputs.push(Entry::new(format!("hamiltonian {source}"), h1.body()));
            rep.inputs.push(Entry::new(format!("hamiltonian {target}"), h2.body()));
            rep.results.push(Entry::new("relatedness defect", &d));
            rep.caps = caps_text(rel.caps());
            rep.verdict = Some(verdict(&d));
        }
        Task::Morphism { relation, source, target, function, order } => {
            let rel = s.relation(relation)?.clone();
            let h1 = s.hamiltonian(source)?.clone();
            let h2 = s.hamiltonian(target)?.clone();
            let g = s.function(function)?.clone();
            s.check_on_target(&rel, function, &g)?;
            let order = order.unwrap_or(s.defaults.order);
            let d = morphism_defect(&rel, &h1, &h2, &g.poly, order)?;
            rep.inputs.push(relation_entry(relation, &rel));
            rep.inputs.push(Entry::new(format!("hamiltonian {source}"), h1.body()));
            rep.inputs.push(Entry::new(format!("hamiltonian {target}"), h2.body()));
            rep.inputs.push(Entry::new(format!("function {function}"), &g.poly));
            rep.results.push(Entry::new("morphism defect", &d));
            rep.order = Some(order);
            rep.caps = caps_text(rel.caps());
            rep.verdict = Some(verdict(&d));
        }
    }
    Ok(rep)
}

fn functions(s: &Session, names: &[String]) -> Result<Vec<SuperPoly>, CliError> {
    names.iter().map(|n| s.function(n).map(|f| f.poly.clone())).collect()
}

fn push_args(rep: &mut TaskReport, names: &[String], fs: &[SuperPoly]) {
    for (n, f) in names.iter().zip(fs) {
        rep.inputs.push(Entry::new(format!("function {n}"), f));
    }
}
