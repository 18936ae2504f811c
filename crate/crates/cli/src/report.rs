//! Deterministic reports in text and JSON form.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Zero,
    Nonzero,
}

/// A named polynomial in canonical text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub label: String,
    pub value: String,
}

impl Entry {
    pub fn new(label: impl Into<String>, value: impl ToString) -> Entry {
        Entry { label: label.into(), value: value.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub op: String,
    pub inputs: Vec<Entry>,
    pub results: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Wall time, only when requested since it breaks reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
}

impl TaskReport {
    pub fn new(index: usize, op: &str) -> TaskReport {
        TaskReport {
            index,
            op: op.to_string(),
            inputs: Vec::new(),
            results: Vec::new(),
            verdict: None,
            order: None,
            caps: None,
            iterations: None,
            notes: Vec::new(),
            millis: None,
        }
    }

    /// Whether an assertion attached to the task failed.
    pub fn failed(&self) -> bool {
        self.verdict == Some(Verdict::Nonzero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tasks: Vec<TaskReport>,
    pub passed: bool,
}

impl Report {
    pub fn new(tasks: Vec<TaskReport>) -> Report {
        let passed = tasks.iter().all(|t| !t.failed());
        Report { tasks, passed }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tasks {
            let _ = write!(out, "[{}] {}", t.index, t.op);
            if let Some(n) = t.order {
                let _ = write!(out, " order={n}");
            }
            if let Some(c) = &t.caps {
                let _ = write!(out, " caps={c}");
            }
            if let Some(n) = t.iterations {
                let _ = write!(out, " iterations={n}");
            }
            if let Some(ms) = t.millis {
                let _ = write!(out, " time={ms:.3}ms");
            }
            out.push('\n');
            for i in &t.inputs {
                let _ = writeln!(out, "    {}: {}", i.label, i.value);
            }
            for e in &t.results {
                let _ = writeln!(out, "    {} = {}", e.label, e.value);
            }
            for n in &t.notes {
                let _ = writeln!(out, "    note: {n}");
            }
            if let Some(v) = t.verdict {
                let _ = writeln!(out, "    verdict: {}", if v == Verdict::Zero { "zero" } else { "nonzero" });
            }
        }
        let _ = writeln!(out, "{} tasks, {}", self.tasks.len(), if self.passed { "all passed" } else { "FAILED" });
        out
    }
}

/// Outcome of one randomized property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Property {
    pub suite: String,
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Property {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub properties: Vec<Property>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn new(suite: &str, seed: u64, properties: Vec<Property>) -> VerifyReport {
        let passed = properties.iter().all(Property::passed);
        VerifyReport { suite: suite.to_string(), seed, properties, passed }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verify {} (seed {})", self.suite, self.seed);
        for p in &self.properties {
            let status = if p.passed() { "ok  " } else { "FAIL" };
            let _ = writeln!(
                out,
                "{status} {:<10} {}  {}/{}",
                p.suite,
                p.name,
                p.instances - p.failures,
                p.instances
            );
            for n in &p.notes {
                let _ = writeln!(out, "     {n}");
            }
            if let Some(c) = &p.counterexample {
                let _ = writeln!(out, "     counterexample: {c}");
            }
        }
        let failed = self.properties.iter().filter(|p| !p.passed()).count();
        let _ = writeln!(out, "{} properties, {failed} failed", self.properties.len());
        out
    }
}
