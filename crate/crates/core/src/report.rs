//! Structured verdicts shared by every certification routine.

use std::fmt;

use serde::Serialize;

use crate::cone::DualVector;
use crate::numerics::{fmt_real, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Established by an exact, finite check.
    Holds,
    /// A witness violates the property beyond tolerance.
    Fails,
    /// No violation found on the tested points; sampling cannot prove a universal claim.
    Inconclusive,
    /// The hypothesis of a theorem pipeline is unmet, so its conclusion is not at stake.
    Vacuous,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        self == Verdict::Fails
    }

    /// `Holds` or `Inconclusive`.
    pub fn passed(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::Inconclusive)
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "pass (sampled, not a proof)",
            Verdict::Vacuous => "vacuous (hypothesis unmet)",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A point, the functional it was tested against, and the signed margin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vector,
    pub functional: Option<DualVector>,
    pub margin: f64,
}

impl Witness {
    pub fn new(point: Vector, functional: Option<DualVector>, margin: f64) -> Self {
        Self { point, functional, margin }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub label: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub samples_used: usize,
    pub tolerance: f64,
    /// Worst margin seen; its sign convention is stated in `label`.
    pub worst_margin: Option<f64>,
    pub notes: Vec<String>,
    pub parts: Vec<Report>,
}

impl Report {
    pub fn new(label: impl Into<String>, verdict: Verdict, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            verdict,
            witnesses: Vec::new(),
            samples_used: 0,
            tolerance,
            worst_margin: None,
            notes: Vec::new(),
            parts: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.witnesses.first()
    }

    /// Finds a part by label prefix, searching depth-first.
    pub fn find_part(&self, prefix: &str) -> Option<&Report> {
        self.parts.iter().find_map(|p| {
            if p.label.starts_with(prefix) {
                Some(p)
            } else {
                p.find_part(prefix)
            }
        })
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        write!(f, "{pad}[{}] {}", self.verdict, self.label)?;
        if let Some(m) = self.worst_margin {
            write!(f, "  worst margin {}", fmt_real(m))?;
        }
        if self.samples_used > 0 {
            write!(f, "  ({} points)", self.samples_used)?;
        }
        writeln!(f)?;
        for w in self.witnesses.iter().take(3) {
            write!(f, "{pad}    witness x = {}", w.point)?;
            if let Some(phi) = &w.functional {
                write!(f, ", functional = {}", phi.coords)?;
            }
            writeln!(f, ", margin = {}", fmt_real(w.margin))?;
        }
        if self.witnesses.len() > 3 {
            writeln!(f, "{pad}    ... {} more witnesses", self.witnesses.len() - 3)?;
        }
        for n in &self.notes {
            writeln!(f, "{pad}    note: {n}")?;
        }
        for p in &self.parts {
            p.write_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}
