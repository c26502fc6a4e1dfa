use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(holds: bool) -> Self {
        if holds {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    /// Conjunction: any failure fails, otherwise any inconclusive part
    /// makes the whole inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Holds,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// A concrete input where a check was evaluated, with what was seen and
/// what the property demands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub inputs: Vec<f64>,
    pub observed: f64,
    pub expected: f64,
}

/// Outcome of a classification or numerical verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property_id: String,
    pub verdict: Verdict,
    pub residual: f64,
    pub witnesses: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Witness lists are capped so reports stay small on large grids.
pub const MAX_WITNESSES: usize = 16;

impl PropertyReport {
    pub fn new(property_id: impl Into<String>, verdict: Verdict, residual: f64) -> Self {
        PropertyReport { property_id: property_id.into(), verdict, residual, witnesses: Vec::new(), notes: Vec::new() }
    }

    pub fn holds(property_id: impl Into<String>, residual: f64) -> Self {
        Self::new(property_id, Verdict::Holds, residual)
    }

    /// A failing report with one witness.
    pub fn fails(property_id: impl Into<String>, residual: f64, witness: Witness) -> Self {
        let mut r = Self::new(property_id, Verdict::Fails, residual);
        r.witnesses.push(witness);
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Sorts witnesses by their inputs and keeps at most [`MAX_WITNESSES`].
    pub fn with_witnesses(mut self, mut witnesses: Vec<Witness>) -> Self {
        witnesses.sort_by(|a, b| {
            a.inputs
                .iter()
                .zip(&b.inputs)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(a.inputs.len().cmp(&b.inputs.len()))
        });
        witnesses.truncate(MAX_WITNESSES);
        self.witnesses = witnesses;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 || (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
