//! Decompositions of the real line into ordered domains, each either
//! constant or driven by a generating path.

mod infer;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::{Direction, GeneratingPath, Interval, PathError};

pub use infer::{infer_structure, InferError, InferenceOutcome, SampledFamily};

/// Upper bound on the number of domains in one structure.
pub const MAX_DOMAINS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// paths start increasing
    Plus,
    /// paths start decreasing
    Minus,
    /// paths are constant
    Const,
}

impl DomainKind {
    pub fn glyph(self) -> char {
        match self {
            DomainKind::Plus => '⊕',
            DomainKind::Minus => '⊖',
            DomainKind::Const => '⊙',
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            DomainKind::Plus => "plus",
            DomainKind::Minus => "minus",
            DomainKind::Const => "const",
        }
    }

    pub fn is_monotone(self) -> bool {
        self != DomainKind::Const
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("path range {range} differs from the domain interval {interval}")]
    RangeMismatch { interval: Interval, range: Interval },
    #[error("anchor {anchor} is not in {interval}")]
    AnchorOutside { anchor: f64, interval: Interval },
    #[error("anchor {anchor} does not satisfy path(0) = anchor (path(0) = {found:?})")]
    AnchorInconsistent { anchor: f64, found: Option<f64> },
    #[error("a constant domain carries no generating path")]
    ConstWithPath,
    #[error(transparent)]
    Path(#[from] PathError),
}

/// One interval `J` of the decomposition together with its type.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    interval: Interval,
    kind: DomainKind,
    path: Option<GeneratingPath>,
    anchor: Option<f64>,
}

impl Domain {
    pub fn constant(interval: Interval) -> Self {
        Domain { interval, kind: DomainKind::Const, path: None, anchor: None }
    }

    /// A monotone domain; the type follows the path's direction and the
    /// path's range must equal `interval`.
    pub fn monotone(interval: Interval, path: GeneratingPath) -> Result<Self, StructureError> {
        if *path.range() != interval {
            return Err(StructureError::RangeMismatch { interval, range: *path.range() });
        }
        let kind = match path.direction() {
            Direction::Increasing => DomainKind::Plus,
            Direction::Decreasing => DomainKind::Minus,
        };
        let anchor = if path.domain().contains(0.0) { Some(path.eval_unchecked(0.0)) } else { None };
        Ok(Domain { interval, kind, path: Some(path), anchor })
    }

    /// A monotone domain for `path`, using the path's own range as `J`.
    pub fn from_path(path: GeneratingPath) -> Self {
        let interval = *path.range();
        Self::monotone(interval, path).expect("range equals interval by construction")
    }

    /// Records the anchor `x_j`; it must lie in `J` and satisfy `path(0) = x_j`.
    pub fn with_anchor(mut self, anchor: f64) -> Result<Self, StructureError> {
        if !self.interval.contains(anchor) {
            return Err(StructureError::AnchorOutside { anchor, interval: self.interval });
        }
        let path = self.path.as_ref().ok_or(StructureError::ConstWithPath)?;
        let found = path.domain().contains(0.0).then(|| path.eval_unchecked(0.0));
        match found {
            Some(v) if (v - anchor).abs() <= 1e-9 * (1.0 + anchor.abs()) => {
                self.anchor = Some(anchor);
                Ok(self)
            }
            _ => Err(StructureError::AnchorInconsistent { anchor, found }),
        }
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn path(&self) -> Option<&GeneratingPath> {
        self.path.as_ref()
    }

    pub fn anchor(&self) -> Option<f64> {
        self.anchor
    }

    /// Right endpoint of the path domain `I` (meaningless for constant domains).
    fn path_domain_hi(&self) -> f64 {
        self.path.as_ref().map_or(f64::INFINITY, |p| p.domain().hi)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{} J={} I={}", self.kind.glyph(), self.interval, p.domain()),
            None => write!(f, "{} J={}", self.kind.glyph(), self.interval),
        }
    }
}

/// Identifier of a structural rule checked by [`validate_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// intervals partition the real line
    R1,
    /// no increasing domain directly below a decreasing one
    R2,
    /// no two adjacent constant domains (canonical form only)
    R3,
    /// no closed boundary point owned by a monotone domain that moves away from it
    R4,
    /// stacked domains of the same direction need an unbounded parameter range
    R5,
    /// no killing at the outermost domains
    R6,
    /// admissible shapes of the parameter interval
    R7,
    /// each path maps its parameter interval onto its domain
    R8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationFault {
    pub rule_id: RuleId,
    #[serde(rename = "domains")]
    pub domain_indices: Vec<usize>,
    pub message: String,
}

impl fmt::Display for ValidationFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (domains {:?}): {}", self.rule_id, self.domain_indices, self.message)
    }
}

/// A validated decomposition of the real line, bottom domain first.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    domains: Vec<Domain>,
    canonical: bool,
}

/// Result of [`Structure::locate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub index: usize,
    pub at_lower_boundary: bool,
    pub at_upper_boundary: bool,
}

impl Structure {
    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain(&self, index: usize) -> &Domain {
        &self.domains[index]
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Whether the structure consists of a single domain.
    pub fn is_pure(&self) -> bool {
        self.domains.len() == 1
    }

    /// The type sequence, e.g. `⊖]⊙[⊕`, with `]` / `[` marking which side
    /// owns each boundary point.
    pub fn type_string(&self) -> String {
        let mut out = String::new();
        for (i, d) in self.domains.iter().enumerate() {
            if i > 0 {
                out.push(if self.domains[i - 1].interval.hi_closed { ']' } else { '[' });
            }
            out.push(d.kind.glyph());
        }
        out
    }

    /// Index of the domain containing 0.
    pub fn origin_index(&self) -> usize {
        self.locate(0.0).index
    }

    /// Boundaries where a decreasing domain sits directly below an
    /// increasing one with no constant domain in between.
    pub fn diverging_boundaries(&self) -> Vec<usize> {
        self.domains
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].kind == DomainKind::Minus && w[1].kind == DomainKind::Plus)
            .map(|(i, _)| i)
            .collect()
    }

    /// The domain `J_j` containing `x`, with flags for finite endpoints.
    pub fn locate(&self, x: f64) -> Location {
        let idx = self
            .domains
            .partition_point(|d| d.interval.hi < x || (d.interval.hi == x && !d.interval.hi_closed));
        let index = idx.min(self.domains.len() - 1);
        let j = &self.domains[index].interval;
        Location {
            index,
            at_lower_boundary: j.lo.is_finite() && x == j.lo,
            at_upper_boundary: j.hi.is_finite() && x == j.hi,
        }
    }
}

/// Checks the structural rules R1, R2 and R4-R8 on a bottom-up domain list.
/// All faults are reported.
pub fn validate_structure(domains: Vec<Domain>) -> Result<Structure, Vec<ValidationFault>> {
    validate(domains, false)
}

/// As [`validate_structure`], additionally enforcing R3 (no adjacent
/// constant domains).
pub fn validate_canonical(domains: Vec<Domain>) -> Result<Structure, Vec<ValidationFault>> {
    validate(domains, true)
}

fn fault(rule_id: RuleId, domain_indices: Vec<usize>, message: impl Into<String>) -> ValidationFault {
    ValidationFault { rule_id, domain_indices, message: message.into() }
}

fn validate(domains: Vec<Domain>, canonical: bool) -> Result<Structure, Vec<ValidationFault>> {
    let mut faults = Vec::new();
    if domains.is_empty() {
        return Err(vec![fault(RuleId::R1, vec![], "no domains: the real line is not covered")]);
    }
    if domains.len() > MAX_DOMAINS {
        return Err(vec![fault(
            RuleId::R1,
            vec![],
            format!("{} domains exceed the supported maximum of {MAX_DOMAINS}", domains.len()),
        )]);
    }
    let last = domains.len() - 1;

    // R1
    if domains[0].interval.lo != f64::NEG_INFINITY {
        faults.push(fault(RuleId::R1, vec![0], format!("lowest interval starts at {}", domains[0].interval.lo)));
    }
    if domains[last].interval.hi != f64::INFINITY {
        faults.push(fault(RuleId::R1, vec![last], format!("highest interval ends at {}", domains[last].interval.hi)));
    }
    for (i, w) in domains.windows(2).enumerate() {
        let (a, b) = (&w[0].interval, &w[1].interval);
        if a.hi != b.lo {
            let what = if a.hi < b.lo { "gap" } else { "overlap" };
            faults.push(fault(RuleId::R1, vec![i, i + 1], format!("{what} between {a} and {b}")));
        } else if a.hi_closed == b.lo_closed {
            faults.push(fault(
                RuleId::R1,
                vec![i, i + 1],
                format!("boundary {} must belong to exactly one of {a} and {b}", a.hi),
            ));
        }
    }

    for (i, w) in domains.windows(2).enumerate() {
        let (lower, upper) = (&w[0], &w[1]);
        match (lower.kind, upper.kind) {
            (DomainKind::Plus, DomainKind::Minus) => faults.push(fault(
                RuleId::R2,
                vec![i, i + 1],
                "increasing domain directly below a decreasing one; a constant domain must separate them",
            )),
            (DomainKind::Const, DomainKind::Const) if canonical => {
                faults.push(fault(RuleId::R3, vec![i, i + 1], "adjacent constant domains must be merged"))
            }
            (DomainKind::Plus, DomainKind::Plus) if lower.path_domain_hi() != f64::INFINITY => faults.push(fault(
                RuleId::R5,
                vec![i, i + 1],
                format!(
                    "increasing domain below another increasing domain needs an unbounded parameter interval, found right endpoint {}",
                    lower.path_domain_hi()
                ),
            )),
            (DomainKind::Minus, DomainKind::Minus) if upper.path_domain_hi() != f64::INFINITY => faults.push(fault(
                RuleId::R5,
                vec![i, i + 1],
                format!(
                    "decreasing domain above another decreasing domain needs an unbounded parameter interval, found right endpoint {}",
                    upper.path_domain_hi()
                ),
            )),
            _ => {}
        }
    }

    for (i, d) in domains.iter().enumerate() {
        let j = &d.interval;
        match d.kind {
            DomainKind::Plus if i < last && j.hi_closed => faults.push(fault(
                RuleId::R4,
                vec![i, i + 1],
                format!("increasing domain {j} owns its upper boundary although a domain lies above"),
            )),
            DomainKind::Minus if i > 0 && j.lo_closed => faults.push(fault(
                RuleId::R4,
                vec![i - 1, i],
                format!("decreasing domain {j} owns its lower boundary although a domain lies below"),
            )),
            _ => {}
        }
        if d.kind == DomainKind::Plus && i == last && d.path_domain_hi() != f64::INFINITY {
            faults.push(fault(RuleId::R6, vec![i], "highest increasing domain reaches +inf in finite time (killing)"));
        }
        if d.kind == DomainKind::Minus && i == 0 && d.path_domain_hi() != f64::INFINITY {
            faults.push(fault(RuleId::R6, vec![i], "lowest decreasing domain reaches -inf in finite time (killing)"));
        }
        if let Some(p) = &d.path {
            if p.domain().hi_closed {
                faults.push(fault(
                    RuleId::R7,
                    vec![i],
                    format!("parameter interval {} must be open on the right", p.domain()),
                ));
            }
            if *p.range() != *j {
                faults.push(fault(RuleId::R8, vec![i], format!("path range {} differs from the domain {j}", p.range())));
            } else if let Err(msg) = p.surjectivity_defect() {
                faults.push(fault(RuleId::R8, vec![i], msg));
            }
        }
    }

    if faults.is_empty() {
        Ok(Structure { domains, canonical })
    } else {
        faults.sort_by(|a, b| a.rule_id.cmp(&b.rule_id).then(a.domain_indices.cmp(&b.domain_indices)));
        Err(faults)
    }
}

/// Anchor used by the canonical form for a monotone domain on `j`.
pub fn canonical_anchor(j: &Interval) -> f64 {
    match (j.lo.is_finite(), j.hi.is_finite()) {
        (true, true) => j.midpoint(),
        (false, true) => j.hi - 1.0,
        (true, false) => j.lo + 1.0,
        (false, false) => 0.0,
    }
}

/// Unique representation: adjacent constant domains merged, every path
/// re-parameterized so that `path(0)` is the canonical anchor.
pub fn canonicalize(s: &Structure) -> Structure {
    if s.canonical {
        return s.clone();
    }
    let mut merged: Vec<Domain> = Vec::with_capacity(s.domains.len());
    for d in &s.domains {
        if let Some(prev) = merged.last_mut() {
            if prev.kind == DomainKind::Const && d.kind == DomainKind::Const {
                prev.interval.hi = d.interval.hi;
                prev.interval.hi_closed = d.interval.hi_closed;
                continue;
            }
        }
        merged.push(d.clone());
    }
    for d in merged.iter_mut() {
        if let Some(path) = &d.path {
            let anchor = canonical_anchor(&d.interval);
            let already = path.domain().contains(0.0) && {
                let v = path.eval_unchecked(0.0);
                (v - anchor).abs() <= 4.0 * f64::EPSILON * anchor.abs().max(f64::MIN_POSITIVE)
            };
            if !already {
                let anchored = path
                    .anchored_at(anchor)
                    .expect("anchor lies inside the range of a validated path");
                d.path = Some(anchored);
            }
            d.anchor = Some(anchor);
        }
    }
    Structure { domains: merged, canonical: true }
}
