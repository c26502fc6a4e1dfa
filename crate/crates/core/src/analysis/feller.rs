use serde::{Deserialize, Serialize};

use super::{semigroup_apply, TestFunction};
use crate::par::{self, Execution};
use crate::process::check_continuity;
use crate::report::{PropertyReport, Verdict, Witness};
use crate::structure::{Domain, DomainKind, Structure};

fn starts_at_minus_infinity(d: &Domain) -> bool {
    d.path().is_some_and(|p| p.domain().lo == f64::NEG_INFINITY)
}

/// Why the pair `lower | upper` breaks continuity of `x -> T_t u(x)`, if it does.
fn pair_violation(lower: &Domain, upper: &Domain) -> Option<String> {
    use DomainKind::*;
    let (a, b) = (lower.kind(), upper.kind());
    let ok = match (a, b) {
        (Plus, Const) | (Const, Minus) => true,
        (Const, Plus) => starts_at_minus_infinity(upper),
        (Minus, Const) => starts_at_minus_infinity(lower),
        _ => false,
    };
    if ok {
        return None;
    }
    Some(match (a, b) {
        (Const, Plus) => format!("{}|{} with upper parameter interval starting at {}", a.glyph(), b.glyph(), param_lo(upper)),
        (Minus, Const) => format!("{}|{} with lower parameter interval starting at {}", a.glyph(), b.glyph(), param_lo(lower)),
        _ => format!("{}|{} is not a continuity building block", a.glyph(), b.glyph()),
    })
}

fn param_lo(d: &Domain) -> f64 {
    d.path().map_or(f64::NAN, |p| p.domain().lo)
}

/// Structural C_b-Feller predicate on the list of adjacent domain pairs.
pub fn is_cb_feller(s: &Structure) -> PropertyReport {
    if s.is_pure() {
        return PropertyReport::holds("cb_feller", 0.0).with_note("pure type");
    }
    for (i, w) in s.domains().windows(2).enumerate() {
        if let Some(msg) = pair_violation(&w[0], &w[1]) {
            let witness = Witness { inputs: vec![i as f64, (i + 1) as f64], observed: 1.0, expected: 0.0 };
            return PropertyReport::fails("cb_feller", 1.0, witness).with_note(format!("domains {i},{}: {msg}", i + 1));
        }
    }
    PropertyReport::holds("cb_feller", 0.0)
}

/// Structural Feller predicate: C_b-Feller plus decay at both ends.
pub fn is_feller(s: &Structure) -> PropertyReport {
    let cb = is_cb_feller(s);
    if cb.verdict != Verdict::Holds {
        let mut r = cb;
        r.property_id = "feller".into();
        return r;
    }
    let n = s.len();
    let ends = [(0, DomainKind::Plus, "lowest"), (n - 1, DomainKind::Minus, "highest")];
    for (i, kind, which) in ends {
        let d = s.domain(i);
        if d.kind() == kind && !starts_at_minus_infinity(d) {
            let witness = Witness { inputs: vec![i as f64], observed: param_lo(d), expected: f64::NEG_INFINITY };
            return PropertyReport::fails("feller", 1.0, witness).with_note(format!(
                "{which} domain is {} with parameter interval starting at {}",
                kind.glyph(),
                param_lo(d)
            ));
        }
    }
    PropertyReport::holds("feller", 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FellerCheckConfig {
    pub ts: Vec<f64>,
    /// Continuity is checked on `[-radius, radius]`; decay at `±radius·{2,4,8}`.
    pub radius: f64,
    pub level: u32,
    pub tol: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for FellerCheckConfig {
    fn default() -> Self {
        FellerCheckConfig { ts: vec![0.25, 0.5, 1.0], radius: 8.0, level: 10, tol: 1e-6, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericFellerOutcome {
    pub aggregate: PropertyReport,
    pub continuity: PropertyReport,
    pub decay: PropertyReport,
    pub pointwise: PropertyReport,
}

const POINTWISE_EXPONENTS: [i32; 4] = [10, 20, 30, 40];
const POINTWISE_POINTS: usize = 65;

/// Numerical cross-check of the Feller property over the test-function
/// catalog: continuity of `x -> T_t u(x)`, decay far out, and `T_t u -> u`
/// pointwise as `t -> 0`.
pub fn numeric_feller_check(s: &Structure, cfg: &FellerCheckConfig) -> NumericFellerOutcome {
    let catalog = TestFunction::catalog();
    let r = cfg.radius;
    let tu = |u: &TestFunction, t: f64, x: f64| semigroup_apply(s, u, t, x).unwrap_or(f64::NAN);

    let mut cont_verdict = Verdict::Holds;
    let mut cont_residual = 0.0f64;
    let mut cont_witnesses = Vec::new();
    let mut cont_notes = Vec::new();
    for u in &catalog {
        for &t in &cfg.ts {
            let f = |x: f64| tu(u, t, x);
            let rep = check_continuity(&f, -r, r, cfg.level, cfg.tol, cfg.exec);
            cont_residual = cont_residual.max(rep.residual);
            if rep.verdict != Verdict::Holds && cont_notes.len() < 4 {
                cont_notes.push(format!("{} at t={t}: {}", u.name(), rep.verdict));
            }
            cont_verdict = cont_verdict.and(rep.verdict);
            cont_witnesses.extend(rep.witnesses.into_iter().map(|mut w| {
                w.inputs.push(t);
                w
            }));
        }
    }
    let mut continuity = PropertyReport::new("continuity", cont_verdict, cont_residual).with_witnesses(cont_witnesses);
    continuity.notes = cont_notes;

    let far = [8.0 * r, -8.0 * r];
    let mut decay_witnesses = Vec::new();
    let mut decay_residual = 0.0f64;
    for u in &catalog {
        for &t in &cfg.ts {
            for &x in &far {
                let v = tu(u, t, x).abs();
                let v = if v.is_nan() { f64::INFINITY } else { v };
                decay_residual = decay_residual.max(v);
                if v > cfg.tol {
                    decay_witnesses.push(Witness { inputs: vec![x, t], observed: v, expected: 0.0 });
                }
            }
        }
    }
    let mut decay = PropertyReport::new("decay", Verdict::from_bool(decay_witnesses.is_empty()), decay_residual)
        .with_witnesses(decay_witnesses);
    for mult in [2.0, 4.0] {
        let m = catalog
            .iter()
            .flat_map(|u| cfg.ts.iter().flat_map(move |&t| [mult * r, -mult * r].map(|x| (u, t, x))))
            .map(|(u, t, x)| tu(u, t, x).abs())
            .fold(0.0f64, f64::max);
        decay.notes.push(format!("max |T_t u| at ±{}: {m:e}", mult * r));
    }

    let xs: Vec<f64> =
        (0..POINTWISE_POINTS).map(|i| -r + 2.0 * r * i as f64 / (POINTWISE_POINTS - 1) as f64).collect();
    let rows = par::map(cfg.exec, &xs, |&x| {
        catalog
            .iter()
            .map(|u| {
                let u0 = u.value(x);
                let seq: Vec<f64> =
                    POINTWISE_EXPONENTS.iter().map(|&k| (tu(u, 2f64.powi(-k), x) - u0).abs()).collect();
                (x, seq)
            })
            .collect::<Vec<_>>()
    });
    let mut pw_witnesses = Vec::new();
    let mut pw_residual = 0.0f64;
    for (x, seq) in rows.into_iter().flatten() {
        let last = *seq.last().expect("nonempty exponent list");
        let last = if last.is_nan() { f64::INFINITY } else { last };
        pw_residual = pw_residual.max(last);
        if last > cfg.tol {
            pw_witnesses.push(Witness { inputs: vec![x], observed: last, expected: 0.0 });
        }
    }
    let pointwise = PropertyReport::new("pointwise", Verdict::from_bool(pw_witnesses.is_empty()), pw_residual)
        .with_witnesses(pw_witnesses);

    let verdict = continuity.verdict.and(decay.verdict).and(pointwise.verdict);
    let residual = continuity.residual.max(decay.residual).max(pointwise.residual);
    let mut aggregate = PropertyReport::new("numeric_feller", verdict, residual);
    for sub in [&continuity, &decay, &pointwise] {
        aggregate.notes.push(format!("{}: {}", sub.property_id, sub.verdict));
    }
    NumericFellerOutcome { aggregate, continuity, decay, pointwise }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{GeneratingPath, Interval, PathRule};
    use crate::structure::validate_structure;

    fn linear_on(slope: f64, i: Interval) -> GeneratingPath {
        GeneratingPath::onto(PathRule::Linear { slope, intercept: 0.0 }, i).unwrap()
    }

    fn space_drift() -> Structure {
        let pos = Interval::open(0.0, f64::INFINITY).unwrap();
        validate_structure(vec![
            Domain::from_path(linear_on(-1.0, pos)),
            Domain::constant(Interval::point(0.0).unwrap()),
            Domain::from_path(linear_on(1.0, pos)),
        ])
        .unwrap()
    }

    #[test]
    fn pure_structures_are_feller() {
        let s = validate_structure(vec![Domain::from_path(linear_on(2.0, Interval::real_line()))]).unwrap();
        assert_eq!(is_cb_feller(&s).verdict, Verdict::Holds);
        assert_eq!(is_feller(&s).verdict, Verdict::Holds);
        let c = validate_structure(vec![Domain::constant(Interval::real_line())]).unwrap();
        let out = numeric_feller_check(&c, &FellerCheckConfig::default());
        assert_eq!(out.aggregate.verdict, Verdict::Holds);
        assert_eq!(out.pointwise.residual, 0.0);
    }

    #[test]
    fn space_drift_is_not_feller() {
        let s = space_drift();
        let r = is_cb_feller(&s);
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witnesses[0].inputs, vec![0.0, 1.0]);
        assert_eq!(is_feller(&s).verdict, Verdict::Fails);
        let out = numeric_feller_check(&s, &FellerCheckConfig::default());
        assert_eq!(out.continuity.verdict, Verdict::Fails);
        assert!(out.continuity.witnesses.iter().any(|w| w.inputs[0].abs() < 1e-3));
        assert_eq!(out.aggregate.verdict, Verdict::Fails);
    }

    #[test]
    fn absorbing_block_is_allowed_unconditionally() {
        let i = Interval::closed_open(0.0, 1.0).unwrap();
        let plus = Domain::from_path(GeneratingPath::onto(PathRule::Linear { slope: 1.0, intercept: -1.0 }, i).unwrap());
        let cst = Domain::constant(Interval::new(0.0, f64::INFINITY, true, false).unwrap());
        assert_eq!(pair_violation(&plus, &cst), None);
        assert!(pair_violation(&cst, &plus).is_some());
        let below = Domain::constant(Interval::open(f64::NEG_INFINITY, -1.0).unwrap());
        let s = validate_structure(vec![below, plus, cst]).unwrap();
        let r = is_cb_feller(&s);
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witnesses[0].inputs, vec![0.0, 1.0]);
    }

    #[test]
    fn lowest_plus_needs_infinite_start() {
        let half = Interval::open(0.0, f64::INFINITY).unwrap();
        let blowup = crate::paths::CallablePath::new("s-1/s", crate::paths::Direction::Increasing, |s| s - 1.0 / s);
        let s = validate_structure(vec![Domain::from_path(
            GeneratingPath::onto(PathRule::Callable(blowup), half).unwrap(),
        )])
        .unwrap();
        assert_eq!(is_cb_feller(&s).verdict, Verdict::Holds);
        let r = is_feller(&s);
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witnesses[0].observed, 0.0);
        let out = numeric_feller_check(&s, &FellerCheckConfig::default());
        assert_eq!(out.decay.verdict, Verdict::Fails);
        assert_eq!(out.aggregate.verdict, Verdict::Fails);
    }
}
