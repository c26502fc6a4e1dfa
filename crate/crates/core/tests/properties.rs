use proptest::prelude::*;

use dethunt::analysis::{is_cb_feller, is_feller, is_rich, RichConfig};
use dethunt::paths::{cantor_h, cantor_phi, BuiltinPath, Direction, GeneratingPath, Interval, PathRule};
use dethunt::process::{evaluate, sample_path};
use dethunt::specdsl::{emit_spec, load_structure, parse_spec, parse_spec_bytes};
use dethunt::structure::{canonicalize, validate_canonical, validate_structure, Domain, DomainKind, Structure};
use dethunt::{Execution, Verdict};

/// Piecewise linear families with a known closed-form flow.
#[derive(Debug, Clone, Copy)]
enum Family {
    /// `x + a t` on the whole line.
    Drift { a: f64 },
    /// Leaves `[b, c]` at speeds `k1` downwards and `k2` upwards.
    Repel { b: f64, c: f64, k1: f64, k2: f64, closed_const: bool },
    /// Absorbed into `[b, c]` from both sides.
    Absorb { b: f64, c: f64, k1: f64, k2: f64 },
    /// Decreasing up to `b`, increasing above, no constant domain.
    Split { b: f64, k1: f64, k2: f64 },
}

impl Family {
    fn oracle(self, x: f64, t: f64) -> f64 {
        match self {
            Family::Drift { a } => x + a * t,
            Family::Repel { b, c, k1, k2, .. } => {
                if x < b {
                    x - k1 * t
                } else if x > c {
                    x + k2 * t
                } else {
                    x
                }
            }
            Family::Absorb { b, c, k1, k2, .. } => {
                if x < b {
                    (x + k1 * t).min(b)
                } else if x > c {
                    (x - k2 * t).max(c)
                } else {
                    x
                }
            }
            Family::Split { b, k1, k2 } => {
                if x <= b {
                    x - k1 * t
                } else {
                    x + k2 * t
                }
            }
        }
    }

    fn build(self) -> Structure {
        let lin = |slope: f64, intercept: f64, i: Interval| {
            GeneratingPath::onto(PathRule::Linear { slope, intercept }, i).unwrap()
        };
        let pos = |closed: bool| Interval::new(0.0, f64::INFINITY, closed, false).unwrap();
        let neg = |closed: bool| Interval::new(f64::NEG_INFINITY, 0.0, false, closed).unwrap();
        let domains = match self {
            Family::Drift { a } => vec![Domain::from_path(lin(a, 0.0, Interval::real_line()))],
            Family::Repel { b, c, k1, k2, closed_const } => vec![
                Domain::from_path(lin(-k1, b, pos(!closed_const))),
                Domain::constant(Interval::new(b, c, closed_const, closed_const).unwrap()),
                Domain::from_path(lin(k2, c, pos(!closed_const))),
            ],
            Family::Absorb { b, c, k1, k2 } => vec![
                Domain::from_path(lin(k1, b, neg(false))),
                Domain::constant(Interval::closed(b, c).unwrap()),
                Domain::from_path(lin(-k2, c, neg(false))),
            ],
            Family::Split { b, k1, k2 } => {
                vec![Domain::from_path(lin(-k1, b, pos(true))), Domain::from_path(lin(k2, b, pos(false)))]
            }
        };
        validate_structure(domains).unwrap()
    }
}

fn speed() -> impl Strategy<Value = f64> {
    (1u32..=32).prop_map(|k| k as f64 / 8.0)
}

fn point() -> impl Strategy<Value = f64> {
    (-64i32..=64).prop_map(|k| k as f64 / 16.0)
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (-32i32..=32).prop_filter("nonzero", |k| *k != 0).prop_map(|k| Family::Drift { a: k as f64 / 8.0 }),
        (point(), 0u32..=32, speed(), speed(), any::<bool>()).prop_map(|(b, w, k1, k2, closed)| {
            let c = b + w as f64 / 16.0;
            Family::Repel { b, c, k1, k2, closed_const: closed || w == 0 }
        }),
        (point(), 0u32..=32, speed(), speed()).prop_map(|(b, w, k1, k2)| {
            Family::Absorb { b, c: b + w as f64 / 16.0, k1, k2 }
        }),
        (point(), speed(), speed()).prop_map(|(b, k1, k2)| Family::Split { b, k1, k2 }),
    ]
}

/// Cantor depths start where the staircase steps fall below the inversion tolerance.
fn single_rule() -> impl Strategy<Value = GeneratingPath> {
    prop_oneof![
        ((-16i32..=16).prop_filter("nonzero", |k| *k != 0), -8.0..8.0f64).prop_map(|(k, c)| {
            GeneratingPath::onto(PathRule::Linear { slope: k as f64 / 4.0, intercept: c }, Interval::real_line()).unwrap()
        }),
        Just(GeneratingPath::onto(PathRule::Builtin(BuiltinPath::Cubic), Interval::real_line()).unwrap()),
        Just(GeneratingPath::onto(PathRule::knick(), Interval::real_line()).unwrap()),
        (34u32..=64).prop_map(|d| GeneratingPath::onto(PathRule::Cantor { depth: d }, Interval::real_line()).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn inverse_roundtrip(p in single_rule(), x in -50.0..50.0f64) {
        let tol = 1e-9;
        let s = p.invert(x, tol).unwrap();
        prop_assert!((p.eval(s).unwrap() - x).abs() <= tol);
    }

    #[test]
    fn paths_are_strictly_monotone(p in single_rule(), start in -20.0..20.0f64, gaps in prop::collection::vec(1e-3..2.0f64, 1..20)) {
        let mut s = start;
        let mut prev = p.eval(s).unwrap();
        for g in gaps {
            s += g;
            let v = p.eval(s).unwrap();
            match p.direction() {
                Direction::Increasing => prop_assert!(v > prev, "{} !> {}", v, prev),
                Direction::Decreasing => prop_assert!(v < prev),
            }
            prev = v;
        }
    }

    #[test]
    fn cantor_h_is_symmetric(k in 0u32..=(1 << 20), depth in 8u32..=64) {
        let y = k as f64 / (1u32 << 20) as f64;
        let sum = cantor_h(y, depth).unwrap() + cantor_h(1.0 - y, depth).unwrap();
        prop_assert!((sum - 1.0).abs() <= 2f64.powi(1 - depth as i32).max(4.0 * f64::EPSILON), "y={} sum={}", y, sum);
    }

    #[test]
    fn cantor_depth_converges(x in -4.0..4.0f64, depth in 4u32..=56) {
        let a = cantor_phi(x, depth).unwrap();
        let b = cantor_phi(x, depth + 4).unwrap();
        prop_assert!((a - b).abs() <= 2f64.powi(-(depth as i32)));
    }

    #[test]
    fn evaluation_matches_the_closed_form(f in family(), x in -6.0..6.0f64, t in 0.0..4.0f64) {
        let s = f.build();
        let got = evaluate(&s, x, t).unwrap();
        let want = f.oracle(x, t);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{:?} x={} t={} got {} want {}", f, x, t, got, want);
    }

    #[test]
    fn flow_law(f in family(), x in -6.0..6.0f64, t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
        let s = f.build();
        let a = evaluate(&s, evaluate(&s, x, t1).unwrap(), t2).unwrap();
        let b = evaluate(&s, x, t1 + t2).unwrap();
        prop_assert!((a - b).abs() <= 2e-8, "{} vs {}", a, b);
    }

    #[test]
    fn locate_is_consistent(f in family(), x in -8.0..8.0f64) {
        let s = f.build();
        let loc = s.locate(x);
        for (i, d) in s.domains().iter().enumerate() {
            prop_assert_eq!(d.interval().contains(x), i == loc.index);
        }
    }

    #[test]
    fn boundaries_are_owned_by_exactly_one_side(f in family()) {
        let s = f.build();
        for w in s.domains().windows(2) {
            prop_assert_eq!(w[0].interval().hi, w[1].interval().lo);
            prop_assert!(w[0].interval().hi_closed != w[1].interval().lo_closed);
        }
    }

    #[test]
    fn canonicalize_is_idempotent(f in family()) {
        let s = f.build();
        let c = canonicalize(&s);
        prop_assert_eq!(&canonicalize(&c), &c);
        let again = validate_canonical(c.domains().to_vec());
        prop_assert!(again.is_ok(), "{:?}", again.err());
        prop_assert_eq!(c.type_string(), s.type_string());
    }

    #[test]
    fn dsl_roundtrip(f in family(), x in -6.0..6.0f64, t in 0.0..4.0f64) {
        let s = f.build();
        let text = emit_spec(&s).unwrap();
        let back = load_structure(&text, None).unwrap();
        let a = evaluate(&s, x, t).unwrap();
        let b = evaluate(&back, x, t).unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{}", text);
        prop_assert_eq!(emit_spec(&back).unwrap(), text);
    }

    #[test]
    fn parser_is_total(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = parse_spec_bytes(&bytes);
    }

    #[test]
    fn parser_is_total_on_near_misses(parts in prop::collection::vec(prop::sample::select(vec![
        "huntspec v1\n", "plus", "minus", "const", " ", "\n", "(", ")", "[", "]", ",", "-inf", "inf", "0", "1.5",
        "-2", "nan", "1e400", "path=", "I=", "anchor=", "linear(", "cantor(", "polyline(", "table(", "0:0",
        "affine_cantor(", "knick", "cubic", "#", ":", "\u{2295}",
    ]), 0..40)) {
        let text: String = parts.concat();
        if let Ok(doc) = parse_spec(&text) {
            let _ = doc.build(None);
        }
    }

    #[test]
    fn fixing_the_first_error_never_moves_it_earlier(f in family(), breaks in prop::collection::vec((0usize..8, 0usize..4), 1..4)) {
        let good = emit_spec(&f.build()).unwrap();
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        let garbage = ["plus (1,0)", "const [a,b]", "minus (-inf,0) path=spline", "const (0,1) I=(0,1)"];
        for (line, g) in breaks {
            let i = 1 + line % (lines.len() - 1);
            lines[i] = garbage[g].to_string();
        }
        let original: Vec<&str> = good.lines().collect();
        let first = |ls: &[String]| parse_spec(&(ls.join("\n") + "\n")).err().map(|d| d.iter().map(|d| d.line).min().unwrap());
        if let Some(line) = first(&lines) {
            let mut fixed = lines.clone();
            fixed[line - 1] = original[line - 1].to_string();
            if let Some(next) = first(&fixed) {
                prop_assert!(next >= line, "{} then {}", line, next);
            }
        }
    }

    #[test]
    fn refinement_keeps_values(f in family(), x in -6.0..6.0f64, level in 0u32..8) {
        let s = f.build();
        let ps = sample_path(&s, x, 3.0, level, Execution::Sequential).unwrap();
        let fine = ps.refine(&s, Execution::Parallel).unwrap();
        prop_assert_eq!(fine.len(), 2 * ps.len() - 1);
        for (k, v) in ps.values.iter().enumerate() {
            prop_assert_eq!(fine.values[2 * k].to_bits(), v.to_bits());
        }
    }

    #[test]
    fn absorption_is_permanent(f in family(), x in -6.0..6.0f64) {
        let s = f.build();
        let ps = sample_path(&s, x, 4.0, 8, Execution::Sequential).unwrap();
        let v = &ps.values;
        if let Some(k) = (1..v.len()).find(|&k| v[k] == v[k - 1] && s.domain(s.locate(v[k]).index).kind() == DomainKind::Const) {
            prop_assert!(v[k..].iter().all(|&w| w == v[k]));
        }
    }

    #[test]
    fn verdicts_survive_canonicalize(f in family()) {
        let s = f.build();
        let c = canonicalize(&s);
        prop_assert_eq!(is_feller(&s).verdict, is_feller(&c).verdict);
        prop_assert_eq!(is_cb_feller(&s).verdict, is_cb_feller(&c).verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn richness_survives_canonicalize(f in family()) {
        let cfg = RichConfig { level: 6, ..RichConfig::default() };
        let s = f.build();
        let a = is_rich(&s, &cfg).verdict;
        prop_assert_eq!(a, is_rich(&canonicalize(&s), &cfg).verdict);
        if let Family::Drift { .. } = f {
            prop_assert_eq!(a, Verdict::Holds);
        }
    }
}
