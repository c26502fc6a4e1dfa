//! Reference processes with their known classification, and a regression
//! runner that recomputes every classification.

mod raw;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use raw::RawFamily;

use crate::analysis::{
    ac_defect, is_cb_feller, is_feller, is_rich, ito_drift, FellerCheckConfig, RichConfig,
};
use crate::par::{self, Execution};
use crate::paths::{BuiltinPath, GeneratingPath, Interval, PathRule};
use crate::process::{
    check_path_shape, check_time_homogeneity, flow_law_residual, homogeneity_probes, linspace, sample_path,
    total_variation, GridConfig, ProcessFamily,
};
use crate::report::{PropertyReport, Verdict, Witness};
use crate::structure::{infer_structure, validate_structure, Domain, InferError, SampledFamily, Structure};

pub const HUNT: &str = "hunt";
pub const PATH_SHAPE: &str = "path_shape";
pub const FINITE_VARIATION: &str = "finite_variation";
pub const CB_FELLER: &str = "cb_feller";
pub const FELLER: &str = "feller";
pub const RICH: &str = "rich";
pub const HOMOGENEITY: &str = "homogeneity";
pub const FLOW_LAW: &str = "flow_law";
pub const ITO_DRIFT: &str = "ito_drift";
pub const SINGULAR_INCREMENT: &str = "singular_increment";

#[derive(Debug, Clone)]
pub enum GalleryBuild {
    Structure(Structure),
    Raw(RawFamily),
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub locator: &'static str,
    pub build: GalleryBuild,
    pub expected: BTreeMap<String, Verdict>,
}

impl GalleryEntry {
    pub fn structure(&self) -> Option<&Structure> {
        match &self.build {
            GalleryBuild::Structure(s) => Some(s),
            GalleryBuild::Raw(_) => None,
        }
    }
}

fn expect(pairs: &[(&str, Verdict)]) -> BTreeMap<String, Verdict> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn single(rule: PathRule) -> Structure {
    validate_structure(vec![Domain::from_path(GeneratingPath::onto(rule, Interval::real_line()).expect("onto"))])
        .expect("single path on the real line")
}

fn linear_on(slope: f64, i: Interval) -> GeneratingPath {
    GeneratingPath::onto(PathRule::Linear { slope, intercept: 0.0 }, i).expect("onto")
}

pub fn e1_2() -> Structure {
    single(PathRule::Builtin(BuiltinPath::Cubic))
}

pub fn cantor() -> Structure {
    single(PathRule::Cantor { depth: 64 })
}

pub fn knick() -> Structure {
    single(PathRule::knick())
}

/// Drift `-1` below 0, `+1` above, rest at 0.
pub fn space_drift() -> Structure {
    let pos = Interval::open(0.0, f64::INFINITY).expect("interval");
    validate_structure(vec![
        Domain::from_path(linear_on(-1.0, pos)),
        Domain::constant(Interval::point(0.0).expect("point")),
        Domain::from_path(linear_on(1.0, pos)),
    ])
    .expect("valid")
}

/// `x -> -x` on `(-inf, 0]` below the Cantor path on `(0, inf)`.
pub fn partly_cantor() -> Structure {
    let closed = Interval::closed_open(0.0, f64::INFINITY).expect("interval");
    let open = Interval::open(0.0, f64::INFINITY).expect("interval");
    validate_structure(vec![
        Domain::from_path(linear_on(-1.0, closed)),
        Domain::from_path(GeneratingPath::onto(PathRule::Cantor { depth: 64 }, open).expect("onto")),
    ])
    .expect("valid")
}

/// `-1 - s^2` and `1 + s^2` on `[0, inf)` around the constant domain `(-1, 1)`.
pub fn mid_deriv_zero() -> Structure {
    let half = Interval::closed_open(0.0, f64::INFINITY).expect("interval");
    validate_structure(vec![
        Domain::from_path(GeneratingPath::onto(PathRule::Builtin(BuiltinPath::ParabolaDown), half).expect("onto")),
        Domain::constant(Interval::open(-1.0, 1.0).expect("interval")),
        Domain::from_path(GeneratingPath::onto(PathRule::Builtin(BuiltinPath::ParabolaUp), half).expect("onto")),
    ])
    .expect("valid")
}

/// The eight reference processes.
pub fn build_gallery() -> Vec<GalleryEntry> {
    use Verdict::{Fails, Holds};
    vec![
        GalleryEntry {
            name: "e1_2",
            locator: "single generating path shifted left and right, s + s^3",
            build: GalleryBuild::Structure(e1_2()),
            expected: expect(&[(HUNT, Holds), (PATH_SHAPE, Holds), (FINITE_VARIATION, Holds)]),
        },
        GalleryEntry {
            name: "e2_9",
            locator: "zig-zag path from 0 crossing (-1/2, 1/2) infinitely often before time 1",
            build: GalleryBuild::Raw(RawFamily::ZigZag),
            expected: expect(&[(HUNT, Fails), (PATH_SHAPE, Fails), (FINITE_VARIATION, Fails)]),
        },
        GalleryEntry {
            name: "cantor",
            locator: "Cantor process, g(x - [x]) + [x] with g = (h + y)/2",
            build: GalleryBuild::Structure(cantor()),
            expected: expect(&[
                (HUNT, Holds),
                (FINITE_VARIATION, Holds),
                (CB_FELLER, Holds),
                (FELLER, Holds),
                (RICH, Fails),
                (ITO_DRIFT, Fails),
                (SINGULAR_INCREMENT, Holds),
            ]),
        },
        GalleryEntry {
            name: "knick",
            locator: "knick process, slope 1/2 below 0 and 1 above",
            build: GalleryBuild::Structure(knick()),
            expected: expect(&[(HUNT, Holds), (FELLER, Holds), (RICH, Fails), (ITO_DRIFT, Holds)]),
        },
        GalleryEntry {
            name: "space_drift",
            locator: "space dependent drift, velocity sign(x)",
            build: GalleryBuild::Structure(space_drift()),
            expected: expect(&[(HUNT, Holds), (FELLER, Fails), (ITO_DRIFT, Holds)]),
        },
        GalleryEntry {
            name: "partly_cantor",
            locator: "Cantor path on (0, inf) above the reflection x -> -x",
            build: GalleryBuild::Structure(partly_cantor()),
            expected: expect(&[(HUNT, Holds), (FINITE_VARIATION, Holds), (FELLER, Fails), (ITO_DRIFT, Fails)]),
        },
        GalleryEntry {
            name: "mid_deriv_zero",
            locator: "paths leaving the constant domain (-1, 1) with zero initial speed",
            build: GalleryBuild::Structure(mid_deriv_zero()),
            expected: expect(&[(HUNT, Holds), (FELLER, Fails), (RICH, Holds), (ITO_DRIFT, Holds)]),
        },
        GalleryEntry {
            name: "cadlag_5_5",
            locator: "cadlag path from -1 alternating between -1 + t and 1 - t on shrinking blocks",
            build: GalleryBuild::Raw(RawFamily::CadlagCrossing),
            expected: expect(&[(HUNT, Fails), (PATH_SHAPE, Fails), (FINITE_VARIATION, Fails)]),
        },
    ]
}

/// One manifest row: name, locator and expected verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub locator: String,
    pub kind: String,
    pub expected: BTreeMap<String, Verdict>,
}

pub fn manifest() -> Vec<ManifestEntry> {
    build_gallery()
        .into_iter()
        .map(|e| ManifestEntry {
            name: e.name.into(),
            locator: e.locator.into(),
            kind: match &e.build {
                GalleryBuild::Structure(s) => format!("structure {}", s.type_string()),
                GalleryBuild::Raw(r) => format!("raw {}", r.name()),
            },
            expected: e.expected,
        })
        .collect()
}

pub fn manifest_json() -> String {
    serde_json::to_string_pretty(&manifest()).expect("manifest serializes")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryConfig {
    pub grid: GridConfig,
    /// Starting points for the per-path checks.
    pub path_points: usize,
    /// Dyadic levels for variation estimates of structures.
    pub variation_levels: (u32, u32),
    /// Dyadic levels for variation estimates of raw families.
    pub raw_variation_levels: (u32, u32),
    /// Not a power of two, so samples do not line up with dyadic blocks.
    pub raw_horizon: f64,
    pub homogeneity_probes: usize,
    pub feller: FellerCheckConfig,
    pub rich: RichConfig,
    pub defect_level: u32,
}

impl Default for GalleryConfig {
    fn default() -> Self {
        GalleryConfig {
            grid: GridConfig::default(),
            path_points: 33,
            variation_levels: (6, 10),
            raw_variation_levels: (6, 14),
            raw_horizon: 1.25,
            homogeneity_probes: 1000,
            feller: FellerCheckConfig::default(),
            rich: RichConfig::default(),
            defect_level: 20,
        }
    }
}

impl GalleryConfig {
    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.grid.exec = exec;
        self.feller.exec = exec;
        self.rich.exec = exec;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryOutcome {
    pub name: String,
    pub reports: BTreeMap<String, PropertyReport>,
    /// `(property, expected, observed)` for every disagreement.
    pub mismatches: Vec<(String, Verdict, Verdict)>,
}

impl EntryOutcome {
    pub fn verdict(&self, property: &str) -> Option<Verdict> {
        self.reports.get(property).map(|r| r.verdict)
    }
}

fn path_shape_report<F: ProcessFamily + ?Sized>(family: &F, xs: &[f64], horizon: f64, cfg: &GalleryConfig) -> PropertyReport {
    let exec = cfg.grid.exec;
    let outcomes = par::map(exec, xs, |&x| {
        sample_path(family, x, horizon, cfg.grid.level, Execution::Sequential).map(|ps| check_path_shape(&ps, cfg.grid.tol))
    });
    let mut verdict = Verdict::Holds;
    let mut witnesses = Vec::new();
    let mut residual = 0.0f64;
    for o in outcomes {
        match o {
            Ok(o) => {
                verdict = verdict.and(o.report.verdict);
                residual = residual.max(o.report.residual);
                witnesses.extend(o.report.witnesses);
            }
            Err(e) => {
                return PropertyReport::new(PATH_SHAPE, Verdict::Inconclusive, f64::INFINITY).with_note(e.to_string())
            }
        }
    }
    PropertyReport::new(PATH_SHAPE, verdict, residual).with_witnesses(witnesses)
}

fn variation_report<F: ProcessFamily + ?Sized>(
    family: &F,
    xs: &[f64],
    horizon: f64,
    levels: (u32, u32),
    exec: Execution,
) -> PropertyReport {
    let reports = par::map(exec, xs, |&x| {
        total_variation(family, x, horizon, levels.0..=levels.1, Execution::Sequential).map(|v| v.to_report())
    });
    let mut verdict = Verdict::Holds;
    let mut residual = 0.0f64;
    let mut witnesses = Vec::new();
    for r in reports {
        match r {
            Ok(r) => {
                verdict = verdict.and(r.verdict);
                residual = residual.max(r.residual);
                witnesses.extend(r.witnesses);
            }
            Err(e) => {
                return PropertyReport::new(FINITE_VARIATION, Verdict::Inconclusive, f64::INFINITY)
                    .with_note(e.to_string())
            }
        }
    }
    PropertyReport::new(FINITE_VARIATION, verdict, residual).with_witnesses(witnesses)
}

fn ito_drift_report(s: &Structure, xs: &[f64], exec: Execution) -> PropertyReport {
    let undefined: Vec<Witness> = par::map(exec, xs, |&x| (x, ito_drift(s, x)))
        .into_iter()
        .filter(|(_, d)| !matches!(d, Ok(Some(_))))
        .map(|(x, _)| Witness { inputs: vec![x], observed: f64::NAN, expected: 0.0 })
        .collect();
    if undefined.is_empty() {
        PropertyReport::holds(ITO_DRIFT, 0.0)
    } else {
        let n = undefined.len();
        PropertyReport::new(ITO_DRIFT, Verdict::Fails, n as f64)
            .with_witnesses(undefined)
            .with_note(format!("drift undefined at {n} of {} points", xs.len()))
    }
}

/// Share of the increment over `[0, 1]` not gained across removed middle
/// thirds; holds when it stays above a quarter of the total.
fn singular_increment_report(s: &Structure, cfg: &GalleryConfig) -> Option<PropertyReport> {
    if !s.is_pure() {
        return None;
    }
    let path = s.domain(0).path()?;
    let d = ac_defect(path, cfg.defect_level, cfg.grid.exec).ok()?;
    let share = d.defect / d.total_increment;
    Some(
        PropertyReport::new(SINGULAR_INCREMENT, Verdict::from_bool(share > 0.25), share)
            .with_note(format!("defect {} of total {} at level {}", d.defect, d.total_increment, d.level)),
    )
}

fn hunt_report_raw(family: RawFamily, cfg: &GalleryConfig) -> PropertyReport {
    let xs = linspace(-1.0, 1.0, 65);
    let ts = linspace(0.0, cfg.raw_horizon, (1 << cfg.grid.level) + 1);
    let fam = SampledFamily::from_fn(|x, t| family.position(x, t).unwrap_or(f64::NAN), xs, ts, cfg.grid.exec);
    match infer_structure(&fam, cfg.grid.tol, cfg.grid.exec) {
        Ok(o) => PropertyReport::holds(HUNT, o.report.residual)
            .with_note(format!("inferred {}", o.structure.type_string())),
        Err(InferError::NotHunt(r)) => PropertyReport::new(HUNT, Verdict::Fails, r.residual)
            .with_witnesses(r.witnesses)
            .with_note("sampled rows are not monotone-then-constant"),
        Err(e) => PropertyReport::new(HUNT, Verdict::Fails, f64::INFINITY).with_note(e.to_string()),
    }
}

/// Runs every applicable classifier on `s`.
pub fn classify_structure(s: &Structure, cfg: &GalleryConfig) -> BTreeMap<String, PropertyReport> {
    let exec = cfg.grid.exec;
    let mut out = BTreeMap::new();
    let xs = linspace(cfg.grid.x_lo, cfg.grid.x_hi, cfg.path_points);
    out.insert(HUNT.into(), PropertyReport::holds(HUNT, 0.0).with_note(format!("structure {}", s.type_string())));
    out.insert(PATH_SHAPE.into(), path_shape_report(s, &xs, cfg.grid.horizon, cfg));
    out.insert(FINITE_VARIATION.into(), variation_report(s, &xs, cfg.grid.horizon, cfg.variation_levels, exec));
    out.insert(CB_FELLER.into(), is_cb_feller(s));
    out.insert(FELLER.into(), is_feller(s));
    out.insert(RICH.into(), is_rich(s, &cfg.rich));
    let probes = homogeneity_probes(s, cfg.homogeneity_probes, &cfg.grid);
    let homogeneity = check_time_homogeneity(s, &probes, cfg.grid.tol, exec).unwrap_or_else(|e| {
        PropertyReport::new(HOMOGENEITY, Verdict::Inconclusive, f64::INFINITY).with_note(e.to_string())
    });
    out.insert(HOMOGENEITY.into(), homogeneity);
    let ts = linspace(0.0, cfg.grid.horizon / 2.0, 9);
    let flow = flow_law_residual(s, &xs, &ts, cfg.grid.tol, exec).unwrap_or_else(|e| {
        PropertyReport::new(FLOW_LAW, Verdict::Inconclusive, f64::INFINITY).with_note(e.to_string())
    });
    out.insert(FLOW_LAW.into(), flow);
    let drift_xs = linspace(cfg.grid.x_lo, cfg.grid.x_hi, cfg.grid.x_points);
    out.insert(ITO_DRIFT.into(), ito_drift_report(s, &drift_xs, exec));
    if let Some(r) = singular_increment_report(s, cfg) {
        out.insert(SINGULAR_INCREMENT.into(), r);
    }
    out
}

/// Runs the checks that make sense without a structure.
pub fn classify_raw(family: RawFamily, cfg: &GalleryConfig) -> BTreeMap<String, PropertyReport> {
    let x0 = family.base_start();
    let mut out = BTreeMap::new();
    out.insert(HUNT.into(), hunt_report_raw(family, cfg));
    out.insert(PATH_SHAPE.into(), path_shape_report(&family, &[x0], cfg.raw_horizon, cfg));
    out.insert(
        FINITE_VARIATION.into(),
        variation_report(&family, &[x0], cfg.raw_horizon, cfg.raw_variation_levels, cfg.grid.exec),
    );
    out
}

pub fn run_entry(entry: &GalleryEntry, cfg: &GalleryConfig) -> EntryOutcome {
    let reports = match &entry.build {
        GalleryBuild::Structure(s) => classify_structure(s, cfg),
        GalleryBuild::Raw(r) => classify_raw(*r, cfg),
    };
    let mismatches = entry
        .expected
        .iter()
        .filter_map(|(k, want)| {
            let got = reports.get(k).map_or(Verdict::Inconclusive, |r| r.verdict);
            (got != *want).then(|| (k.clone(), *want, got))
        })
        .collect();
    EntryOutcome { name: entry.name.into(), reports, mismatches }
}

/// Regression over the whole gallery.
pub fn run_gallery(cfg: &GalleryConfig) -> Vec<EntryOutcome> {
    build_gallery().iter().map(|e| run_entry(e, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_entries_with_unique_names() {
        let g = build_gallery();
        assert_eq!(g.len(), 8);
        let mut names: Vec<_> = g.iter().map(|e| e.name).collect();
        names.dedup();
        assert_eq!(names.len(), 8);
        let c = g.iter().find(|e| e.name == "cantor").unwrap();
        assert_eq!(c.expected[FELLER], Verdict::Holds);
        assert_eq!(c.expected[RICH], Verdict::Fails);
        assert!(g.iter().find(|e| e.name == "e2_9").unwrap().structure().is_none());
    }

    #[test]
    fn structures_have_the_documented_types() {
        assert_eq!(space_drift().type_string(), "⊖[⊙]⊕");
        assert_eq!(partly_cantor().type_string(), "⊖]⊕");
        assert_eq!(mid_deriv_zero().type_string(), "⊖]⊙[⊕");
    }

    #[test]
    fn regression_matches_expectations() {
        let start = std::time::Instant::now();
        let outcomes = run_gallery(&GalleryConfig::default());
        for o in &outcomes {
            assert!(o.mismatches.is_empty(), "{}: {:?}", o.name, o.mismatches);
        }
        assert!(start.elapsed().as_secs() <= 60, "gallery took {:?}", start.elapsed());
    }

    #[test]
    fn manifest_is_json() {
        let v: serde_json::Value = serde_json::from_str(&manifest_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 8);
        assert_eq!(v[2]["expected"]["feller"], "holds");
    }
}
