use dethunt::analysis::{drift_integral, symbol, symbol_via_limit, dyadic_times};
use dethunt::gallery::{build_gallery, GalleryBuild, RawFamily};
use dethunt::process::{evaluate, linspace, ProcessFamily};
use dethunt::structure::{infer_structure, InferError, SampledFamily, Structure};
use dethunt::{Execution, Verdict};

fn gallery_structures() -> Vec<(&'static str, Structure)> {
    build_gallery()
        .into_iter()
        .filter_map(|e| match e.build {
            GalleryBuild::Structure(s) => Some((e.name, s)),
            GalleryBuild::Raw(_) => None,
        })
        .collect()
}

fn sampled(f: &(dyn ProcessFamily + Sync)) -> SampledFamily {
    SampledFamily::from_fn(
        |x, t| f.position(x, t).unwrap_or(f64::NAN),
        linspace(-4.0, 4.0, 65),
        linspace(0.0, 2.0, 257),
        Execution::Parallel,
    )
}

#[test]
fn inference_reproduces_gallery_structures() {
    for (name, s) in gallery_structures() {
        let fam = sampled(&s);
        let out = infer_structure(&fam, 1e-6, Execution::Parallel).unwrap_or_else(|e| panic!("{name}: {e}"));
        // the fit is piecewise linear between samples spaced 1/8 apart
        assert!(out.report.residual <= 1e-2, "{name}: {:?}", out.report);
        assert_eq!(out.structure.type_string().replace(['[', ']'], ""), s.type_string().replace(['[', ']'], ""), "{name}");
        for &x in &[-3.3, -0.7, 0.0, 0.45, 2.9] {
            for &t in &[0.1, 0.8, 1.9] {
                let a = evaluate(&s, x, t).unwrap();
                let b = evaluate(&out.structure, x, t).unwrap();
                assert!((a - b).abs() <= 1e-2, "{name} x={x} t={t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn raw_families_are_rejected() {
    for f in [RawFamily::ZigZag, RawFamily::CadlagCrossing] {
        let fam = SampledFamily::from_fn(
            |x, t| f.position(x, t).unwrap(),
            linspace(-1.0, 1.0, 65),
            linspace(0.0, 1.25, 1025),
            Execution::Parallel,
        );
        let err = infer_structure(&fam, 1e-8, Execution::Parallel).unwrap_err();
        match err {
            InferError::NotHunt(r) => {
                assert_eq!(r.verdict, Verdict::Fails);
                assert!(!r.witnesses.is_empty());
            }
            other => panic!("{}: {other}", f.name()),
        }
    }
}

#[test]
fn drift_integrates_to_the_displacement() {
    for (name, s) in gallery_structures() {
        if !["e1_2", "mid_deriv_zero", "space_drift"].contains(&name) {
            continue;
        }
        for &x in &[-2.5, -1.0, -0.3, 0.0, 0.7, 1.0, 3.0] {
            let b = drift_integral(&s, x, 2.0, 1 << 12).unwrap();
            let want = evaluate(&s, x, 2.0).unwrap() - x;
            assert!((b - want).abs() <= 1e-4 * want.abs().max(1.0), "{name} x={x}: {b} vs {want}");
        }
    }
}

#[test]
fn symbol_limit_agrees_with_the_closed_form() {
    let ts = dyadic_times(10, 20);
    for (name, s) in gallery_structures() {
        for x in linspace(-4.0, 4.0, 33) {
            for xi in [-2.0, -1.0, 1.0, 2.0] {
                let Ok(p) = symbol(&s, x, xi) else { continue };
                let lim = symbol_via_limit(&s, x, xi, &ts, 1.0, 1e-6).unwrap();
                if !lim.converged {
                    continue;
                }
                assert!(lim.estimate.distance(&p) <= 1e-4, "{name} x={x} xi={xi}: {lim:?} vs {p:?}");
            }
        }
    }
}
