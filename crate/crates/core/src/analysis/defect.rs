use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};
use super::AnalysisError;
use crate::paths::{GeneratingPath, PathError};

/// Increment of a path over `[0, 1]` split into the part gained across the
/// removed middle thirds of levels `1..=level` and the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcDefect {
    pub level: u32,
    pub removed_increment_sum: f64,
    pub total_increment: f64,
    pub defect: f64,
}

/// Largest level whose endpoints `m / 3^k` are exact in `f64`.
pub const MAX_DEFECT_LEVEL: u32 = 33;

/// `(1/2)(1 + (2/3)^n)`, the defect of the Cantor path `g` at level `n`.
pub fn ac_defect_closed_form(level: u32) -> f64 {
    0.5 * (1.0 + (2.0f64 / 3.0).powi(level as i32))
}

/// Sum of `path(b) - path(a)` over the removed open intervals `(a, b)` of
/// the first `level` steps of the middle-thirds construction.
pub fn ac_defect(path: &GeneratingPath, level: u32, exec: Execution) -> Result<AcDefect, AnalysisError> {
    if level == 0 || level > MAX_DEFECT_LEVEL {
        return Err(AnalysisError::Unsupported(format!("defect level {level} outside 1..={MAX_DEFECT_LEVEL}")));
    }
    let total_increment = path.eval(1.0)? - path.eval(0.0)?;
    let mut removed_increment_sum = 0.0;
    for k in 1..=level {
        let scale = 3u64.pow(k);
        let denom = scale as f64;
        let count = 1usize << (k - 1);
        let parts = par::map_range(exec, count, |bits| {
            // left ends of surviving intervals have ternary digits in {0, 2}
            let mut j = 0u64;
            let mut place = 1u64;
            for d in 0..k - 1 {
                if bits >> d & 1 == 1 {
                    j += 2 * place;
                }
                place *= 3;
            }
            let m = 3 * j + 1;
            let mut a = m as f64 / denom;
            if a.mul_add(denom, -(m as f64)) < 0.0 {
                a = a.next_up();
            }
            let mut b = (m + 1) as f64 / denom;
            if b.mul_add(denom, -((m + 1) as f64)) > 0.0 {
                b = b.next_down();
            }
            Ok::<f64, PathError>(path.eval(b)? - path.eval(a)?)
        });
        for p in parts {
            removed_increment_sum += p?;
        }
    }
    Ok(AcDefect { level, removed_increment_sum, total_increment, defect: total_increment - removed_increment_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{Interval, PathRule};

    fn cantor() -> GeneratingPath {
        GeneratingPath::onto(PathRule::Cantor { depth: 64 }, Interval::real_line()).unwrap()
    }

    #[test]
    fn first_level_removes_one_sixth() {
        let d = ac_defect(&cantor(), 1, Execution::Sequential).unwrap();
        assert!((d.removed_increment_sum - 1.0 / 6.0).abs() < 1e-15);
        assert!((d.defect - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(d.total_increment, 1.0);
    }

    #[test]
    fn cantor_defect_tracks_geometric_sum() {
        for n in [2, 5, 12] {
            let d = ac_defect(&cantor(), n, Execution::default()).unwrap();
            let geometric: f64 = (1..=n).map(|k| 2f64.powi(k as i32 - 1) * 0.5 * 3f64.powi(-(k as i32))).sum();
            assert!((d.removed_increment_sum - geometric).abs() < 1e-12, "n={n}");
            assert!((d.defect - ac_defect_closed_form(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_defect_is_the_surviving_length() {
        let p = GeneratingPath::linear(1.0, 0.0).unwrap();
        for n in [1, 4, 10] {
            let d = ac_defect(&p, n, Execution::Sequential).unwrap();
            assert!((d.defect - (2.0f64 / 3.0).powi(n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_levels_out_of_range() {
        assert!(ac_defect(&cantor(), 0, Execution::Sequential).is_err());
        assert!(ac_defect(&cantor(), 40, Execution::Sequential).is_err());
    }
}
