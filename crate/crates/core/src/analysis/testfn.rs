use serde::{Deserialize, Serialize};

/// Smooth test functions with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(1 - 1/(1 - r^2))` for `r = (x - center)/width`, `|r| < 1`; peak 1 at the center.
    Bump { center: f64, width: f64 },
    /// `exp(-x^2)`
    Gaussian,
    /// `exp(-(x - 1)^2 / 2)`
    ShiftedGaussian,
    /// `1 / cosh(x)`
    Sech,
}

impl TestFunction {
    pub fn bump(center: f64, width: f64) -> Self {
        TestFunction::Bump { center, width }
    }

    /// The fixed catalog: three bumps and three functions decaying at infinity.
    pub fn catalog() -> [TestFunction; 6] {
        [
            TestFunction::bump(0.0, 0.5),
            TestFunction::bump(1.0, 1.0),
            TestFunction::bump(-1.5, 2.0),
            TestFunction::Gaussian,
            TestFunction::ShiftedGaussian,
            TestFunction::Sech,
        ]
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::Bump { center, width } => format!("bump({center},{width})"),
            TestFunction::Gaussian => "gaussian".into(),
            TestFunction::ShiftedGaussian => "shifted_gaussian".into(),
            TestFunction::Sech => "sech".into(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Bump { center, width } => {
                let r = (x - center) / width;
                if r.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            TestFunction::Gaussian => (-x * x).exp(),
            TestFunction::ShiftedGaussian => (-(x - 1.0) * (x - 1.0) / 2.0).exp(),
            TestFunction::Sech => 1.0 / x.cosh(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Bump { center, width } => {
                let r = (x - center) / width;
                if r.abs() < 1.0 {
                    let q = 1.0 - r * r;
                    self.value(x) * (-2.0 * r / (q * q)) / width
                } else {
                    0.0
                }
            }
            TestFunction::Gaussian => -2.0 * x * (-x * x).exp(),
            TestFunction::ShiftedGaussian => -(x - 1.0) * self.value(x),
            TestFunction::Sech => -x.tanh() / x.cosh(),
        }
    }
}
