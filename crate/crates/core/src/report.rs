use serde::Serialize;

/// Both sides of a checked inequality or identity.
///
/// `ratio` is `lhs / rhs_main` (infinite when the right side vanishes) and
/// `defect` is `lhs - rhs_main` unless the producing operation documents a
/// different convention (identity checks store the absolute difference).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub check: String,
    pub lhs: f64,
    pub rhs_main: f64,
    pub ratio: f64,
    pub defect: f64,
    pub params: Vec<(String, f64)>,
}

impl BoundReport {
    pub fn new(check: impl Into<String>, lhs: f64, rhs_main: f64) -> Self {
        BoundReport {
            check: check.into(),
            lhs,
            rhs_main,
            ratio: ratio(lhs, rhs_main),
            defect: lhs - rhs_main,
            params: Vec::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}
