use serde::Serialize;

/// One quantitative gate: `measured` must lie within `tolerance` of
/// `expected`, or satisfy the stated one-sided comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured − expected| ≤ tolerance`.
    Within,
    /// `measured ≥ expected`.
    AtLeast,
    /// `measured ≤ expected`.
    AtMost,
}

impl Check {
    pub fn within(name: impl Into<String>, expected: f64, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected,
            measured,
            tolerance,
            comparison: Comparison::Within,
            passed: (measured - expected).abs() <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, bound: f64, measured: f64) -> Self {
        Self {
            name: name.into(),
            expected: bound,
            measured,
            tolerance: 0.0,
            comparison: Comparison::AtLeast,
            passed: measured >= bound,
        }
    }

    pub fn at_most(name: impl Into<String>, bound: f64, measured: f64) -> Self {
        Self {
            name: name.into(),
            expected: bound,
            measured,
            tolerance: 0.0,
            comparison: Comparison::AtMost,
            passed: measured <= bound,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert!(Check::within("a", -0.5, -0.53, 0.05).passed);
        assert!(!Check::within("a", -0.5, -0.56, 0.05).passed);
        assert!(Check::at_least("b", 2.4, 2.5).passed);
        assert!(!Check::at_most("c", -1.4, -1.3).passed);
        assert!(!Check::within("nan", 0.0, f64::NAN, 1.0).passed);
    }
}
