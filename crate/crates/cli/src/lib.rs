//! Scenario runner and self-test driver behind the `deskalg` binary.

pub mod scenario;
pub mod selftest;

use serde_json::Value;

/// Version tag carried by every scenario and report.
pub const SCHEMA: &str = "1";

/// Environment variable that overrides the computation budget.
pub const BUDGET_ENV: &str = "DESKALG_BUDGET";

/// Process exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    PropertyFailure,
    InputError,
    Budget,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::PropertyFailure => 1,
            Status::InputError => 2,
            Status::Budget => 3,
            Status::Inconclusive => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::PropertyFailure => "property-failure",
            Status::InputError => "input-error",
            Status::Budget => "budget-exceeded",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// Failures that stop a run before a report exists.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
}

impl RunError {
    pub fn status(&self) -> Status {
        match self {
            RunError::Input(_) => Status::InputError,
            RunError::Budget(_) => Status::Budget,
        }
    }
}

/// Splits a core error into "no report" classes; everything else is a
/// failed property of an otherwise valid run.
pub(crate) fn classify(err: deskalg::Error) -> RunError {
    use deskalg::Error as E;
    match err {
        E::Budget { .. } => RunError::Budget(err.to_string()),
        _ => RunError::Input(err.to_string()),
    }
}

/// A finished run: the report and the exit status it implies.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub report: Value,
}

/// Canonical report text: pretty JSON with sorted keys and a trailing newline.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Budget precedence: environment variable, then the flag, then the
/// scenario, then the default.
pub fn resolve_budget(flag: Option<u64>, scenario: Option<u64>) -> Result<u64, RunError> {
    if let Ok(v) = std::env::var(BUDGET_ENV) {
        return v.trim().parse().map_err(|_| RunError::Input(format!("{} is not an integer: {:?}", BUDGET_ENV, v)));
    }
    Ok(flag.or(scenario).unwrap_or(deskalg::cochains::DEFAULT_BUDGET as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let all = [Status::Ok, Status::PropertyFailure, Status::InputError, Status::Budget, Status::Inconclusive];
        let codes: Vec<i32> = all.iter().map(|s| s.code()).collect();
        assert_eq!(codes, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn render_sorts_keys_and_ends_with_newline() {
        let v: Value = serde_json::from_str(r#"{"b": 1, "a": [2, 3]}"#).unwrap();
        let text = render(&v);
        assert!(text.ends_with('\n'));
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn core_budget_errors_keep_their_class() {
        let e = classify(deskalg::Error::Budget { needed: 10, budget: 1 });
        assert_eq!(e.status(), Status::Budget);
        let e = classify(deskalg::Error::Invalid("x".into()));
        assert_eq!(e.status(), Status::InputError);
    }
}
