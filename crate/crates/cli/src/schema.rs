//! Validation of reports against the checked-in JSON Schema.

use std::sync::OnceLock;

use jsonschema::Validator;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

fn validator() -> &'static Validator {
    static V: OnceLock<Validator> = OnceLock::new();
    V.get_or_init(|| {
        let schema: Value =
            serde_json::from_str(REPORT_SCHEMA).expect("checked-in schema is valid JSON");
        jsonschema::validator_for(&schema).expect("checked-in schema compiles")
    })
}

/// Validates a report; on failure returns one message per violation.
pub fn validate_report(report: &Value) -> Result<(), Vec<String>> {
    let errors: Vec<String> = validator()
        .iter_errors(report)
        .map(|e| format!("{}: {e}", e.instance_path()))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn minimal() -> Value {
        json!({
            "schema_version": 1,
            "command": "ka",
            "params": {"seed": 0},
            "results": {
                "rule": {"rule": "exact"},
                "m_sessions": 4,
                "key_len": 2,
                "key_equality": {"successes": 1, "trials": 1, "rate": 1.0, "wilson_low": 0.2, "wilson_high": 1.0},
                "mean_raw_errors": 0.0,
                "runs": [{"run": 0, "keys_equal": true, "raw_errors": 0}]
            },
            "checks": [{"name": "key equality", "threshold": ">= 0.95", "value": 1.0, "passed": true}],
            "meta": {"timestamp_unix": 0, "version": "0.1.0"}
        })
    }

    #[test]
    fn accepts_a_well_formed_report() {
        validate_report(&minimal()).unwrap();
    }

    #[test]
    fn rejects_violations() {
        let edits: [fn(&mut Value); 5] = [
            |v| v["command"] = json!("nope"),
            |v| v["results"]["key_equality"]["rate"] = json!(1.5),
            |v| v["results"]["runs"] = json!([]),
            |v| v["meta"]["extra"] = json!(1),
            |v| v["params"]["seed"] = json!(-1),
        ];
        for edit in edits {
            let mut v = minimal();
            edit(&mut v);
            assert!(validate_report(&v).is_err(), "{v}");
        }
    }

    #[test]
    fn results_schema_follows_the_command() {
        let mut v = minimal();
        v["command"] = json!("ba");
        assert!(validate_report(&v).is_err());
    }
}
