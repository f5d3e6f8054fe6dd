use serde::{Deserialize, Serialize};

/// Rule identifier reported when a document passes every rule.
pub const RULE_NONE: &str = "none";

/// Accept/reject verdict of a document-level filter.
///
/// `rule_id` names the first violated rule; `metric_value` is the measured
/// quantity that triggered it (zero on acceptance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub accepted: bool,
    pub rule_id: String,
    pub metric_value: f64,
}

impl FilterDecision {
    pub fn accept() -> Self {
        Self {
            accepted: true,
            rule_id: RULE_NONE.to_string(),
            metric_value: 0.0,
        }
    }

    pub fn reject(rule_id: &str, metric_value: f64) -> Self {
        debug_assert_ne!(rule_id, RULE_NONE);
        Self {
            accepted: false,
            rule_id: rule_id.to_string(),
            metric_value,
        }
    }
}
