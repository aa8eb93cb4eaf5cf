//! Outcome bookkeeping and the line-oriented JSON report format.
//!
//! Every verification routine tallies its instances into [`CheckOutcome`]
//! values: one per checked statement, with a stable tag, the number of
//! instances tried, the number violated, and up to three rendered
//! witnesses. The command-line tool flattens outcomes into
//! [`CheckRecord`] lines. Records use sorted maps and contain no
//! timestamps, so equal inputs always serialize byte for byte.

use serde::Serialize;
use std::collections::BTreeMap;

const MAX_WITNESSES: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub tag: &'static str,
    pub trials: u64,
    pub violations: u64,
    pub witnesses: Vec<String>,
}

impl CheckOutcome {
    pub fn new(tag: &'static str) -> CheckOutcome {
        CheckOutcome { tag, trials: 0, violations: 0, witnesses: Vec::new() }
    }

    /// Records one instance; on failure, stores the rendered witness
    /// (lazily, and only for the first few failures).
    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// True when no instance applied (for example, every cell is empty).
    pub fn trivially_true(&self) -> bool {
        self.trials == 0
    }
}

/// One reported check, serialized as a single JSON line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    /// Which command or routine produced the record.
    pub check: String,
    /// Stable tag of the statement checked.
    pub lemma_tag: String,
    /// Input parameters, rendered as strings.
    pub params: BTreeMap<String, String>,
    /// "exhaustive", "sampled", or "exact".
    pub mode: String,
    pub trials: u64,
    pub violations: u64,
    pub witnesses: Vec<String>,
    /// Exact quantities computed along the way (counts, sizes, bounds).
    pub exact_values: BTreeMap<String, String>,
}

impl CheckRecord {
    pub fn new(check: &str, lemma_tag: &str) -> CheckRecord {
        CheckRecord {
            check: check.to_string(),
            lemma_tag: lemma_tag.to_string(),
            params: BTreeMap::new(),
            mode: String::new(),
            trials: 0,
            violations: 0,
            witnesses: Vec::new(),
            exact_values: BTreeMap::new(),
        }
    }

    pub fn with_outcome(mut self, outcome: &CheckOutcome) -> CheckRecord {
        self.lemma_tag = outcome.tag.to_string();
        self.trials = outcome.trials;
        self.violations = outcome.violations;
        self.witnesses = outcome.witnesses.clone();
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> CheckRecord {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn exact(mut self, key: &str, value: impl ToString) -> CheckRecord {
        self.exact_values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn mode(mut self, mode: &str) -> CheckRecord {
        self.mode = mode.to_string();
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_keeps_at_most_three_witnesses() {
        let mut o = CheckOutcome::new("t");
        for i in 0..10 {
            o.check(false, || format!("w{i}"));
        }
        assert_eq!(o.trials, 10);
        assert_eq!(o.violations, 10);
        assert_eq!(o.witnesses, vec!["w0", "w1", "w2"]);
        assert!(!o.passed());
    }

    #[test]
    fn record_serialization_is_stable() {
        let rec = CheckRecord::new("count", "cell-size")
            .param("p", 2)
            .param("spec", "3:2")
            .mode("exact")
            .exact("cell", 9);
        let line = rec.to_json_line();
        assert_eq!(line, rec.to_json_line());
        assert!(line.starts_with('{') && line.ends_with('}'));
        let parsed: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(parsed["check"], "count");
        assert_eq!(parsed["params"]["p"], "2");
        assert_eq!(parsed["exact_values"]["cell"], "9");
    }
}
