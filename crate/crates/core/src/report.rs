//! Validation reports shared by all dialects.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::Focus;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub rule_index: usize,
    pub focus: Focus,
    pub selector: String,
    pub shape: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleStats {
    pub rule_index: usize,
    pub selected: usize,
    pub violations: usize,
}

/// Outcome of validating a graph against a schema. Violations are ordered by
/// rule index, then focus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub stats: Vec<RuleStats>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport {
            valid: true,
            violations: Vec::new(),
            stats: Vec::new(),
        }
    }
}

impl ValidationReport {
    /// Merges reports computed over disjoint sets of rules.
    pub fn merge(mut self, other: ValidationReport) -> ValidationReport {
        self.violations.extend(other.violations);
        self.stats.extend(other.stats);
        self.violations.sort();
        self.stats.sort_by_key(|s| s.rule_index);
        self.valid = self.violations.is_empty();
        self
    }

    /// Focuses violating the given rule.
    pub fn violating(&self, rule_index: usize) -> BTreeSet<Focus> {
        self.violations
            .iter()
            .filter(|v| v.rule_index == rule_index)
            .map(|v| v.focus.clone())
            .collect()
    }

    /// Indices of the rules with at least one violation.
    pub fn failed_rules(&self) -> BTreeSet<usize> {
        self.violations.iter().map(|v| v.rule_index).collect()
    }
}

/// Runs the selector/shape contract over a list of rules.
pub(crate) fn run_rules<R, E>(
    rules: &[R],
    mut select: impl FnMut(&R) -> Result<BTreeSet<Focus>, E>,
    mut satisfies: impl FnMut(&R, &Focus) -> Result<bool, E>,
    describe: impl Fn(&R) -> (String, String),
) -> Result<ValidationReport, E> {
    let mut report = ValidationReport::default();
    for (i, rule) in rules.iter().enumerate() {
        let selected = select(rule)?;
        let mut count = 0;
        for focus in &selected {
            if !satisfies(rule, focus)? {
                let (selector, shape) = describe(rule);
                report.violations.push(Violation {
                    rule_index: i,
                    focus: focus.clone(),
                    selector,
                    shape,
                });
                count += 1;
            }
        }
        report.stats.push(RuleStats {
            rule_index: i,
            selected: selected.len(),
            violations: count,
        });
    }
    report.valid = report.violations.is_empty();
    Ok(report)
}

pub(crate) fn compact_json<T: Serialize>(t: &T) -> String {
    serde_json::to_string(t).unwrap_or_default()
}
