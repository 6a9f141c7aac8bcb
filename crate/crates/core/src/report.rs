//! Check outcomes shared by every verification sweep.

use serde::{Deserialize, Serialize};

/// Witnesses kept per check; the failure count is always exact.
pub const WITNESS_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub witnesses: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed())
    }

    /// Records one evaluated case of `name`; the witness closure only runs on failure.
    pub fn record(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> String) {
        let idx = match self.checks.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                self.checks.push(CheckOutcome {
                    name: name.to_string(),
                    cases: 0,
                    failures: 0,
                    witnesses: Vec::new(),
                });
                self.checks.len() - 1
            }
        };
        let c = &mut self.checks[idx];
        c.cases += 1;
        if !ok {
            c.failures += 1;
            if c.witnesses.len() < WITNESS_LIMIT {
                c.witnesses.push(witness());
            }
        }
    }

    /// Registers a check with zero cases so that it shows up even when vacuous.
    pub fn declare(&mut self, name: &str) {
        if self.check(name).is_none() {
            self.checks.push(CheckOutcome {
                name: name.to_string(),
                cases: 0,
                failures: 0,
                witnesses: Vec::new(),
            });
        }
    }

    pub fn merge(&mut self, other: ValidationReport) {
        for c in other.checks {
            match self.checks.iter_mut().find(|d| d.name == c.name) {
                Some(d) => {
                    d.cases += c.cases;
                    d.failures += c.failures;
                    let room = WITNESS_LIMIT.saturating_sub(d.witnesses.len());
                    d.witnesses.extend(c.witnesses.into_iter().take(room));
                }
                None => self.checks.push(c),
            }
        }
    }

    /// Prefixes every check name, for nesting sub-reports.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        for c in &mut self.checks {
            c.name = format!("{prefix}{}", c.name);
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_counts_and_caps_witnesses() {
        let mut r = ValidationReport::new();
        for i in 0..40 {
            r.record("x", i % 2 == 0, || format!("{i}"));
        }
        let c = r.check("x").unwrap();
        assert_eq!(c.cases, 40);
        assert_eq!(c.failures, 20);
        assert_eq!(c.witnesses.len(), WITNESS_LIMIT);
        assert_eq!(c.witnesses[0], "1");
        assert!(!r.is_ok());
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = ValidationReport::new();
        a.record("x", true, String::new);
        let mut b = ValidationReport::new();
        b.record("x", false, || "w".into());
        b.record("y", true, String::new);
        a.merge(b);
        assert_eq!(a.check("x").unwrap().cases, 2);
        assert_eq!(a.check("x").unwrap().failures, 1);
        assert!(a.check("y").is_some());
    }
}
