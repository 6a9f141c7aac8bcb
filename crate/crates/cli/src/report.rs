use std::collections::BTreeMap;
use std::time::Instant;

use groupoidal::report::{CheckOutcome, ValidationReport};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    PropertyFailure,
    InputError,
    CapExceeded,
    NumericFailure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::PropertyFailure => 1,
            Status::InputError => 2,
            Status::CapExceeded => 3,
            Status::NumericFailure => 4,
        }
    }
}

/// A failure that stops a command before its checks complete.
#[derive(Debug)]
pub struct Abort {
    pub status: Status,
    pub message: String,
}

impl Abort {
    pub fn input(message: impl ToString) -> Self {
        Self { status: Status::InputError, message: message.to_string() }
    }

    pub fn cap(message: impl ToString) -> Self {
        Self { status: Status::CapExceeded, message: message.to_string() }
    }

    pub fn numeric(message: impl ToString) -> Self {
        Self { status: Status::NumericFailure, message: message.to_string() }
    }

    pub fn property(message: impl ToString) -> Self {
        Self { status: Status::PropertyFailure, message: message.to_string() }
    }
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub source: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(source: &str, bytes: &[u8]) -> Self {
        let hash = Sha256::digest(bytes);
        Self {
            source: source.to_string(),
            sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<CheckOutcome>,
    pub data: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            status: Status::Pass,
            inputs: Vec::new(),
            seed,
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            data: BTreeMap::new(),
            error: None,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn add_checks(&mut self, prefix: &str, r: ValidationReport) {
        for mut c in r.checks {
            if !prefix.is_empty() {
                c.name = format!("{prefix}.{}", c.name);
            }
            self.checks.push(c);
        }
    }

    pub fn check(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> String) {
        let mut r = ValidationReport::new();
        r.record(name, ok, witness);
        self.add_checks("", r);
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        self.data.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings_ms.insert(phase.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn finish(&mut self, outcome: Result<(), Abort>) {
        match outcome {
            Ok(()) => {
                if self.checks.iter().any(|c| !c.passed()) {
                    self.status = Status::PropertyFailure;
                }
            }
            Err(a) => {
                self.status = a.status;
                self.error = Some(a.message);
            }
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, self.status_word());
        if let Some(e) = &self.error {
            out += &format!("  error: {e}\n");
        }
        for c in &self.checks {
            if c.passed() {
                out += &format!("  ok    {} ({} cases)\n", c.name, c.cases);
            } else {
                out += &format!("  FAIL  {} ({} of {} cases)\n", c.name, c.failures, c.cases);
                for w in &c.witnesses {
                    out += &format!("        {w}\n");
                }
            }
        }
        for (k, v) in &self.data {
            out += &format!("  {k}: {v}\n");
        }
        out
    }

    fn status_word(&self) -> &'static str {
        match self.status {
            Status::Pass => "pass",
            Status::PropertyFailure => "property failure",
            Status::InputError => "input error",
            Status::CapExceeded => "cap exceeded",
            Status::NumericFailure => "numeric failure",
        }
    }
}
