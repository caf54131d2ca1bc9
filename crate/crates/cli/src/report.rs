use serde::Serialize;
use serde_json::Value;

use singfol::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PROPERTY_FALSE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    pub status: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Value,
    pub results: Value,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Report {
            command: command.to_string(),
            version: VERSION,
            status: "ok",
            exit_code: exit::OK,
            seed: None,
            inputs,
            results: Value::Null,
            diagnostics: Vec::new(),
        }
    }

    pub fn property_false(&mut self, why: impl Into<String>) {
        self.status = "property_false";
        self.exit_code = exit::PROPERTY_FALSE;
        self.diagnostics.push(why.into());
    }

    pub fn fail(&mut self, code: i32, why: impl Into<String>) {
        self.status = "error";
        self.exit_code = code;
        self.results = Value::Null;
        self.diagnostics.push(why.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Exit code for a library error.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Budget(_) | Error::BlowUp { .. } => exit::NUMERICAL,
        _ => exit::USAGE,
    }
}
