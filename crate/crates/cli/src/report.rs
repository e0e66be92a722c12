use serde::Serialize;

/// One JSON line per run. Every key is always present; fields that do not
/// apply to a command are `null`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub algorithm: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub domain: Option<String>,
    pub seed: Option<u64>,
    pub parameters: Parameters,
    pub result: serde_json::Value,
    pub wall_time_ms: f64,
    pub decision_calls: Option<usize>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Parameters {
    /// Block size actually used, or `"auto"` when chosen internally.
    pub s: Option<String>,
    pub kernel: Option<String>,
    pub strategy: Option<String>,
    pub mode: Option<String>,
    pub delta: Option<f64>,
    pub strict: Option<bool>,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            algorithm: None,
            n: None,
            d: None,
            domain: None,
            seed: None,
            parameters: Parameters::default(),
            result: serde_json::Value::Null,
            wall_time_ms: 0.0,
            decision_calls: None,
            iterations: None,
        }
    }

    pub fn emit(&self) {
        println!(
            "{}",
            serde_json::to_string(self).expect("report serializes")
        );
    }
}
