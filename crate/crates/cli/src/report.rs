//! Machine-readable run reports. Reports carry the echoed config, the
//! seeds, and one entry per stage, and contain no timestamps, so a rerun
//! with the same inputs is byte-identical.

use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::Path;

#[derive(Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub budget: usize,
    pub pass: bool,
    pub stages: Vec<Stage>,
    pub config: Value,
}

#[derive(Serialize)]
pub struct Stage {
    pub name: String,
    pub pass: bool,
    pub data: Value,
}

impl RunReport {
    pub fn new(command: impl Into<String>, seed: u64, budget: usize, config: Value) -> Self {
        RunReport {
            tool: "homopt",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed,
            budget,
            pass: true,
            stages: Vec::new(),
            config,
        }
    }

    pub fn stage(&mut self, name: impl Into<String>, pass: bool, data: Value) {
        self.pass &= pass;
        self.stages.push(Stage {
            name: name.into(),
            pass,
            data,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Write via a temp file and rename, so readers never see a torn file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
