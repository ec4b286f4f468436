//! Report persistence: a bundle of check reports with a config echo,
//! rendered as text or structured JSON.
//!
//! Serialized bytes are deterministic for a fixed config and input: map keys
//! are sorted and wall-clock timings never enter the rendered output (they
//! are kept in memory for stderr diagnostics only).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use clap::ValueEnum;
use serde::Serialize;

use osva_core::report::CheckReport;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Structured,
}

#[derive(Debug, Serialize)]
pub struct ReportBundle {
    pub tool: String,
    pub config: BTreeMap<String, String>,
    pub reports: Vec<CheckReport>,
    /// True exactly when every report passed (vacuously true when empty).
    pub overall_pass: bool,
    #[serde(skip)]
    pub wall_times: Vec<Duration>,
}

impl ReportBundle {
    pub fn collect(
        command: &str,
        mut config: BTreeMap<String, String>,
        checks: Vec<(CheckReport, Duration)>,
    ) -> Self {
        config.insert("command".to_string(), command.to_string());
        let mut reports = Vec::with_capacity(checks.len());
        let mut wall_times = Vec::with_capacity(checks.len());
        for (report, elapsed) in checks {
            reports.push(report);
            wall_times.push(elapsed);
        }
        let overall_pass = reports.iter().all(|r| r.passed);
        ReportBundle {
            tool: format!("osva {}", env!("CARGO_PKG_VERSION")),
            config,
            reports,
            overall_pass,
            wall_times,
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Structured => {
                let mut text =
                    serde_json::to_string_pretty(self).expect("report serialization");
                text.push('\n');
                text
            }
            ReportFormat::Text => {
                let mut out = String::new();
                out.push_str(&format!("tool: {}\n", self.tool));
                out.push_str("config:\n");
                for (key, value) in &self.config {
                    out.push_str(&format!("  {key} = {value}\n"));
                }
                for report in &self.reports {
                    out.push_str(&format!(
                        "check {}: {} residual={} tolerance={}\n",
                        report.name,
                        if report.passed { "PASS" } else { "FAIL" },
                        report.residual,
                        report.tolerance,
                    ));
                    for witness in report.witnesses.iter().take(5) {
                        out.push_str(&format!(
                            "  witness: {} | expected {} | got {}\n",
                            witness.input, witness.expected, witness.got
                        ));
                    }
                    if report.witnesses.len() > 5 {
                        out.push_str(&format!(
                            "  ... and {} more witnesses\n",
                            report.witnesses.len() - 5
                        ));
                    }
                }
                out.push_str(&format!(
                    "overall: {}\n",
                    if self.overall_pass { "PASS" } else { "FAIL" }
                ));
                out
            }
        }
    }

    /// Write the rendered report to `--output`, else to a file under
    /// `$OSVA_OUT_DIR` when set, else to stdout.
    pub fn emit(&self, format: ReportFormat, output: &Option<PathBuf>) -> Result<(), CliError> {
        let text = self.render(format);
        let destination = output.clone().or_else(|| {
            std::env::var_os("OSVA_OUT_DIR").map(|dir| {
                let command = self
                    .config
                    .get("command")
                    .map(String::as_str)
                    .unwrap_or("report");
                let ext = match format {
                    ReportFormat::Text => "txt",
                    ReportFormat::Structured => "json",
                };
                PathBuf::from(dir).join(format!("{command}-report.{ext}"))
            })
        });
        match destination {
            Some(path) => crate::write_file(&path, &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
