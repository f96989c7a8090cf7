//! Output plumbing: every subcommand prints a short human summary, a `---`
//! separator, and a pretty JSON report, so the same invocation always
//! produces byte-identical output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use proxima_core::TraceEntry;

pub const REPORT_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report<'a> {
    pub report_version: u32,
    pub tool: ToolInfo,
    pub command: &'a str,
    pub problem: &'a str,
    pub options: Value,
    pub outcome: Value,
}

#[derive(Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl<'a> Report<'a> {
    pub fn new(command: &'a str, problem: &'a str, options: Value, outcome: Value) -> Self {
        Report {
            report_version: REPORT_VERSION,
            tool: ToolInfo {
                name: env!("CARGO_BIN_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            command,
            problem,
            options,
            outcome,
        }
    }

    pub fn print(&self, human: &str) {
        let body = format!(
            "{}\n---\n{}\n",
            human.trim_end(),
            serde_json::to_string_pretty(self).expect("reports are plain data")
        );
        let mut out = std::io::stdout().lock();
        if let Err(e) = out.write_all(body.as_bytes()).and_then(|()| out.flush()) {
            // A closed pipe downstream is not our failure.
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            eprintln!("error: cannot write report: {e}");
            std::process::exit(2);
        }
    }
}

/// Write a solver trace as CSV: `n,side,x_1,...,x_dim,gap`, one row per
/// iterate, numbers in shortest round-trip form.
pub fn write_trace_csv(path: &Path, trace: &[TraceEntry]) -> std::io::Result<()> {
    let dim = trace.first().map_or(0, |row| row.point.coords().len());
    let mut out = String::from("n,side");
    for i in 1..=dim {
        out.push_str(&format!(",x_{i}"));
    }
    out.push_str(",gap\n");
    for row in trace {
        out.push_str(&format!("{},{}", row.n, row.side));
        for c in row.point.coords() {
            out.push_str(&format!(",{c}"));
        }
        out.push_str(&format!(",{}\n", row.gap));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())
}
