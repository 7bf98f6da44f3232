//! Line-oriented run log. The first line is a JSON header
//! `{"header":{...}}`; every following line is one JSON event record with the
//! fields `t, kind, src, dst, port, payload` (hex) and optional `fire` and
//! `detail`.

use serde::Serialize;

pub const TRACE_FORMAT: &str = "wsan-trace/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceHeader {
    pub format: &'static str,
    pub tool_version: &'static str,
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub wiring: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub kind: &'static str,
    pub src: String,
    pub dst: String,
    pub port: String,
    pub payload: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fire: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

#[derive(Serialize)]
struct HeaderLine<'a> {
    header: &'a TraceHeader,
}

impl Trace {
    pub fn header_line(&self) -> String {
        serde_json::to_string(&HeaderLine { header: &self.header }).expect("header serializes")
    }

    /// Event lines only, without the header.
    pub fn body(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header_line();
        out.push('\n');
        out.push_str(&self.body());
        out
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a TraceRecord> + 'a {
        self.records.iter().filter(move |r| r.kind == kind)
    }
}
