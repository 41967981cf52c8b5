//! Structured command output.
//!
//! Text form: the header fields on one line as `key=value` pairs, then one
//! line per row. JSON form: one object with the header fields and a `rows`
//! array. Field order is insertion order in both.

use serde::ser::{Serialize, SerializeMap, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Str(String),
    Int(u64),
    Float(f64),
    Bool(bool),
    Indices(Vec<usize>),
}

impl Val {
    fn text(&self) -> String {
        match self {
            Val::Str(s) => s.clone(),
            Val::Int(i) => i.to_string(),
            Val::Float(v) => format!("{v:?}"),
            Val::Bool(b) => b.to_string(),
            Val::Indices(ix) => {
                let parts: Vec<String> = ix.iter().map(|i| i.to_string()).collect();
                format!("{{{}}}", parts.join(","))
            }
        }
    }
}

impl Serialize for Val {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Val::Str(v) => s.serialize_str(v),
            Val::Int(v) => s.serialize_u64(*v),
            Val::Float(v) if v.is_finite() => s.serialize_f64(*v),
            Val::Float(v) => s.serialize_str(&format!("{v:?}")),
            Val::Bool(v) => s.serialize_bool(*v),
            Val::Indices(v) => v.serialize(s),
        }
    }
}

impl From<&str> for Val {
    fn from(v: &str) -> Self {
        Val::Str(v.to_string())
    }
}

impl From<String> for Val {
    fn from(v: String) -> Self {
        Val::Str(v)
    }
}

impl From<f64> for Val {
    fn from(v: f64) -> Self {
        Val::Float(v)
    }
}

impl From<usize> for Val {
    fn from(v: usize) -> Self {
        Val::Int(v as u64)
    }
}

impl From<u64> for Val {
    fn from(v: u64) -> Self {
        Val::Int(v)
    }
}

impl From<bool> for Val {
    fn from(v: bool) -> Self {
        Val::Bool(v)
    }
}

pub fn yes_no(b: bool) -> Val {
    Val::Str(if b { "yes" } else { "no" }.to_string())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Vec<(&'static str, Val)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Val>) -> Self {
        self.0.push((key, value.into()));
        self
    }

    pub fn push(&mut self, key: &'static str, value: impl Into<Val>) {
        self.0.push((key, value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Val> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    fn text(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| format!("{k}={}", v.text()))
            .collect();
        parts.join(" ")
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub header: Record,
    pub rows: Vec<Record>,
}

impl Report {
    pub fn single(header: Record) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.header.0.is_empty() {
            out.push_str(&self.header.text());
            out.push('\n');
        }
        for row in &self.rows {
            out.push_str(&row.text());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let extra = usize::from(!self.rows.is_empty());
        let mut map = s.serialize_map(Some(self.header.0.len() + extra))?;
        for (k, v) in &self.header.0 {
            map.serialize_entry(k, v)?;
        }
        if !self.rows.is_empty() {
            map.serialize_entry("rows", &self.rows)?;
        }
        map.end()
    }
}
