use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Kv,
}

/// Ordered report lines. Text mode prints `label: value` (or a bare line),
/// kv mode prints `key=value` and skips bare lines.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<Line>,
}

#[derive(Debug)]
enum Line {
    Field {
        key: String,
        label: String,
        value: String,
    },
    Text(String),
}

impl Report {
    pub fn field(&mut self, key: &str, label: &str, value: impl ToString) -> &mut Self {
        self.lines.push(Line::Field {
            key: key.into(),
            label: label.into(),
            value: value.to_string(),
        });
        self
    }

    pub fn text(&mut self, line: impl Into<String>) -> &mut Self {
        self.lines.push(Line::Text(line.into()));
        self
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for line in &self.lines {
            match (line, format) {
                (Line::Field { label, value, .. }, Format::Text) => {
                    // multi-line values start on their own line
                    let sep = if value.starts_with('\n') { "" } else { " " };
                    writeln!(out, "{label}:{sep}{value}").unwrap();
                }
                (Line::Field { key, value, .. }, Format::Kv) => {
                    writeln!(out, "{key}={value}").unwrap();
                }
                (Line::Text(t), Format::Text) => writeln!(out, "{t}").unwrap(),
                (Line::Text(_), Format::Kv) => {}
            }
        }
        out
    }
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
