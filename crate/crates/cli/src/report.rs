use std::fmt::Display;

/// Plain-text report: one `KEY=VALUE` line per quantity, plus free-form
/// lines for people.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key}={value}"));
        self
    }

    /// Floats keep every digit (shortest round-trip form); magnitudes below
    /// `1e-4` switch to exponent notation.
    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, float(value))
    }

    pub fn line(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(text.into());
        self
    }

    pub fn print(&self) {
        for line in &self.lines {
            println!("{line}");
        }
    }
}

pub fn float(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Four decimals without trailing zeros: `0.6667`, `-0.25`, `1`.
pub fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
