//! Deterministic JSON and CSV emission.
//!
//! Reports must be byte-identical for identical configs, so floats are
//! printed with a fixed 17-significant-digit scientific format and keys are
//! written in a fixed order by construction.

use sha2::{Digest, Sha256};

/// A float formatted to 17 significant digits; round-trips any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "null".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "1e999" } else { "-1e999" }.to_string();
    }
    format!("{:.16e}", x)
}

/// Hash of the resolved configuration, hex, 16 characters.
pub fn config_hash(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Minimal ordered JSON writer. Keys appear exactly in insertion order and
/// numbers go through `fmt_f64`, which keeps reports reproducible.
pub struct JsonDoc {
    out: String,
    need_comma: Vec<bool>,
}

impl JsonDoc {
    pub fn new() -> Self {
        Self {
            out: String::new(),
            need_comma: Vec::new(),
        }
    }

    fn pre_value(&mut self) {
        if let Some(flag) = self.need_comma.last_mut() {
            if *flag {
                self.out.push(',');
            }
            *flag = true;
        }
    }

    pub fn begin_object(&mut self) {
        self.pre_value();
        self.out.push('{');
        self.need_comma.push(false);
    }

    pub fn end_object(&mut self) {
        self.out.push('}');
        self.need_comma.pop();
    }

    pub fn begin_array(&mut self) {
        self.pre_value();
        self.out.push('[');
        self.need_comma.push(false);
    }

    pub fn end_array(&mut self) {
        self.out.push(']');
        self.need_comma.pop();
    }

    pub fn key(&mut self, name: &str) {
        if let Some(flag) = self.need_comma.last_mut() {
            if *flag {
                self.out.push(',');
            }
            *flag = false; // the value after the key must not add a comma
        }
        self.out.push('"');
        self.out.push_str(name);
        self.out.push_str("\":");
    }

    pub fn string(&mut self, value: &str) {
        self.pre_value();
        self.out.push('"');
        for c in value.chars() {
            match c {
                '"' => self.out.push_str("\\\""),
                '\\' => self.out.push_str("\\\\"),
                '\n' => self.out.push_str("\\n"),
                c if (c as u32) < 0x20 => {
                    self.out.push_str(&format!("\\u{:04x}", c as u32));
                }
                c => self.out.push(c),
            }
        }
        self.out.push('"');
    }

    pub fn number(&mut self, value: f64) {
        self.pre_value();
        self.out.push_str(&fmt_f64(value));
    }

    /// Same as `number`; reads better when emitting bare array elements.
    pub fn plain_number(&mut self, value: f64) {
        self.number(value);
    }

    pub fn integer(&mut self, value: i64) {
        self.pre_value();
        self.out.push_str(&value.to_string());
    }

    pub fn boolean(&mut self, value: bool) {
        self.pre_value();
        self.out.push_str(if value { "true" } else { "false" });
    }

    pub fn finish(mut self) -> String {
        self.out.push('\n');
        self.out
    }
}

impl Default for JsonDoc {
    fn default() -> Self {
        Self::new()
    }
}

/// Fixed-format CSV writer; one header, rows of formatted cells.
pub struct CsvDoc {
    out: String,
}

impl CsvDoc {
    pub fn new(header: &[&str]) -> Self {
        Self {
            out: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[
            std::f64::consts::PI,
            -1.0 / 3.0,
            1e-300,
            6.02214076e23,
            0.0,
            -0.5,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s} did not round-trip");
        }
    }

    #[test]
    fn json_doc_is_valid_and_ordered() {
        let mut doc = JsonDoc::new();
        doc.begin_object();
        doc.key("b");
        doc.integer(2);
        doc.key("a");
        doc.begin_array();
        doc.number(1.5);
        doc.number(2.5);
        doc.end_array();
        doc.key("s");
        doc.string("x\"y");
        doc.end_object();
        let text = doc.finish();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["b"], 2);
        assert_eq!(v["a"][1], 2.5);
        assert_eq!(v["s"], "x\"y");
        // key order is preserved verbatim in the emitted text
        assert!(text.find("\"b\"").unwrap() < text.find("\"a\"").unwrap());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let h1 = config_hash(&["x", "y"]);
        let h2 = config_hash(&["x", "y"]);
        let h3 = config_hash(&["x", "z"]);
        assert_eq!(h1, h2);
        assert_ne!(h1, h3);
        assert_eq!(h1.len(), 16);
    }
}
