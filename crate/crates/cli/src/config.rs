//! Line-oriented experiment configuration: `key = value` pairs under `[section]`
//! headers (section names are letters, digits and `_`), full-line comments starting
//! with `#` or `;`. Lines of the `[polynomial]` section are polynomial terms, kept
//! verbatim.

use std::collections::BTreeMap;
use std::str::FromStr;

use lzero::{Error, Result};

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["seed", "threads", "cache_dir"]),
    ("lfunctions", &[]),
    ("hurwitz", &["a", "q", "m"]),
    ("polynomial", &[]),
    ("coeffs", &["function", "m", "output", "validate", "expect_degree", "expect_conductor"]),
    ("eval", &["functions", "points", "m", "euler_pmax", "output"]),
    ("ortho", &["functions", "q", "a", "y", "sigma", "pmax", "u", "u_im", "cross_x", "e_x", "output"]),
    (
        "witness",
        &["functions", "sigma", "y", "pmax", "strategy", "window", "m", "tolerance", "enforce_scale", "targets", "random_log_radius", "output"],
    ),
    ("zeros", &["sigma", "t_min", "t_max", "step", "threshold", "radii", "shift", "output"]),
    ("density", &["sigma1", "sigma2", "t", "lines", "step", "threshold", "radii", "output", "zeros_output"]),
    ("selftest", &["cases", "output"]),
];

#[derive(Clone, Debug)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Section {
    /// Entries in file order.
    pub entries: Vec<(String, Entry)>,
    pub line: usize,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    pub sections: BTreeMap<String, Section>,
    /// `[polynomial]` lines with their line numbers.
    pub polynomial: Vec<(usize, String)>,
    pub text: String,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config { text: text.to_string(), ..Config::default() };
        cfg.sections.insert(String::new(), Section::default());
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            let header = trimmed.strip_prefix('[').and_then(|r| r.strip_suffix(']')).map(str::trim);
            let is_header = header.is_some_and(|h| !h.is_empty() && h.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
            if let (Some(name), true) = (header, is_header) {
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(parse_err(line, format!("unknown section [{name}]")));
                }
                if cfg.sections.contains_key(name) {
                    return Err(parse_err(line, format!("duplicate section [{name}]")));
                }
                cfg.sections.insert(name.to_string(), Section { entries: Vec::new(), line });
                current = name.to_string();
                continue;
            }
            if current == "polynomial" {
                cfg.polynomial.push((line, trimmed.to_string()));
                continue;
            }
            if trimmed.starts_with('[') {
                return Err(parse_err(line, format!("malformed section header {trimmed:?}")));
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| parse_err(line, format!("expected `key = value`, got {trimmed:?}")))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') {
                return Err(parse_err(line, format!("bad key {key:?}")));
            }
            let allowed = SECTIONS.iter().find(|(s, _)| *s == current).map(|(_, k)| *k).unwrap_or(&[]);
            if current != "lfunctions" && !allowed.contains(&key) {
                let name = if current.is_empty() { "top level".to_string() } else { format!("[{current}]") };
                return Err(parse_err(line, format!("unknown key {key:?} in {name}")));
            }
            let section = cfg.sections.get_mut(&current).expect("section exists");
            if section.get(key).is_some() {
                return Err(parse_err(line, format!("duplicate key {key:?}")));
            }
            section.entries.push((key.to_string(), Entry { value: value.to_string(), line }));
        }
        Ok(cfg)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn has(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn str_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.entry(section, key).map(|e| e.value.as_str()).unwrap_or(default)
    }

    /// Parses `key` (numbers may use `1e7` notation for integers).
    pub fn get<T: ParseValue>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => T::parse_value(&e.value).map(Some).map_err(|r| parse_err(e.line, format!("{key}: {r}"))),
        }
    }

    pub fn get_or<T: ParseValue>(&self, section: &str, key: &str, default: T) -> Result<T> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    /// Whitespace-separated list.
    pub fn list<T: ParseValue>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split_whitespace()
                .map(|tok| T::parse_value(tok).map_err(|r| parse_err(e.line, format!("{key}: {r}"))))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// `re im; re im; ...` pairs.
    pub fn complex_list(&self, section: &str, key: &str) -> Result<Option<Vec<(f64, f64)>>> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        let mut out = Vec::new();
        for part in e.value.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let toks: Vec<&str> = part.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(parse_err(e.line, format!("{key}: expected `re im`, got {part:?}")));
            }
            let re = f64::parse_value(toks[0]).map_err(|r| parse_err(e.line, format!("{key}: {r}")))?;
            let im = f64::parse_value(toks[1]).map_err(|r| parse_err(e.line, format!("{key}: {r}")))?;
            out.push((re, im));
        }
        Ok(Some(out))
    }
}

pub trait ParseValue: Sized {
    fn parse_value(s: &str) -> std::result::Result<Self, String>;
}

impl ParseValue for f64 {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        let v = f64::from_str(s).map_err(|_| format!("expected a number, got {s:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("expected a finite number, got {s:?}"))
        }
    }
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = u64::from_str(s) {
        return Ok(v);
    }
    let v = f64::from_str(s).map_err(|_| format!("expected a nonnegative integer, got {s:?}"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(format!("expected a nonnegative integer, got {s:?}"))
    }
}

impl ParseValue for u64 {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        parse_count(s)
    }
}

impl ParseValue for usize {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        parse_count(s).map(|v| v as usize)
    }
}

impl ParseValue for bool {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        match s {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(format!("expected true or false, got {s:?}")),
        }
    }
}

impl ParseValue for String {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        Ok(s.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_values() {
        let cfg = Config::parse("seed = 7\n# note\n[ortho]\nq = 7\npmax = 1e7\nu = 1 1\n[polynomial]\n[(1,1,0)] 1 0\n").unwrap();
        assert_eq!(cfg.get::<u64>("", "seed").unwrap(), Some(7));
        assert_eq!(cfg.get::<u64>("ortho", "pmax").unwrap(), Some(10_000_000));
        assert_eq!(cfg.list::<f64>("ortho", "u").unwrap(), Some(vec![1.0, 1.0]));
        assert_eq!(cfg.polynomial, vec![(8, "[(1,1,0)] 1 0".to_string())]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line = |text: &str| match Config::parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("seed = 1\n[nope]\n"), 2);
        assert_eq!(line("[ortho]\nq = 7\nq = 8\n"), 3);
        assert_eq!(line("[ortho]\n\nbogus = 1\n"), 3);
        assert_eq!(line("[ortho]\nq 7\n"), 2);
        let cfg = Config::parse("[ortho]\nq = x\n").unwrap();
        assert!(matches!(cfg.get::<u64>("ortho", "q"), Err(Error::Parse { line: 2, .. })));
    }
}
