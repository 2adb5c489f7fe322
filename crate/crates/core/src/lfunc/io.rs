//! Coefficient file format.
//!
//! ```text
//! # degree=2 conductor=1 M=5 label=newform_k12
//! 1 1 0
//! 2 -0.5303300858899106 0
//! ...
//! root 2 -0.26516504294495535 0.9642028... -0.26516504294495535 -0.9642028...
//! ```
//!
//! The header comes first; `m re im` lines follow in ascending `m` covering `1..=M`.
//! Optional `root <p> <re> <im> ...` lines carry explicit Euler factor roots (no pairs
//! means a trivial local factor). Blank lines and further `#` lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{CoefficientTable, LFunctionSpec, LKind, RAMANUJAN_SLACK};
use crate::arith::{gcd, is_prime};
use crate::error::{Error, Result};

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse { line, reason: format!("not a number: {tok:?}") })
}

struct Header {
    degree: usize,
    conductor: u64,
    len: usize,
    label: String,
}

fn parse_header(text: &str, line: usize) -> Result<Header> {
    let body = text.trim_start_matches('#').trim();
    let (mut degree, mut conductor, mut len, mut label) = (None, None, None, None);
    let mut rest = body;
    while !rest.is_empty() {
        let (key, after) = rest
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, reason: "expected key=value in header".into() })?;
        let key = key.trim();
        if key == "label" {
            label = Some(after.trim().to_string());
            break;
        }
        let (value, next) = after.split_once(char::is_whitespace).unwrap_or((after, ""));
        let bad = |_| Error::Parse { line, reason: format!("bad header value for {key}: {value:?}") };
        match key {
            "degree" => degree = Some(value.parse::<usize>().map_err(bad)?),
            "conductor" => conductor = Some(value.parse::<u64>().map_err(bad)?),
            "M" => len = Some(value.parse::<usize>().map_err(bad)?),
            _ => return Err(Error::Parse { line, reason: format!("unknown header key {key:?}") }),
        }
        rest = next.trim_start();
    }
    let missing = |k: &str| Error::Parse { line, reason: format!("header lacks {k}") };
    Ok(Header {
        degree: degree.ok_or_else(|| missing("degree"))?,
        conductor: conductor.ok_or_else(|| missing("conductor"))?,
        len: len.ok_or_else(|| missing("M"))?,
        label: label.unwrap_or_default(),
    })
}

/// Parses and validates a coefficient file body.
pub fn parse_coeff_table(
    text: &str,
    source: &str,
    expected_degree: Option<usize>,
    expected_conductor: Option<u64>,
) -> Result<(LFunctionSpec, CoefficientTable)> {
    let mut header = None;
    let mut values: Vec<Complex64> = Vec::new();
    let mut roots: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            // other comment lines (provenance) are skipped
            if header.is_none() && trimmed.contains("degree=") {
                header = Some(parse_header(trimmed, line)?);
            }
            continue;
        }
        if header.is_none() {
            return Err(Error::Parse { line, reason: "missing header line".into() });
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks[0] == "root" {
            if toks.len() < 2 || toks.len() % 2 != 0 {
                return Err(Error::Parse { line, reason: "root line needs p and re/im pairs".into() });
            }
            let p = toks[1]
                .parse::<u64>()
                .map_err(|_| Error::Parse { line, reason: format!("bad prime {:?}", toks[1]) })?;
            let mut r = Vec::new();
            for pair in toks[2..].chunks(2) {
                r.push(Complex64::new(parse_f64(pair[0], line)?, parse_f64(pair[1], line)?));
            }
            roots.insert(p, r);
            continue;
        }
        if toks.len() != 3 {
            return Err(Error::Parse { line, reason: "expected `m re im`".into() });
        }
        let m = toks[0]
            .parse::<usize>()
            .map_err(|_| Error::Parse { line, reason: format!("bad index {:?}", toks[0]) })?;
        if m != values.len() + 1 {
            return Err(Error::Parse { line, reason: format!("expected m = {}, found {m}", values.len() + 1) });
        }
        values.push(Complex64::new(parse_f64(toks[1], line)?, parse_f64(toks[2], line)?));
    }
    let header = header.ok_or(Error::Parse { line: 1, reason: "missing header line".into() })?;
    if values.len() != header.len {
        return Err(Error::Parse {
            line: text.lines().count(),
            reason: format!("header says M={} but {} coefficients present", header.len, values.len()),
        });
    }
    if header.degree == 0 || header.conductor == 0 {
        return Err(Error::InvalidArgument("degree and conductor must be >= 1".into()));
    }
    if let Some(d) = expected_degree {
        if d != header.degree {
            return Err(Error::InvalidArgument(format!("expected degree {d}, file has {}", header.degree)));
        }
    }
    if let Some(c) = expected_conductor {
        if c != header.conductor {
            return Err(Error::InvalidArgument(format!("expected conductor {c}, file has {}", header.conductor)));
        }
    }
    validate(&values, &roots, header.degree, header.conductor)?;
    let spec = LFunctionSpec {
        kind: LKind::External { source: source.to_string() },
        degree: header.degree,
        conductor: header.conductor,
        label: header.label,
    };
    Ok((spec, CoefficientTable::dense(values).with_roots(roots)))
}

fn validate(values: &[Complex64], roots: &BTreeMap<u64, Vec<Complex64>>, degree: usize, conductor: u64) -> Result<()> {
    let len = values.len();
    if len == 0 {
        return Err(Error::InvalidArgument("empty coefficient table".into()));
    }
    if (values[0] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::Normalization(format!("{}", values[0])));
    }
    for (i, v) in values.iter().enumerate() {
        let m = (i + 1) as u64;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Invariant { index: m, reason: "non-finite coefficient".into() });
        }
        if is_prime(m) && v.norm() > degree as f64 + RAMANUJAN_SLACK {
            return Err(Error::Ramanujan { p: m, value: v.norm(), degree });
        }
    }
    let root = (len as f64).sqrt() as usize;
    for a in 2..=root {
        for b in (a + 1)..=root {
            if gcd(a as u64, b as u64) != 1 || a * b > len {
                continue;
            }
            let prod = values[a - 1] * values[b - 1];
            if (values[a * b - 1] - prod).norm() > 1e-9 * prod.norm().max(1.0) {
                return Err(Error::Invariant { index: (a * b) as u64, reason: format!("lambda({a}) lambda({b}) mismatch") });
            }
        }
    }
    for (&p, r) in roots {
        if !is_prime(p) || p as usize > len {
            return Err(Error::Invariant { index: p, reason: "root line for a non-prime or p > M".into() });
        }
        if r.len() > degree {
            return Err(Error::Invariant { index: p, reason: "more roots than the degree".into() });
        }
        let sum: Complex64 = r.iter().sum();
        if (sum - values[p as usize - 1]).norm() > 1e-9 {
            return Err(Error::Invariant { index: p, reason: "roots do not sum to lambda(p)".into() });
        }
        for a in r {
            if a.norm() > 1.0 + 1e-12 || (conductor % p != 0 && (a.norm() - 1.0).abs() > 1e-9) {
                return Err(Error::Invariant { index: p, reason: format!("root modulus {}", a.norm()) });
            }
        }
    }
    Ok(())
}

/// Reads and validates a coefficient file.
pub fn load_coeff_table(
    path: &Path,
    expected_degree: Option<usize>,
    expected_conductor: Option<u64>,
) -> Result<(LFunctionSpec, CoefficientTable)> {
    let text = std::fs::read_to_string(path)?;
    parse_coeff_table(&text, &path.display().to_string(), expected_degree, expected_conductor)
}

/// Renders a table in the coefficient file format. Values use the shortest decimal
/// representation that round-trips, so reloading is bitwise exact.
pub fn write_coeff_table(spec: &LFunctionSpec, table: &CoefficientTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# degree={} conductor={} M={} label={}",
        spec.degree,
        spec.conductor,
        table.len(),
        spec.label
    );
    for (i, v) in table.dense_prefix(table.len()).iter().enumerate() {
        let _ = writeln!(out, "{} {:?} {:?}", i + 1, v.re, v.im);
    }
    for (p, r) in table.explicit_roots() {
        let _ = write!(out, "root {p}");
        for a in r {
            let _ = write!(out, " {:?} {:?}", a.re, a.im);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::newform_coeffs;

    #[test]
    fn single_coefficient_table() {
        let (spec, t) = parse_coeff_table("# degree=1 conductor=1 M=1 label=one\n1 1 0\n", "mem", None, None).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(spec.label, "one");
        assert_eq!(t.get(1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_bad_normalization() {
        let err = parse_coeff_table("# degree=1 conductor=1 M=1 label=x\n1 2 0\n", "mem", None, None).unwrap_err();
        assert!(matches!(err, Error::Normalization(_)));
        assert!(err.to_string().contains("normalization"));
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_coeff_table("# degree=1 conductor=1 M=2 label=x\n1 1 0\n2 abc 0\n", "mem", None, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn reports_offending_index() {
        // lambda(6) != lambda(2) lambda(3)
        let mut text = String::from("# degree=1 conductor=1 M=9 label=x\n");
        for m in 1..=9 {
            let v = if m == 6 { 0.5 } else { 1.0 };
            text += &format!("{m} {v} 0\n");
        }
        let err = parse_coeff_table(&text, "mem", None, None).unwrap_err();
        assert!(matches!(err, Error::Invariant { index: 6, .. }), "{err}");
    }

    #[test]
    fn weight12_round_trip_is_bitwise() {
        let spec = LFunctionSpec::newform(12).unwrap();
        let table = newform_coeffs(12, 500).unwrap();
        let text = write_coeff_table(&spec, &table);
        let (back_spec, back) = parse_coeff_table(&text, "mem", Some(2), Some(1)).unwrap();
        assert_eq!(back_spec.label, spec.label);
        for m in 1..=500u64 {
            assert_eq!(back.get(m).re.to_bits(), table.get(m).re.to_bits());
            assert_eq!(back.get(m).im.to_bits(), table.get(m).im.to_bits());
        }
        // degree 2, conductor 1: roots inferred from lambda(p)
        let f = crate::lfunc::euler_factor(&back_spec, &back, 2).unwrap();
        assert_eq!(f.roots.len(), 2);
    }

    #[test]
    fn explicit_roots_are_used() {
        let text = "# degree=2 conductor=3 M=3 label=ext\n1 1 0\n2 0 0\n3 0.5 0\nroot 2 0 1 0 -1\nroot 3 0.5 0\n";
        let (spec, t) = parse_coeff_table(text, "mem", None, None).unwrap();
        let f = crate::lfunc::euler_factor(&spec, &t, 3).unwrap();
        assert_eq!(f.roots, vec![Complex64::new(0.5, 0.0)]);
        let text2 = write_coeff_table(&spec, &t);
        assert!(text2.contains("root 3 0.5 0.0"));
        // p = 3 divides the conductor, so a non-unit root is allowed; at p = 2 it is not
        let bad = "# degree=2 conductor=3 M=2 label=ext\n1 1 0\n2 0.5 0\nroot 2 0.5 0\n";
        assert!(parse_coeff_table(bad, "mem", None, None).is_err());
    }
}
