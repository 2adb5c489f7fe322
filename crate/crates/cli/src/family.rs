//! L-function families and combination polynomials from a config.
//!
//! `[lfunctions]` entries are `name = <kind> <args> [M=<len>]` with kinds
//! `newform <weight>`, `character <modulus> <index>` and `file <path>`; file order fixes
//! the variable order of the polynomial. `[hurwitz]` with `a` and `q` instead builds the
//! characters modulo `q` and the linear form for `sum_{n = a mod q} n^{-s}`.

use std::path::Path;

use lzero::combination::CombinationPolynomial;
use lzero::lfunc::{load_coeff_table, LFunction, DEFAULT_M_DEGREE1, DEFAULT_M_DEGREE2};
use lzero::zeros::hurwitz_combination;
use lzero::{Error, Result};

use crate::config::{Config, ParseValue};

#[derive(Clone, Debug)]
pub struct Family {
    pub names: Vec<String>,
    pub lfs: Vec<LFunction>,
    pub polynomial: Option<CombinationPolynomial>,
}

impl Family {
    /// Members named in a whitespace-separated list, or all of them.
    pub fn select(&self, names: Option<&str>) -> Result<Vec<LFunction>> {
        match names {
            None => Ok(self.lfs.clone()),
            Some(list) => list
                .split_whitespace()
                .map(|n| {
                    self.names
                        .iter()
                        .position(|m| m == n)
                        .map(|k| self.lfs[k].clone())
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown L-function {n:?}")))
                })
                .collect(),
        }
    }

    pub fn require_polynomial(&self) -> Result<&CombinationPolynomial> {
        let p = self
            .polynomial
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("config has no [polynomial] or [hurwitz] section".into()))?;
        if p.n() != self.lfs.len() {
            return Err(Error::InvalidArgument(format!("polynomial has {} variables for {} L-functions", p.n(), self.lfs.len())));
        }
        Ok(p)
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

/// Builds the family; tables cover at least `need` (or the per-degree default) unless an
/// entry fixes `M=`.
pub fn load_family(cfg: &Config, base_dir: &Path, need: Option<usize>) -> Result<Family> {
    let default_len = |degree: usize| {
        let d = if degree == 1 { DEFAULT_M_DEGREE1 } else { DEFAULT_M_DEGREE2 };
        need.map_or(d, |n| n.max(d))
    };
    if let Some(h) = cfg.section("hurwitz") {
        if let Some(other) = cfg.section("lfunctions").or(cfg.section("polynomial")) {
            return Err(parse_err(other.line.max(h.line), "[hurwitz] excludes [lfunctions] and [polynomial]"));
        }
        let a: u64 = cfg.get("hurwitz", "a")?.ok_or_else(|| parse_err(h.line, "[hurwitz] needs a"))?;
        let q: u64 = cfg.get("hurwitz", "q")?.ok_or_else(|| parse_err(h.line, "[hurwitz] needs q"))?;
        let len: usize = cfg.get_or("hurwitz", "m", default_len(1))?;
        let comb = hurwitz_combination(a, q, len)?;
        return Ok(Family {
            names: comb.lfs.iter().map(|lf| lf.spec.label.clone()).collect(),
            lfs: comb.lfs,
            polynomial: Some(comb.p),
        });
    }
    let mut names = Vec::new();
    let mut lfs = Vec::new();
    if let Some(section) = cfg.section("lfunctions") {
        for (name, entry) in &section.entries {
            let mut toks: Vec<&str> = entry.value.split_whitespace().collect();
            let mut len = None;
            if let Some(last) = toks.last().and_then(|t| t.strip_prefix("M=")) {
                len = Some(usize::parse_value(last).map_err(|r| parse_err(entry.line, r))?);
                toks.pop();
            }
            let num = |k: usize| -> Result<u64> {
                let tok = toks.get(k).ok_or_else(|| parse_err(entry.line, format!("{name}: missing argument")))?;
                u64::parse_value(tok).map_err(|r| parse_err(entry.line, format!("{name}: {r}")))
            };
            let arity = |k: usize| {
                if toks.len() == k {
                    Ok(())
                } else {
                    Err(parse_err(entry.line, format!("{name}: expected {} arguments after {:?}", k - 1, toks[0])))
                }
            };
            let lf = match toks.first().copied() {
                Some("newform") => {
                    arity(2)?;
                    LFunction::newform(num(1)? as u32, len.unwrap_or_else(|| default_len(2)))?
                }
                Some("character") => {
                    arity(3)?;
                    LFunction::character(num(1)?, num(2)?, len.unwrap_or_else(|| default_len(1)))?
                }
                Some("file") => {
                    arity(2)?;
                    let path = base_dir.join(toks[1]);
                    if !path.exists() {
                        return Err(parse_err(entry.line, format!("{name}: coefficient file {} not found", path.display())));
                    }
                    let (spec, table) = load_coeff_table(&path, None, None)?;
                    let table = match len {
                        Some(m) if m < table.len() => table.truncated(m),
                        _ => table,
                    };
                    LFunction { spec, table }
                }
                _ => return Err(parse_err(entry.line, format!("{name}: expected newform, character or file"))),
            };
            names.push(name.clone());
            lfs.push(lf);
        }
    }
    let polynomial = if cfg.polynomial.is_empty() {
        if let Some(s) = cfg.section("polynomial") {
            return Err(parse_err(s.line, "empty [polynomial] section"));
        }
        None
    } else {
        // rebuild the block with its original line numbering
        let first = cfg.polynomial[0].0;
        let mut text = String::new();
        let mut line = first;
        for (l, body) in &cfg.polynomial {
            while line < *l {
                text.push('\n');
                line += 1;
            }
            text.push_str(body);
            text.push('\n');
            line += 1;
        }
        Some(CombinationPolynomial::parse_at(&text, first)?)
    };
    Ok(Family { names, lfs, polynomial })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_and_polynomial() {
        let text = "[lfunctions]\nzeta = character 1 0 M=100\nf = newform 12 M=200\n[polynomial]\n# two terms\n[(1,1,0)] 1 0\n[(2,-1,0)] 0 1\n";
        let cfg = Config::parse(text).unwrap();
        let fam = load_family(&cfg, Path::new("."), None).unwrap();
        assert_eq!(fam.names, vec!["zeta", "f"]);
        assert_eq!(fam.lfs[1].table.len(), 200);
        assert_eq!(fam.require_polynomial().unwrap().len(), 2);
        assert_eq!(fam.select(Some("f")).unwrap()[0].spec.label, "newform_k12");
    }

    #[test]
    fn polynomial_errors_keep_config_lines() {
        let cfg = Config::parse("[lfunctions]\nzeta = character 1 0\n[polynomial]\n[(1,1,0)] 1\n\n[(1,1,0) 1\n").unwrap();
        assert!(matches!(load_family(&cfg, Path::new("."), None), Err(Error::Parse { line: 6, .. })));
        let cfg = Config::parse("[lfunctions]\nzeta = sphere 1\n").unwrap();
        assert!(matches!(load_family(&cfg, Path::new("."), None), Err(Error::Parse { line: 2, .. })));
        let cfg = Config::parse("[lfunctions]\nzeta = file nowhere.txt\n").unwrap();
        assert!(matches!(load_family(&cfg, Path::new("."), None), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn hurwitz_section() {
        let cfg = Config::parse("[hurwitz]\na = 1\nq = 5\nm = 100\n").unwrap();
        let fam = load_family(&cfg, Path::new("."), None).unwrap();
        assert_eq!(fam.lfs.len(), 4);
        assert_eq!(fam.require_polynomial().unwrap().n(), 4);
    }
}
