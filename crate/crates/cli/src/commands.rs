//! Command dispatch. Each command reads its `[section]`, runs the library and writes a
//! CSV report whose first lines are the run header.

use std::fmt::Write as _;
use std::path::PathBuf;

use lzero::combination::{find_t0, monomial_test, nonzero_root, MonomialTest, T0Search};
use lzero::lfunc::{load_coeff_table, write_coeff_table, DirichletCharacter};
use lzero::ortho::{cross_and_diagonal, e_sum, sump_ratio, ProgressionQuery};
use lzero::series::{dirichlet_sum, euler_log_product, l_value, EvalPoint, Shifts};
use lzero::witness::{reevaluate, solve_tp, SolveParams, Strategy};
use lzero::zeros::{
    certify_zero, density_for_polynomial, locate_zero, scan_minima, Certification, CertifyParams, DensityParams, PlainCombination,
    ShiftedCombination, Target, ZeroCertificate,
};
use lzero::{Complex64, Error, Result};
use rand::Rng;

use crate::config::Config;
use crate::family::{load_family, Family};
use crate::output::{config_hash, stream, RunInfo, STREAM_ROOTS, STREAM_WITNESS};
use crate::selftest::run_selftest;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Eval,
    Ortho,
    Witness,
    Zeros,
    Density,
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Eval => "eval",
            Command::Ortho => "ortho",
            Command::Witness => "witness",
            Command::Zeros => "zeros",
            Command::Density => "density",
            Command::Selftest => "selftest",
        }
    }
}

/// Result of a command that ran to completion.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Done,
    /// Finished, but some result could not be certified.
    Inconclusive(String),
}

/// One command run: parsed config, where relative paths resolve, seed and output override.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub config: Config,
    pub base_dir: PathBuf,
    /// Overrides the config `seed` when set.
    pub seed: Option<u64>,
    /// Overrides the section `output` when set.
    pub output: Option<String>,
}

impl Invocation {
    pub fn seed(&self) -> Result<u64> {
        Ok(match self.seed {
            Some(s) => s,
            None => self.config.get_or("", "seed", 0u64)?,
        })
    }

    fn run_info(&self) -> Result<RunInfo> {
        Ok(RunInfo { command: self.command.name().into(), seed: self.seed()?, config_hash: config_hash(&self.config.text) })
    }

    fn output_path(&self) -> Option<String> {
        self.output.clone().or_else(|| self.config.entry(self.command.name(), "output").map(|e| self.resolve(&e.value)))
    }

    fn resolve(&self, path: &str) -> String {
        if path == "-" {
            return path.into();
        }
        self.base_dir.join(path).display().to_string()
    }
}

/// Errors where the computation declined because a quantitative condition failed, as
/// opposed to bad input or a broken invariant.
pub fn is_refusal(e: &Error) -> bool {
    matches!(
        e,
        Error::Scale { .. }
            | Error::Sensitivity { .. }
            | Error::Approximation { .. }
            | Error::NoPairing { .. }
            | Error::Coverage(_)
            | Error::Residual { .. }
            | Error::Budget { .. }
            | Error::KMembership { .. }
            | Error::Window { .. }
            | Error::NoT0 { .. }
            | Error::RootSearch { .. }
    )
}

/// 0 on success, 2 on refusal or inconclusive results, 1 on error.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::Inconclusive(_)) => 2,
        Err(e) if is_refusal(e) => 2,
        Err(_) => 1,
    }
}

pub fn run(inv: &Invocation) -> Result<Outcome> {
    let cfg = &inv.config;
    if let Some(n) = cfg.get::<usize>("", "threads")? {
        lzero::primes::set_default_threads(n);
    }
    if let Some(e) = cfg.entry("", "cache_dir") {
        lzero::lfunc::set_default_cache_dir(&inv.resolve(&e.value));
    }
    match inv.command {
        Command::Coeffs => coeffs(inv),
        Command::Eval => eval(inv),
        Command::Ortho => ortho(inv),
        Command::Witness => witness(inv),
        Command::Zeros => zeros(inv),
        Command::Density => density(inv),
        Command::Selftest => {
            let cases = cfg.get_or("selftest", "cases", 100usize)?;
            let report = run_selftest(inv.seed()?, cases);
            inv.run_info()?.emit(inv.output_path().as_deref(), &report.to_csv())?;
            for line in report.summary_lines() {
                eprintln!("{line}");
            }
            if report.all_passed() {
                Ok(Outcome::Done)
            } else {
                Err(Error::Invariant { index: 0, reason: format!("{} self-test suites failed", report.failures()) })
            }
        }
    }
}

fn coeffs(inv: &Invocation) -> Result<Outcome> {
    let cfg = &inv.config;
    let info = inv.run_info()?;
    if let Some(e) = cfg.entry("coeffs", "validate") {
        let path = inv.resolve(&e.value);
        let degree = cfg.get::<usize>("coeffs", "expect_degree")?;
        let conductor = cfg.get::<u64>("coeffs", "expect_conductor")?;
        let (spec, table) = load_coeff_table(std::path::Path::new(&path), degree, conductor)?;
        let body = format!("label,degree,conductor,M,status\n{},{},{},{},ok\n", spec.label, spec.degree, spec.conductor, table.len());
        info.emit(inv.output_path().as_deref(), &body)?;
        return Ok(Outcome::Done);
    }
    let m = cfg.get::<usize>("coeffs", "m")?;
    let family = load_family(cfg, &inv.base_dir, m)?;
    let lf = match cfg.entry("coeffs", "function") {
        Some(e) => family.select(Some(&e.value))?.remove(0),
        None => family.lfs.first().cloned().ok_or_else(|| Error::InvalidArgument("no L-functions configured".into()))?,
    };
    let table = match m {
        Some(m) if m < lf.table.len() => lf.table.truncated(m),
        _ => lf.table.clone(),
    };
    info.emit(inv.output_path().as_deref(), &write_coeff_table(&lf.spec, &table))?;
    Ok(Outcome::Done)
}

fn eval(inv: &Invocation) -> Result<Outcome> {
    let cfg = &inv.config;
    let m = cfg.get::<usize>("eval", "m")?;
    let pmax = cfg.get::<usize>("eval", "euler_pmax")?;
    let need = m.max(pmax);
    let family = load_family(cfg, &inv.base_dir, need)?;
    let names: Vec<String> = match cfg.entry("eval", "functions") {
        Some(e) => e.value.split_whitespace().map(String::from).collect(),
        None => family.names.clone(),
    };
    let lfs = family.select(cfg.entry("eval", "functions").map(|e| e.value.as_str()))?;
    let points = cfg.complex_list("eval", "points")?.unwrap_or_else(|| vec![(2.0, 0.0)]);
    let mut body = String::from("function,sigma,t,method,re,im,bound,tail\n");
    for (name, lf) in names.iter().zip(&lfs) {
        for &(sigma, t) in &points {
            let s = EvalPoint::new(sigma, t);
            match m {
                Some(m) => {
                    let (v, tb) = dirichlet_sum(lf, s, m)?;
                    let _ = writeln!(body, "{name},{sigma},{t},dirichlet,{:?},{:?},{:.6e},{}", v.re, v.im, tb.value, tb.method.tag());
                }
                None => {
                    let (v, err) = l_value(lf, s, &Shifts::none())?;
                    let tag = if lf.character_data().is_some() { "euler-maclaurin" } else { "integral" };
                    let _ = writeln!(body, "{name},{sigma},{t},l_value,{:?},{:?},{err:.6e},{tag}", v.re, v.im);
                }
            }
            if let Some(p) = pmax {
                let (log, tb) = euler_log_product(lf, s, 1, p as u64, &Shifts::none(), true)?;
                let v = log.exp();
                let err = v.norm() * tb.value.exp_m1();
                let _ = writeln!(body, "{name},{sigma},{t},euler,{:?},{:?},{err:.6e},{}", v.re, v.im, tb.method.tag());
            }
        }
    }
    inv.run_info()?.emit(inv.output_path().as_deref(), &body)?;
    Ok(Outcome::Done)
}

fn ortho(inv: &Invocation) -> Result<Outcome> {
    let cfg = &inv.config;
    let pmax: u64 = cfg.get_or("ortho", "pmax", lzero::ortho::DEFAULT_PMAX)?;
    let cross_x = cfg.get::<u64>("ortho", "cross_x")?;
    let e_x = cfg.get::<u64>("ortho", "e_x")?;
    let need = pmax.max(cross_x.unwrap_or(0)).max(e_x.unwrap_or(0)) as usize;
    let family = load_family(cfg, &inv.base_dir, Some(need))?;
    let selected = cfg.entry("ortho", "functions").map(|e| e.value.as_str());
    let names: Vec<String> = selected.map_or(family.names.clone(), |s| s.split_whitespace().map(String::from).collect());
    let lfs = family.select(selected)?;
    let re = cfg.list::<f64>("ortho", "u")?.unwrap_or_else(|| vec![1.0; lfs.len()]);
    let im = cfg.list::<f64>("ortho", "u_im")?.unwrap_or_else(|| vec![0.0; re.len()]);
    if im.len() != re.len() {
        return Err(Error::InvalidArgument("u and u_im differ in length".into()));
    }
    let mut u: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let norm = u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("u = 0".into()));
    }
    u.iter_mut().for_each(|v| *v /= norm);
    let qs = cfg.list::<u64>("ortho", "q")?.unwrap_or_else(|| vec![7]);
    let ys = cfg.list::<u64>("ortho", "y")?.unwrap_or_else(|| vec![1000]);
    let sigmas = cfg.list::<f64>("ortho", "sigma")?.unwrap_or_else(|| vec![1.02]);
    let a_all = cfg.str_or("ortho", "a", "1") == "all";
    let a_list = if a_all { Vec::new() } else { cfg.list::<u64>("ortho", "a")?.unwrap_or_else(|| vec![1]) };
    let mut body = format!("{}\n", lzero::ortho::OrthoReport::CSV_HEADER);
    for &q in &qs {
        let residues: Vec<u64> = if a_all { (1..=q).filter(|&a| lzero::arith::gcd(a % q, q) == 1).map(|a| a % q).collect() } else { a_list.clone() };
        for &a in &residues {
            for &y in &ys {
                for &sigma in &sigmas {
                    let query = ProgressionQuery { a, q, y, sigma, u: u.clone() };
                    body.push_str(&sump_ratio(&query, &lfs, pmax)?.csv_row());
                    body.push('\n');
                }
            }
        }
    }
    if let Some(x) = cross_x {
        for j in 0..lfs.len() {
            for k in j + 1..lfs.len() {
                let (c, d) = cross_and_diagonal(&lfs[j], &lfs[k], x)?;
                let (_, dk) = cross_and_diagonal(&lfs[k], &lfs[j], x)?;
                let _ = writeln!(body, "# cross[{},{}]({x}) = {:.12e} {:+.12e}i", names[j], names[k], c.re, c.im);
                let _ = writeln!(body, "# diagonal[{}]({x}) = {d:.12e}", names[j]);
                let _ = writeln!(body, "# diagonal[{}]({x}) = {dk:.12e}", names[k]);
                let _ = writeln!(body, "# cross_ratio[{},{}]({x}) = {:.6e}", names[j], names[k], c.norm() / d);
            }
        }
    }
    if let Some(x) = e_x {
        let chi = DirichletCharacter::new(1, 0)?;
        for j in 0..lfs.len() {
            for k in j..lfs.len() {
                let e = e_sum(&lfs[j], &lfs[k], &chi, x)?;
                let _ = writeln!(body, "# E[{},{}]({x}) = {:.12e} {:+.12e}i", names[j], names[k], e.re, e.im);
            }
        }
    }
    inv.run_info()?.emit(inv.output_path().as_deref(), &body)?;
    Ok(Outcome::Done)
}

fn witness(inv: &Invocation) -> Result<Outcome> {
    let cfg = &inv.config;
    let d = SolveParams::default();
    let strategy = match cfg.str_or("witness", "strategy", "direct") {
        "direct" => Strategy::Direct,
        "constructive" => Strategy::Constructive,
        other => {
            let line = cfg.entry("witness", "strategy").map_or(0, |e| e.line);
            return Err(Error::Parse { line, reason: format!("strategy must be direct or constructive, got {other:?}") });
        }
    };
    let params = SolveParams {
        sigma: cfg.get_or("witness", "sigma", d.sigma)?,
        y: cfg.get_or("witness", "y", d.y)?,
        pmax: cfg.get_or("witness", "pmax", d.pmax)?,
        strategy,
        window: cfg.get_or("witness", "window", d.window)?,
        tolerance: cfg.get_or("witness", "tolerance", d.tolerance)?,
        m: cfg.get_or("witness", "m", d.m)?,
        enforce_scale: cfg.get_or("witness", "enforce_scale", d.enforce_scale)?,
        delta: d.delta,
    };
    let family = load_family(cfg, &inv.base_dir, Some(params.pmax as usize))?;
    let lfs = family.select(cfg.entry("witness", "functions").map(|e| e.value.as_str()))?;
    let targets: Vec<Complex64> = match cfg.complex_list("witness", "targets")? {
        Some(list) => list.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
        None => {
            let radius: f64 = cfg.get_or("witness", "random_log_radius", 0.2)?;
            let mut rng = stream(inv.seed()?, STREAM_WITNESS);
            (0..lfs.len()).map(|_| random_log_disk(&mut rng, radius)).collect()
        }
    };
    let report = solve_tp(&lfs, &targets, params)?;
    let check = reevaluate(&lfs, params.sigma, report.y_eff, params.pmax, &report.shifts)?;
    let mut body = report.to_csv();
    for (j, (v, z)) in check.iter().zip(&report.targets).enumerate() {
        let _ = writeln!(body, "# reevaluated_residual_{} = {:.6e}", j + 1, (v - z).norm());
    }
    inv.run_info()?.emit(inv.output_path().as_deref(), &body)?;
    Ok(Outcome::Done)
}

/// `exp(w)` with `w` uniform in the disk `|w| <= radius`.
pub fn random_log_disk<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, theta).exp()
}

fn zeros(inv: &Invocation) -> Result<Outcome> {
    let cfg = &inv.config;
    let info = inv.run_info()?;
    let family = load_family(cfg, &inv.base_dir, None)?;
    let p = family.require_polynomial()?.clone();
    let mut body = format!("{}\n", ZeroCertificate::CSV_HEADER);
    if let MonomialTest::Monomial { .. } = monomial_test(&p)? {
        eprintln!("monomial: search skipped");
        info.emit(inv.output_path().as_deref(), &body)?;
        return Ok(Outcome::Done);
    }
    log_nonzero_root(&family, inv.seed()?)?;
    let shift: f64 = cfg.get_or("zeros", "shift", 0.0)?;
    let target: Box<dyn Target> = if shift == 0.0 {
        Box::new(PlainCombination { p, lfs: family.lfs.clone() })
    } else {
        Box::new(ShiftedCombination::new(p, family.lfs.clone(), shift, Shifts::constant(shift)))
    };
    let sigmas = cfg.list::<f64>("zeros", "sigma")?.unwrap_or_else(|| vec![1.05]);
    let t_min: f64 = cfg.get_or("zeros", "t_min", -50.0)?;
    let t_max: f64 = cfg.get_or("zeros", "t_max", 50.0)?;
    let step: f64 = cfg.get_or("zeros", "step", 0.02)?;
    let threshold: f64 = cfg.get_or("zeros", "threshold", 0.1)?;
    let radii = cfg.list::<f64>("zeros", "radii")?.unwrap_or_else(|| vec![0.01, 0.003, 0.001]);
    let mut found: Vec<Complex64> = Vec::new();
    for &sigma in &sigmas {
        for c in scan_minima(target.as_ref(), sigma, t_min, t_max, step, threshold)? {
            if let Some(z) = locate_zero(target.as_ref(), Complex64::new(c.sigma, c.t))? {
                if z.re > 1.0 && !found.iter().any(|k| (k - z).norm() < 1e-7) {
                    found.push(z);
                }
            }
        }
    }
    found.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    let mut refused = Vec::new();
    for &z in &found {
        match certify_zero(target.as_ref(), z, &radii, &found, CertifyParams::default())? {
            Certification::Certified(c) => {
                body.push_str(&c.csv_row());
                body.push('\n');
            }
            other => refused.push((z, other)),
        }
    }
    for (z, c) in &refused {
        let _ = writeln!(body, "# inconclusive {} {} {}", z.re, z.im, describe(c));
    }
    eprintln!("zeros: {} located, {} certified, {} inconclusive", found.len(), found.len() - refused.len(), refused.len());
    info.emit(inv.output_path().as_deref(), &body)?;
    if refused.is_empty() {
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::Inconclusive(format!("{} zeros not certified", refused.len())))
    }
}

fn describe(c: &Certification) -> String {
    match c {
        Certification::Certified(_) => "certified".into(),
        Certification::NoZero { gamma, errbound } => format!("no-zero gamma={gamma:.3e} errbound={errbound:.3e}"),
        Certification::Inconclusive { gamma, errbound, reason } => format!("{reason} gamma={gamma:.3e} errbound={errbound:.3e}"),
    }
}

/// Logs a nonzero root of the specialization at `1 + i t0`, the starting point of the
/// constructive existence argument.
fn log_nonzero_root(family: &Family, seed: u64) -> Result<()> {
    let p = family.require_polynomial()?;
    let t0 = find_t0(p, T0Search::default())?;
    let h = p.at(EvalPoint::new(1.0, t0));
    let mut rng = stream(seed, STREAM_ROOTS);
    let root = nonzero_root(&h, &mut rng)?;
    let coords: Vec<String> = root.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    eprintln!("non-monomial: t0 = {t0}, nonzero root ({})", coords.join(", "));
    Ok(())
}

fn density(inv: &Invocation) -> Result<Outcome> {
    let cfg = &inv.config;
    let info = inv.run_info()?;
    let family = load_family(cfg, &inv.base_dir, None)?;
    let p = family.require_polynomial()?;
    let d = DensityParams::default();
    let params = DensityParams {
        lines: cfg.get_or("density", "lines", d.lines)?,
        step: cfg.get_or("density", "step", d.step)?,
        threshold: cfg.get_or("density", "threshold", d.threshold)?,
        radii: cfg.list::<f64>("density", "radii")?.unwrap_or(d.radii),
        certify: d.certify,
    };
    let sigma1: f64 = cfg.get_or("density", "sigma1", 1.001)?;
    let sigma2: f64 = cfg.get_or("density", "sigma2", 1.1)?;
    let t: f64 = cfg.get_or("density", "t", 200.0)?;
    let report = density_for_polynomial(p, &family.lfs, sigma1, sigma2, t, &params)?;
    if let Some(reason) = &report.skipped {
        eprintln!("density: search skipped ({reason})");
    }
    eprintln!(
        "density: {} candidates, {} certified, {} inconclusive",
        report.candidates,
        report.certificates.len(),
        report.refused.len()
    );
    info.emit(inv.output_path().as_deref(), &report.to_csv())?;
    if let Some(e) = cfg.entry("density", "zeros_output") {
        info.emit(Some(&inv.resolve(&e.value)), &report.zeros_csv())?;
    }
    if report.refused.is_empty() {
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::Inconclusive(format!("{} zeros not certified", report.refused.len())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refusals_map_to_two() {
        assert_eq!(exit_code(&Ok(Outcome::Done)), 0);
        assert_eq!(exit_code(&Ok(Outcome::Inconclusive("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::Scale { required: 2.0, available: 1.0 })), 2);
        assert_eq!(exit_code(&Err(Error::Parse { line: 1, reason: "x".into() })), 1);
    }

    #[test]
    fn log_disk_targets_stay_in_range() {
        let mut rng = stream(5, STREAM_WITNESS);
        for _ in 0..1000 {
            assert!(random_log_disk(&mut rng, 0.2).ln().norm() <= 0.2 + 1e-12);
        }
    }

}
