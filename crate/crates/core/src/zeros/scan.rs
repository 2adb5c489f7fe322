use num_complex::Complex64;

use super::Target;
use crate::error::{Error, Result};
use crate::primes::threads;

/// A local minimum of `|F(sigma + it)|` along a vertical line.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub sigma: f64,
    pub t: f64,
    pub value: f64,
    pub err: f64,
}

/// `f` over `points`, split across the configured worker threads.
pub fn par_map<T: Send, F: Fn(f64) -> T + Sync>(points: &[f64], f: F) -> Vec<T> {
    let workers = threads().min(points.len().max(1));
    if workers <= 1 {
        return points.iter().map(|&x| f(x)).collect();
    }
    let chunk = points.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = points.chunks(chunk).map(|c| scope.spawn(|| c.iter().map(|&x| f(x)).collect::<Vec<T>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("scan worker panicked")).collect()
    })
}

fn golden_min<T: Target + ?Sized>(target: &T, sigma: f64, mut a: f64, mut b: f64) -> Result<(f64, f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |t: f64| target.eval(Complex64::new(sigma, t)).map(|(v, e)| (v.norm(), e));
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..40 {
        if fc.0 < fd.0 {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d)?;
        }
        if b - a < 1e-10 * (1.0 + a.abs()) {
            break;
        }
    }
    Ok(if fc.0 < fd.0 { (c, fc.0, fc.1) } else { (d, fd.0, fd.1) })
}

/// Smallest `sigma' >= sigma` (on the scale `1 + 2^k (sigma - 1)`) whose evaluation
/// error at height `t` falls below `threshold`.
fn sigma_floor_for<T: Target + ?Sized>(target: &T, sigma: f64, t: f64, threshold: f64) -> f64 {
    let mut s = sigma;
    for _ in 0..20 {
        s = 1.0 + 2.0 * (s - 1.0);
        if let Ok((_, e)) = target.eval(Complex64::new(s, t)) {
            if e < threshold {
                return s;
            }
        }
    }
    f64::INFINITY
}

/// Local minima of `|F(sigma + it)|` for `t` in `[t_lo, t_hi]` below `threshold`, refined
/// by golden-section search, deduplicated and sorted by value.
pub fn scan_minima<T: Target + ?Sized>(target: &T, sigma: f64, t_lo: f64, t_hi: f64, step: f64, threshold: f64) -> Result<Vec<Candidate>> {
    if sigma <= target.sigma_floor() {
        return Err(Error::Domain(format!("sigma = {sigma} not above {}", target.sigma_floor())));
    }
    if !(step > 0.0) || t_hi < t_lo {
        return Err(Error::InvalidArgument(format!("bad scan range [{t_lo}, {t_hi}] step {step}")));
    }
    if threshold <= 0.0 {
        return Ok(Vec::new());
    }
    let count = ((t_hi - t_lo) / step).ceil() as usize + 1;
    let ts: Vec<f64> = (0..count).map(|k| (t_lo + k as f64 * step).min(t_hi)).collect();
    let values = par_map(&ts, |t| target.eval(Complex64::new(sigma, t)));
    let values: Vec<(Complex64, f64)> = values.into_iter().collect::<Result<_>>()?;
    if let Some(k) = values.iter().position(|(_, e)| *e >= threshold) {
        return Err(Error::Sensitivity {
            error: values[k].1,
            threshold,
            sigma_floor: sigma_floor_for(target, sigma, ts[k], threshold),
        });
    }
    let abs: Vec<f64> = values.iter().map(|(v, _)| v.norm()).collect();
    let mut out: Vec<Candidate> = Vec::new();
    for k in 0..count {
        let left = if k == 0 { f64::INFINITY } else { abs[k - 1] };
        let right = if k + 1 == count { f64::INFINITY } else { abs[k + 1] };
        if !(abs[k] <= left && abs[k] <= right) {
            continue;
        }
        let a = ts[k.saturating_sub(1)];
        let b = ts[(k + 1).min(count - 1)];
        let (t, value, err) = if b > a { golden_min(target, sigma, a, b)? } else { (ts[k], abs[k], values[k].1) };
        let (t, value, err) = if value <= abs[k] { (t, value, err) } else { (ts[k], abs[k], values[k].1) };
        if value < threshold && !out.iter().any(|c| (c.t - t).abs() < step) {
            out.push(Candidate { sigma, t, value, err });
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Newton's method from `s0` with central-difference derivatives; `None` when it fails
/// to converge or leaves `Re(s) > floor`.
pub fn locate_zero<T: Target + ?Sized>(target: &T, s0: Complex64) -> Result<Option<Complex64>> {
    let mut s = s0;
    let floor = target.sigma_floor();
    for _ in 0..60 {
        let (f, _) = target.eval(s)?;
        let h = 1e-6 * (1.0 + s.norm()).min(10.0);
        let hp = Complex64::new(h, 0.0);
        let (fp, _) = target.eval(s + hp)?;
        let (fm, _) = target.eval(s - hp)?;
        let d = (fp - fm) / (2.0 * h);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return Ok(None);
        }
        let mut step = f / d;
        // keep each step short and inside the evaluable region
        if step.norm() > 0.1 {
            step *= 0.1 / step.norm();
        }
        let next = s - step;
        if next.re <= floor + 1e-12 {
            return Ok(None);
        }
        s = next;
        if step.norm() <= 1e-13 * (1.0 + s.norm()) {
            return Ok(Some(s));
        }
    }
    let (f, e) = target.eval(s)?;
    Ok((f.norm() <= 10.0 * e.max(1e-12)).then_some(s))
}
