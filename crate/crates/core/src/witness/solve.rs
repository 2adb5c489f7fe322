use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::matrix::{build_tuple, BuildParams, CVector, TwistAssignment};
use super::partition::{choose_q_partition, PrimePartition};
use super::torus::TorusParam;
use crate::error::{Error, Result};
use crate::lfunc::LFunction;
use crate::ortho::s_tail;
use crate::primes::{for_each_prime, prime_tail_bound};
use crate::series::euler_tail_bound;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Least squares on the shifts of a window of primes just above `y`.
    Direct,
    /// Twists and torus parametrization from a prime partition, closed by a fixed point.
    Constructive,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::Constructive => "constructive",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveParams {
    pub sigma: f64,
    pub y: u64,
    pub pmax: u64,
    pub strategy: Strategy,
    /// Number of primes above `y` whose shifts the direct solver moves.
    pub window: usize,
    /// Accepted `max_j |prod_p L_p - z_j|` over `y < p <= pmax`.
    pub tolerance: f64,
    /// Matrix count for the constructive strategy.
    pub m: usize,
    /// Refuse the constructive strategy when `mu < C + R'`.
    pub enforce_scale: bool,
    pub delta: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            sigma: 1.1,
            y: 10,
            pmax: 1_000_000,
            strategy: Strategy::Direct,
            window: 200,
            tolerance: 1e-6,
            m: 1,
            enforce_scale: true,
            delta: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub strategy: Strategy,
    pub sigma: f64,
    pub y: u64,
    /// Start of the twisted range (`t_p = 0` on `(y, y_eff]`).
    pub y_eff: u64,
    pub pmax: u64,
    pub shifts: BTreeMap<u64, f64>,
    pub twists: TwistAssignment,
    pub partition: Option<PrimePartition>,
    pub targets: Vec<Complex64>,
    /// `|prod_{y<p<=pmax} L_p(sigma + i t_p) - z_j|`, re-evaluated from the local roots.
    pub residuals: Vec<f64>,
    /// Bound on `|prod_{p>y} L_p - prod_{y<p<=pmax} L_p|` for any shifts.
    pub tails: Vec<f64>,
    /// Bound `C` on the nonlinear part `|E_j|` of the log-product.
    pub e_bound: f64,
    pub mu: f64,
    pub r_prime: f64,
    pub iterations: usize,
}

impl WitnessReport {
    pub const CSV_HEADER: &'static str = "p,t_p,eps_re,eps_im,class_i,class_k";

    /// Per-prime rows, then a commented summary block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (&p, &t) in &self.shifts {
            let eps = self.twists.get(p);
            let (ci, ck) = self.partition.as_ref().and_then(|part| part.class_of(p)).filter(|_| p > self.y_eff).unwrap_or((0, 0));
            out.push_str(&format!("{p},{t:.17e},{:.17e},{:.17e},{ci},{ck}\n", eps.re, eps.im));
        }
        out.push_str(&format!("# strategy = {}\n", self.strategy.name()));
        out.push_str(&format!("# sigma = {}\n# y = {}\n# y_eff = {}\n# pmax = {}\n", self.sigma, self.y, self.y_eff, self.pmax));
        for (j, ((z, r), t)) in self.targets.iter().zip(&self.residuals).zip(&self.tails).enumerate() {
            out.push_str(&format!("# target_{} = {:.17e} {:+.17e}i\n", j + 1, z.re, z.im));
            out.push_str(&format!("# residual_{} = {r:.6e}\n# tail_{} = {t:.6e}\n", j + 1, j + 1));
        }
        out.push_str(&format!("# mu = {:.6e}\n# C = {:.6e}\n# R' = {:.6e}\n", self.mu, self.e_bound, self.r_prime));
        out.push_str(&format!("# iterations = {}\n", self.iterations));
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

struct PrimeData {
    p: u64,
    logp: f64,
    /// Local roots per L-function.
    roots: Vec<Vec<Complex64>>,
}

/// `log L_p(s) = -sum_l log(1 - alpha_l p^{-s})` and its `t`-derivative.
fn local(pd: &PrimeData, j: usize, sigma: f64, t: f64) -> (Complex64, Complex64) {
    let ps = (-(Complex64::new(sigma, t)) * pd.logp).exp();
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &a in &pd.roots[j] {
        let x = a * ps;
        v -= (1.0 - x).ln();
        // d/dt = i d/ds, d/ds log(1 - x) = x log p / (1 - x)
        d -= I * x * pd.logp / (1.0 - x);
    }
    (v, d)
}

/// `prod_p prod_l (1 - alpha_l p^{-s_p})^{-1}` by direct multiplication.
fn twisted_product(data: &[PrimeData], j: usize, sigma: f64, shifts: &BTreeMap<u64, f64>) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for pd in data {
        let t = shifts.get(&pd.p).copied().unwrap_or(0.0);
        let ps = Complex64::from_polar((pd.p as f64).powf(-sigma), -t * pd.logp);
        for &a in &pd.roots[j] {
            prod /= 1.0 - a * ps;
        }
    }
    prod
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Local data of every prime in `(y, pmax]` for a family of L-functions.
pub struct WitnessSetup<'a> {
    lfs: &'a [LFunction],
    data: Vec<PrimeData>,
    params: SolveParams,
}

impl<'a> WitnessSetup<'a> {
    pub fn new(lfs: &'a [LFunction], params: SolveParams) -> Result<Self> {
        if !(params.sigma > 1.0) {
            return Err(Error::Domain(format!("sigma = {} must exceed 1", params.sigma)));
        }
        if lfs.is_empty() {
            return Err(Error::InvalidArgument("no L-functions".into()));
        }
        for lf in lfs {
            if params.pmax as usize > lf.table.len() && !lf.table.is_periodic() {
                return Err(Error::Precondition(format!("{} covers {} < pmax = {}", lf.spec.label, lf.table.len(), params.pmax)));
            }
        }
        let mut data = Vec::new();
        let mut err = None;
        for_each_prime(params.y, params.pmax, |p| {
            let roots: Result<Vec<Vec<Complex64>>> = lfs.iter().map(|lf| lf.euler_factor(p).map(|f| f.roots)).collect();
            match roots {
                Ok(roots) => data.push(PrimeData { p, logp: (p as f64).ln(), roots }),
                Err(e) => err = err.take().or(Some(e)),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(WitnessSetup { lfs, data, params })
    }

    fn n(&self) -> usize {
        self.lfs.len()
    }

    fn r_max(&self) -> f64 {
        self.lfs.iter().map(|lf| lf.degree()).max().unwrap_or(0) as f64
    }

    /// `C >= |E_j|`: `r sum_{p > y0} p^{-2 sigma} / (1 - p^{-sigma})`, with the primes past
    /// `pmax` covered by the prime tail bound.
    fn e_bound(&self, y0: u64) -> f64 {
        let sigma = self.params.sigma;
        let head: f64 = self.data.iter().filter(|pd| pd.p > y0).map(|pd| (pd.p as f64).powf(-2.0 * sigma) / (1.0 - (pd.p as f64).powf(-sigma))).sum();
        let pmax = self.params.pmax as f64;
        let tail = prime_tail_bound(pmax, 2.0 * sigma) / (1.0 - (pmax + 1.0).powf(-sigma));
        self.r_max() * (head + tail)
    }

    fn untwisted(&self, j: usize, lo: u64, hi: u64) -> Complex64 {
        self.data.iter().filter(|pd| pd.p > lo && pd.p <= hi).map(|pd| local(pd, j, self.params.sigma, 0.0).0).sum()
    }

    fn check_targets(&self, targets: &[Complex64]) -> Result<()> {
        if targets.len() != self.n() {
            return Err(Error::InvalidArgument(format!("{} targets for {} L-functions", targets.len(), self.n())));
        }
        if targets.iter().any(|z| z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("targets must be finite and nonzero".into()));
        }
        Ok(())
    }

    fn finish(&self, targets: &[Complex64], shifts: BTreeMap<u64, f64>, y_eff: u64, extra: Extra) -> WitnessReport {
        let p = &self.params;
        let residuals: Vec<f64> = (0..self.n()).map(|j| (twisted_product(&self.data, j, p.sigma, &shifts) - targets[j]).norm()).collect();
        let tails: Vec<f64> = self
            .lfs
            .iter()
            .zip(targets)
            .map(|(lf, z)| {
                let bound = euler_tail_bound(p.pmax as f64, p.sigma, lf.degree());
                z.norm() * bound.exp_m1()
            })
            .collect();
        WitnessReport {
            strategy: p.strategy,
            sigma: p.sigma,
            y: p.y,
            y_eff,
            pmax: p.pmax,
            shifts,
            twists: extra.twists,
            partition: extra.partition,
            targets: targets.to_vec(),
            residuals,
            tails,
            e_bound: self.e_bound(y_eff),
            mu: extra.mu,
            r_prime: extra.r_prime,
            iterations: extra.iterations,
        }
    }

    pub fn solve(&self, targets: &[Complex64]) -> Result<WitnessReport> {
        self.check_targets(targets)?;
        match self.params.strategy {
            Strategy::Direct => self.solve_direct(targets),
            Strategy::Constructive => self.solve_constructive(targets),
        }
    }

    fn scale_quantities(&self, y_eff: u64, m: usize, targets: &[Complex64]) -> Result<(f64, f64)> {
        let (s, _) = s_tail(y_eff, self.params.sigma, self.params.pmax)?;
        let mu = s / (m * self.n()) as f64;
        let big_r = targets.iter().map(|z| z.norm().max(1.0 / z.norm())).fold(1.0, f64::max);
        Ok((mu, (PI * PI + big_r.ln().powi(2)).sqrt()))
    }

    fn solve_direct(&self, targets: &[Complex64]) -> Result<WitnessReport> {
        let (n, sigma) = (self.n(), self.params.sigma);
        let window: Vec<&PrimeData> = self.data.iter().take(self.params.window).collect();
        let w = window.len();
        if w == 0 {
            return Err(Error::Precondition(format!("no primes in ({}, {}]", self.params.y, self.params.pmax)));
        }
        let edge = window[w - 1].p;
        let rest: Vec<Complex64> = (0..n).map(|j| self.untwisted(j, edge, self.params.pmax)).collect();
        let logs: Vec<Complex64> = targets.iter().map(|z| z.ln()).collect();
        let eval = |t: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
            let mut f = DVector::zeros(2 * n);
            let mut jac = DMatrix::zeros(2 * n, w);
            for j in 0..n {
                let mut v = rest[j] - logs[j];
                for (col, pd) in window.iter().enumerate() {
                    let (l, d) = local(pd, j, sigma, t[col]);
                    v += l;
                    jac[(2 * j, col)] = d.re;
                    jac[(2 * j + 1, col)] = d.im;
                }
                f[2 * j] = v.re;
                // the product only sees the log modulo 2 pi i
                f[2 * j + 1] = wrap(v.im);
            }
            (f, jac)
        };
        let lm = |mut t: Vec<f64>| -> (Vec<f64>, f64, usize) {
            let (mut f, mut jac) = eval(&t);
            let mut lambda = 1e-6;
            let mut iterations = 0;
            while f.norm() > 1e-14 && iterations < 500 {
                iterations += 1;
                let jjt = &jac * jac.transpose();
                let mut accepted = false;
                for _ in 0..40 {
                    let sys = &jjt + DMatrix::<f64>::identity(2 * n, 2 * n) * (lambda * (1.0 + jjt.diagonal().max()));
                    let Some(y) = sys.lu().solve(&f) else {
                        lambda *= 10.0;
                        continue;
                    };
                    let step = jac.transpose() * y;
                    let trial: Vec<f64> = t.iter().zip(step.iter()).map(|(a, b)| a - b).collect();
                    let (ft, jt) = eval(&trial);
                    if ft.norm() < f.norm() {
                        t = trial;
                        f = ft;
                        jac = jt;
                        lambda = (lambda / 5.0).max(1e-16);
                        accepted = true;
                        break;
                    }
                    lambda *= 4.0;
                }
                if !accepted {
                    break;
                }
            }
            (t, f.norm(), iterations)
        };
        // t = 0 is stationary for real coefficients (the modulus has zero first
        // derivative there), so stalled runs restart from deterministic phase kicks
        let golden = 0.618_033_988_749_895;
        let (mut t, mut fnorm, mut iterations) = lm(vec![0.0; w]);
        for attempt in 1..=8 {
            if fnorm <= 1e-12 {
                break;
            }
            let amp = PI * attempt as f64 / 8.0;
            let seed: Vec<f64> = window
                .iter()
                .enumerate()
                .map(|(k, pd)| amp * (2.0 * ((k + 1) as f64 * golden * attempt as f64).fract() - 1.0) / pd.logp)
                .collect();
            let (t2, f2, it2) = lm(seed);
            iterations += it2;
            if f2 < fnorm {
                t = t2;
                fnorm = f2;
            }
        }
        let shifts: BTreeMap<u64, f64> = window.iter().zip(&t).map(|(pd, &tp)| (pd.p, tp)).collect();
        let (mu, r_prime) = self.scale_quantities(self.params.y, self.params.m, targets)?;
        let report = self.finish(targets, shifts, self.params.y, Extra { mu, r_prime, iterations, ..Extra::default() });
        let worst = report.max_residual();
        if !(worst <= self.params.tolerance) {
            return Err(Error::Residual { residual: worst, tolerance: self.params.tolerance });
        }
        Ok(report)
    }

    fn solve_constructive(&self, targets: &[Complex64]) -> Result<WitnessReport> {
        let (n, sigma, m) = (self.n(), self.params.sigma, self.params.m);
        let conductors: Vec<u64> = self.lfs.iter().map(|lf| lf.spec.conductor).collect();
        let probe = choose_q_partition(self.params.y, m, n, &conductors);
        // below q the partition misses primes: fix t_p = 0 on (y, q] and absorb that
        // stretch of the product into the targets
        let y_eff = self.params.y.max(probe.q);
        let partition = choose_q_partition(y_eff, m, n, &conductors);
        let scaled: Vec<Complex64> = (0..n).map(|j| targets[j] / self.untwisted(j, self.params.y, y_eff).exp()).collect();
        let (mu, r_prime) = self.scale_quantities(y_eff, m, &scaled)?;
        let c = self.e_bound(y_eff);
        if self.params.enforce_scale && mu < c + r_prime {
            return Err(Error::Scale { required: c + r_prime, available: mu });
        }
        let build = BuildParams { sigma, pmax: self.params.pmax, delta: self.params.delta };
        let (tuple, twists) = build_tuple(self.lfs, &partition, build)?;
        let param = TorusParam::build(&tuple)?;
        let classed: Vec<(&PrimeData, usize, usize)> =
            self.data.iter().filter_map(|pd| partition.class_of(pd.p).filter(|_| pd.p > y_eff).map(|(i, k)| (pd, i - 1, k - 1))).collect();

        let shifts_for = |z: &CVector| -> Result<Vec<f64>> {
            if let Some(v) = z.iter().find(|v| v.norm() > mu * (1.0 + 1e-12)) {
                return Err(Error::Coverage(format!("fixed-point iterate {v} left the disk of radius mu = {mu}")));
            }
            let f = param.eval(&(z / Complex64::new(mu, 0.0)))?;
            // principal lift of p^{-i t_p} = eps_p f_i(z / mu)_k
            Ok(classed.iter().map(|(pd, i, k)| -(twists.get(pd.p) * f[*i][*k]).arg() / pd.logp).collect())
        };
        let nonlinear = |t: &[f64]| -> CVector {
            CVector::from_fn(n, |j, _| {
                classed
                    .iter()
                    .zip(t)
                    .map(|((pd, _, _), &tp)| {
                        let lam: Complex64 = pd.roots[j].iter().sum();
                        local(pd, j, sigma, tp).0 - lam * Complex64::from_polar((pd.p as f64).powf(-sigma), -tp * pd.logp)
                    })
                    .sum::<Complex64>()
            })
        };
        let w = CVector::from_iterator(n, scaled.iter().map(|z| z.ln()));
        let mut z = w.clone();
        let mut t = shifts_for(&z)?;
        let mut iterations = 0;
        loop {
            iterations += 1;
            let next = &w - nonlinear(&t);
            let moved = (&next - &z).norm();
            z = next;
            t = shifts_for(&z)?;
            if moved <= 1e-14 * (1.0 + w.norm()) || iterations >= 200 {
                break;
            }
        }
        let mut shifts: BTreeMap<u64, f64> = self.data.iter().filter(|pd| pd.p <= y_eff).map(|pd| (pd.p, 0.0)).collect();
        shifts.extend(classed.iter().zip(&t).map(|((pd, _, _), &tp)| (pd.p, tp)));
        let report = self.finish(targets, shifts, y_eff, Extra { twists, partition: Some(partition), mu, r_prime, iterations });
        let worst = report.max_residual();
        if !(worst <= self.params.tolerance) {
            return Err(Error::Residual { residual: worst, tolerance: self.params.tolerance });
        }
        Ok(report)
    }
}

#[derive(Default)]
struct Extra {
    twists: TwistAssignment,
    partition: Option<PrimePartition>,
    mu: f64,
    r_prime: f64,
    iterations: usize,
}

/// Shifts `t_p` with `prod_{y<p<=pmax} L_j(sigma + i t_p)_p = z_j` for every `j`.
pub fn solve_tp(lfs: &[LFunction], targets: &[Complex64], params: SolveParams) -> Result<WitnessReport> {
    WitnessSetup::new(lfs, params)?.solve(targets)
}

/// `prod_{y<p<=pmax} L_p(sigma + i t_p)` for each L-function, by direct multiplication
/// of the local factors.
pub fn reevaluate(lfs: &[LFunction], sigma: f64, y: u64, pmax: u64, shifts: &BTreeMap<u64, f64>) -> Result<Vec<Complex64>> {
    let params = SolveParams { sigma, y, pmax, ..SolveParams::default() };
    let setup = WitnessSetup::new(lfs, params)?;
    Ok((0..lfs.len()).map(|j| twisted_product(&setup.data, j, sigma, shifts)).collect())
}
