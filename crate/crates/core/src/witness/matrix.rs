use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::partition::PrimePartition;
use crate::error::{Error, Result};
use crate::lfunc::LFunction;
use crate::ortho::s_tail;
use crate::primes::{for_each_prime, prime_tail_bound};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Unit-modulus twists `eps_p`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwistAssignment {
    pub eps: BTreeMap<u64, Complex64>,
}

impl TwistAssignment {
    pub fn get(&self, p: u64) -> Complex64 {
        self.eps.get(&p).copied().unwrap_or(Complex64::new(1.0, 0.0))
    }

    pub fn extend(&mut self, other: TwistAssignment) {
        self.eps.extend(other.eps);
    }
}

/// `r = sqrt(r_1^2 + ... + r_n^2)` for Euler degrees `r_j`.
pub fn degree_norm(lfs: &[LFunction]) -> f64 {
    lfs.iter().map(|lf| (lf.degree() * lf.degree()) as f64).sum::<f64>().sqrt()
}

/// Slack of the two conditions `||g|| <= 2n` and `|det g| >= (2r)^{-n}`; both must be
/// nonnegative for `g` to lie in `K`.
pub fn k_slack(g: &CMatrix, r: f64) -> (f64, f64) {
    let n = g.nrows() as f64;
    (2.0 * n - g.norm(), g.determinant().norm() - (2.0 * r).powf(-n))
}

fn check_k(g: &CMatrix, r: f64) -> Result<()> {
    let (norm_slack, det_slack) = k_slack(g, r);
    if norm_slack < 0.0 {
        return Err(Error::KMembership { reason: format!("||g|| = {} > 2n", g.norm()), slack: norm_slack });
    }
    if det_slack < 0.0 {
        return Err(Error::KMembership { reason: format!("|det g| = {} < (2r)^-n", g.determinant().norm()), slack: det_slack });
    }
    Ok(())
}

/// Matrices `g_1..g_m` in `K`, with cached norms and determinants.
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    pub gs: Vec<CMatrix>,
    pub norms: Vec<f64>,
    pub dets: Vec<Complex64>,
    pub r: f64,
}

impl MatrixTuple {
    pub fn new(gs: Vec<CMatrix>, r: f64) -> Result<Self> {
        let n = gs.first().map(|g| g.nrows()).ok_or_else(|| Error::InvalidArgument("empty matrix tuple".into()))?;
        for g in &gs {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::InvalidArgument("matrices of mixed shape".into()));
            }
            check_k(g, r)?;
        }
        let norms = gs.iter().map(|g| g.norm()).collect();
        let dets = gs.iter().map(|g| g.determinant()).collect();
        Ok(MatrixTuple { gs, norms, dets, r })
    }

    pub fn m(&self) -> usize {
        self.gs.len()
    }

    pub fn n(&self) -> usize {
        self.gs[0].nrows()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildParams {
    pub sigma: f64,
    pub pmax: u64,
    /// Admissible range `1 < sigma <= 1 + delta / log y`.
    pub delta: f64,
}

/// One matrix `g_i` with its twists and diagnostics.
#[derive(Clone, Debug)]
pub struct BuiltMatrix {
    pub g: CMatrix,
    pub twists: TwistAssignment,
    /// `|v_k - proj_{<k} v_k|` per column.
    pub projections: Vec<f64>,
    /// Per-entry bound on the effect of truncating at `pmax`.
    pub slack: f64,
}

fn column_direction(previous: &[CVector], n: usize) -> CVector {
    // orthonormalize the earlier columns, then complete with the first standard vector
    // that keeps a nonnegligible component
    let mut basis: Vec<CVector> = Vec::new();
    for v in previous {
        let mut w = v.clone();
        for b in &basis {
            let c = b.dotc(&w);
            w -= b * c;
        }
        let norm = w.norm();
        if norm > 1e-12 {
            basis.push(w / Complex64::new(norm, 0.0));
        }
    }
    for j in 0..n {
        let mut w = CVector::zeros(n);
        w[j] = Complex64::new(1.0, 0.0);
        for b in &basis {
            let c = b.dotc(&w);
            w -= b * c;
        }
        let norm = w.norm();
        if norm > 1e-6 {
            return w / Complex64::new(norm, 0.0);
        }
    }
    unreachable!("fewer than n previous columns leave a complement")
}

fn projection_residual(previous: &[CVector], v: &CVector) -> f64 {
    if previous.is_empty() {
        return v.norm();
    }
    let a = CMatrix::from_columns(previous);
    let svd = a.clone().svd(true, true);
    let coeffs = svd.solve(v, 1e-14).expect("svd with vectors");
    (v - a * coeffs).norm()
}

/// The matrix `g_i = (mn / s(y, sigma)) sum_{p in S_ik} eps_p lambda(p) p^{-sigma}` (column
/// `k`), with twists aligning `lambda(p)` to a direction orthogonal to earlier columns.
pub fn build_g(i: usize, lfs: &[LFunction], partition: &PrimePartition, params: BuildParams) -> Result<BuiltMatrix> {
    let n = partition.n;
    let (y, sigma, pmax) = (partition.y, params.sigma, params.pmax);
    if lfs.len() != n {
        return Err(Error::InvalidArgument(format!("{} L-functions for n = {n}", lfs.len())));
    }
    if i == 0 || i > partition.m {
        return Err(Error::InvalidArgument(format!("matrix index {i} outside 1..={}", partition.m)));
    }
    let sigma_max = 1.0 + params.delta / (y.max(2) as f64).ln();
    if !(sigma > 1.0 && sigma <= sigma_max) {
        return Err(Error::Domain(format!("sigma = {sigma} outside (1, {sigma_max}]")));
    }
    for lf in lfs {
        if pmax as usize > lf.table.len() && !lf.table.is_periodic() {
            return Err(Error::Precondition(format!("{} covers {} < pmax = {pmax}", lf.spec.label, lf.table.len())));
        }
    }
    let (s, _) = s_tail(y, sigma, pmax)?;
    if s <= 0.0 {
        return Err(Error::Precondition(format!("no primes in ({y}, {pmax}]")));
    }
    let scale = (partition.m * n) as f64 / s;

    let mut classes: Vec<Vec<(u64, CVector, f64)>> = vec![Vec::new(); n];
    for_each_prime(y, pmax, |p| {
        if let Some((ci, k)) = partition.class_of(p) {
            if ci == i {
                let lam = CVector::from_iterator(n, lfs.iter().map(|lf| lf.table.prime_value(p)));
                classes[k - 1].push((p, lam, (p as f64).powf(-sigma)));
            }
        }
    });

    let mut twists = TwistAssignment::default();
    let mut columns: Vec<CVector> = Vec::new();
    let mut projections = Vec::new();
    let r = degree_norm(lfs);
    for k in 0..n {
        let u = column_direction(&columns, n);
        let mut v = CVector::zeros(n);
        for (p, lam, w) in &classes[k] {
            let inner = u.dotc(lam);
            let eps = if inner.norm() > 0.0 { inner.conj() / inner.norm() } else { Complex64::new(1.0, 0.0) };
            twists.eps.insert(*p, eps);
            v += lam * (eps * w);
        }
        v *= Complex64::new(scale, 0.0);
        let proj = projection_residual(&columns, &v);
        if proj < 1.0 / (2.0 * r) {
            return Err(Error::KMembership { reason: format!("column {} projection {proj} < 1/(2r)", k + 1), slack: proj - 1.0 / (2.0 * r) });
        }
        projections.push(proj);
        columns.push(v);
    }
    let g = CMatrix::from_columns(&columns);
    check_k(&g, r)?;
    let slack = scale * r * prime_tail_bound(pmax as f64, sigma);
    Ok(BuiltMatrix { g, twists, projections, slack })
}

/// All of `g_1..g_m` for a partition, with the merged twists.
pub fn build_tuple(lfs: &[LFunction], partition: &PrimePartition, params: BuildParams) -> Result<(MatrixTuple, TwistAssignment)> {
    let mut gs = Vec::with_capacity(partition.m);
    let mut twists = TwistAssignment::default();
    for i in 1..=partition.m {
        let built = build_g(i, lfs, partition, params)?;
        gs.push(built.g);
        twists.extend(built.twists);
    }
    Ok((MatrixTuple::new(gs, degree_norm(lfs))?, twists))
}
