use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::matrix::{CMatrix, CVector, MatrixTuple};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const PAIR_BUDGET: usize = 10_000;
const PAIR_TOLERANCE: f64 = 1e-10;
const TORUS_TOLERANCE: f64 = 1e-8;

/// `e(theta) = exp(2 pi i theta)`.
pub fn e(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * theta)
}

/// Splits `z` with `|z - 1| <= 2/3` as `s1 + s2` with `|s1| = |s2| = 1` and
/// `Im(s1 / s2) > 0`.
pub fn two_unit_split(z: Complex64) -> Result<(Complex64, Complex64)> {
    if (z - 1.0).norm() > 2.0 / 3.0 + 1e-12 {
        return Err(Error::Domain(format!("two_unit_split needs |z - 1| <= 2/3, got z = {z}")));
    }
    let half = z / 2.0;
    let h = (1.0 - half.norm_sqr()).max(0.0).sqrt();
    let off = I * (z / z.norm()) * h;
    Ok((half + off, half - off))
}

/// Phases `theta_j` (in turns, `theta_0 = 0`) with `|sum e(theta_j) v_j| <= sqrt(sum |v_j|^2)`.
/// Each phase in turn minimizes the running norm, so the squared norm grows by at
/// most `|v_j|^2` per step.
pub fn phase_average(vs: &[CVector]) -> Vec<f64> {
    let mut thetas = Vec::with_capacity(vs.len());
    let Some(first) = vs.first() else { return thetas };
    let mut sum = first.clone();
    thetas.push(0.0);
    for v in &vs[1..] {
        let c = sum.dotc(v);
        let theta = if c.norm() > 0.0 { ((-c.conj()).arg() / TAU).rem_euclid(1.0) } else { 0.0 };
        sum += v * e(theta);
        thetas.push(theta);
    }
    thetas
}

#[derive(Clone, Debug)]
pub struct PairSolution {
    pub t1: CVector,
    pub t2: CVector,
    pub residual: f64,
    pub steps: usize,
    /// `|z - h_w(z)|` per step.
    pub history: Vec<f64>,
}

fn split_vec(z: &CVector) -> Result<(CVector, CVector)> {
    let mut a = CVector::zeros(z.len());
    let mut b = CVector::zeros(z.len());
    for (k, &v) in z.iter().enumerate() {
        let (s1, s2) = two_unit_split(v)?;
        a[k] = s1;
        b[k] = s2;
    }
    Ok((a, b))
}

fn unitize(v: &mut CVector) {
    v.iter_mut().for_each(|x| *x /= x.norm());
}

/// Solves `t1 + (I + Delta) t2 = w` on the torus, `Delta = g1^{-1} g2 - I`, as the fixed
/// point of `h_w(z) = w - Delta s2(z)`, switching to damped steps when progress stalls.
pub fn pair_fixed_point(g1: &CMatrix, g2: &CMatrix, w: &CVector) -> Result<PairSolution> {
    let n = g1.nrows();
    let inv = g1.clone().try_inverse().ok_or_else(|| Error::Precondition("g1 is singular".into()))?;
    let delta = &inv * g2 - CMatrix::identity(n, n);
    let bound = 1.0 / (3.0 * (n as f64).sqrt());
    if delta.norm() >= bound {
        return Err(Error::NoPairing { best: delta.norm(), bound });
    }
    if let Some(bad) = w.iter().find(|v| (*v - 1.0).norm() > 1.0 / 3.0 + 1e-12) {
        return Err(Error::Domain(format!("w entry {bad} outside |w - 1| <= 1/3")));
    }
    let mut z = w.clone();
    let mut damping = 1.0;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut history = Vec::new();
    for steps in 0..PAIR_BUDGET {
        let (_, t2) = split_vec(&z)?;
        let hz = w - &delta * &t2;
        let gap = (&z - &hz).norm();
        history.push(gap);
        if gap <= 1e-15 * (1.0 + w.norm()) {
            break;
        }
        if gap < best {
            best = gap;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= 10 {
                damping *= 0.5;
                since_best = 0;
            }
        }
        z = &z * Complex64::new(1.0 - damping, 0.0) + hz * Complex64::new(damping, 0.0);
        if steps + 1 == PAIR_BUDGET {
            return Err(Error::Budget { steps: PAIR_BUDGET, residual: gap });
        }
    }
    let (mut t1, mut t2) = split_vec(&z)?;
    unitize(&mut t1);
    unitize(&mut t2);
    let residual = (&t1 + &t2 + &delta * &t2 - w).norm();
    if residual > PAIR_TOLERANCE {
        return Err(Error::Residual { residual, tolerance: PAIR_TOLERANCE });
    }
    Ok(PairSolution { t1, t2, residual, steps: history.len(), history })
}

/// How `torus_param` may solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusPlan {
    /// Pairing, patch covering and the two-unit decomposition.
    Pipeline,
    /// Damped Gauss-Newton on the phases; no continuity in `z`.
    Direct,
    /// Pipeline when the tuple admits it, otherwise direct.
    Auto,
}

#[derive(Clone, Debug)]
pub struct GroupStats {
    pub pairs: usize,
    pub leftovers: usize,
    pub eps_sum: f64,
    /// `|2 e_j - c|`, where `c` is the phase-averaged centre.
    pub gap: f64,
}

/// The `z`-independent part of the pipeline: `3n` groups of indices, group `(j, l)`
/// solved once so that its terms sum to `2 e_j`.
#[derive(Clone, Debug)]
pub struct TorusParam {
    tuple: MatrixTuple,
    /// Per group, `(index, t)` with `sum g_index t = 2 e_j`.
    groups: Vec<Vec<(usize, CVector)>>,
    pub stats: Vec<GroupStats>,
}

struct Pair {
    a: usize,
    b: usize,
    inv_a: CMatrix,
    eps: f64,
}

fn pair_group(tuple: &MatrixTuple, indices: &[usize], best: &mut f64) -> (Vec<Pair>, Vec<usize>) {
    let n = tuple.n();
    let bound = 1.0 / (3.0 * (n as f64).sqrt());
    let inverses: Vec<Option<CMatrix>> = indices.iter().map(|&i| tuple.gs[i].clone().try_inverse()).collect();
    let mut used = vec![false; indices.len()];
    let mut pairs = Vec::new();
    for x in 0..indices.len() {
        if used[x] || inverses[x].is_none() {
            continue;
        }
        // the closest unused partner, oriented so the patch radius is largest
        let mut choice: Option<(usize, bool, f64)> = None;
        for y in x + 1..indices.len() {
            if used[y] || inverses[y].is_none() {
                continue;
            }
            for (flip, (p, q)) in [(false, (x, y)), (true, (y, x))] {
                let inv = inverses[p].as_ref().unwrap();
                let d = (inv * &tuple.gs[indices[q]] - CMatrix::identity(n, n)).norm();
                *best = best.min(d);
                if d < bound {
                    let eps = 1.0 / (3.0 * inv.norm());
                    if choice.map_or(true, |c| eps > c.2) {
                        choice = Some((y, flip, eps));
                    }
                }
            }
        }
        if let Some((y, flip, eps)) = choice {
            used[x] = true;
            used[y] = true;
            let (p, q) = if flip { (y, x) } else { (x, y) };
            pairs.push(Pair { a: indices[p], b: indices[q], inv_a: inverses[p].clone().unwrap(), eps });
        }
    }
    let leftovers = indices.iter().zip(&used).filter(|(_, u)| !**u).map(|(&i, _)| i).collect();
    (pairs, leftovers)
}

fn solve_group(tuple: &MatrixTuple, pairs: &[Pair], leftovers: &[usize], target: &CVector) -> Result<(Vec<(usize, CVector)>, GroupStats)> {
    let n = tuple.n();
    let ones = CVector::from_element(n, Complex64::new(1.0, 0.0));
    let mut centres: Vec<CVector> = pairs.iter().map(|p| &tuple.gs[p.a] * &ones).collect();
    let rest: CVector = leftovers.iter().fold(CVector::zeros(n), |acc, &i| acc + &tuple.gs[i] * &ones);
    if !leftovers.is_empty() {
        centres.push(rest);
    }
    let thetas = phase_average(&centres);
    let c: CVector = centres.iter().zip(&thetas).fold(CVector::zeros(n), |acc, (v, &th)| acc + v * e(th));
    let eps_sum: f64 = pairs.iter().map(|p| p.eps).sum();
    let gap = (target - &c).norm();
    let stats = GroupStats { pairs: pairs.len(), leftovers: leftovers.len(), eps_sum, gap };
    if gap >= eps_sum * (1.0 - 1e-9) {
        return Err(Error::Coverage(format!(
            "{} pairs cover radius {eps_sum:.4} around the centre, target lies at distance {gap:.4}",
            pairs.len()
        )));
    }
    let mut out = Vec::new();
    for (pair, &th) in pairs.iter().zip(&thetas) {
        let delta = (target - &c) * Complex64::new(pair.eps / eps_sum, 0.0);
        let w = &ones + &pair.inv_a * delta * e(-th);
        let sol = pair_fixed_point(&tuple.gs[pair.a], &tuple.gs[pair.b], &w)?;
        out.push((pair.a, sol.t1 * e(th)));
        out.push((pair.b, sol.t2 * e(th)));
    }
    if !leftovers.is_empty() {
        let rot = e(*thetas.last().unwrap());
        out.extend(leftovers.iter().map(|&i| (i, &ones * rot)));
    }
    Ok((out, stats))
}

impl TorusParam {
    /// Splits the indices into `3n` consecutive groups and solves each for `2 e_j`.
    pub fn build(tuple: &MatrixTuple) -> Result<Self> {
        let (m, n) = (tuple.m(), tuple.n());
        let bound = 1.0 / (3.0 * (n as f64).sqrt());
        let count = 3 * n;
        if m < 2 * count {
            return Err(Error::NoPairing { best: f64::INFINITY, bound });
        }
        let size = m / count;
        let mut groups = Vec::with_capacity(count);
        let mut stats = Vec::with_capacity(count);
        for gidx in 0..count {
            let end = if gidx + 1 == count { m } else { (gidx + 1) * size };
            let indices: Vec<usize> = (gidx * size..end).collect();
            let mut best = f64::INFINITY;
            let (pairs, leftovers) = pair_group(tuple, &indices, &mut best);
            if pairs.is_empty() {
                return Err(Error::NoPairing { best, bound });
            }
            let mut target = CVector::zeros(n);
            target[gidx / 3] = Complex64::new(2.0, 0.0);
            let (sol, st) = solve_group(tuple, &pairs, &leftovers, &target)?;
            groups.push(sol);
            stats.push(st);
        }
        Ok(TorusParam { tuple: tuple.clone(), groups, stats })
    }

    /// `t_1..t_m` on the torus with `sum g_i t_i = z`, continuous in `z` on the polydisk.
    pub fn eval(&self, z: &CVector) -> Result<Vec<CVector>> {
        let n = self.tuple.n();
        check_polydisk(z, n)?;
        let mut t = vec![CVector::zeros(n); self.tuple.m()];
        for j in 0..n {
            // z_j / 2 - 1 = alpha + beta with |alpha| = |beta| = 1
            let (s1, s2) = two_unit_split(1.0 - z[j] / 2.0)?;
            for (l, scale) in [Complex64::new(1.0, 0.0), -s1, -s2].into_iter().enumerate() {
                for (i, ti) in &self.groups[3 * j + l] {
                    t[*i] = ti * scale;
                }
            }
        }
        finish(&self.tuple, t, z)
    }
}

fn check_polydisk(z: &CVector, n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::InvalidArgument(format!("point of dimension {} for n = {n}", z.len())));
    }
    if let Some(v) = z.iter().find(|v| v.norm() > 1.0 + 1e-12) {
        return Err(Error::Domain(format!("entry {v} outside the unit disk")));
    }
    Ok(())
}

fn finish(tuple: &MatrixTuple, mut t: Vec<CVector>, z: &CVector) -> Result<Vec<CVector>> {
    t.iter_mut().for_each(unitize);
    let residual = torus_residual(tuple, &t, z);
    if !(residual <= TORUS_TOLERANCE) {
        return Err(Error::Residual { residual, tolerance: TORUS_TOLERANCE });
    }
    Ok(t)
}

/// `|sum g_i t_i - z|`.
pub fn torus_residual(tuple: &MatrixTuple, t: &[CVector], z: &CVector) -> f64 {
    (tuple.gs.iter().zip(t).fold(CVector::zeros(z.len()), |acc, (g, ti)| acc + g * ti) - z).norm()
}

fn direct_attempt(tuple: &MatrixTuple, z: &CVector, start: Vec<f64>) -> Option<Vec<CVector>> {
    let (m, n) = (tuple.m(), tuple.n());
    let build = |phi: &[f64]| -> Vec<CVector> {
        (0..m).map(|i| CVector::from_iterator(n, (0..n).map(|k| Complex64::from_polar(1.0, phi[i * n + k])))).collect()
    };
    let resid = |phi: &[f64]| -> DVector<f64> {
        let t = build(phi);
        let r = tuple.gs.iter().zip(&t).fold(-z.clone(), |acc, (g, ti)| acc + g * ti);
        DVector::from_iterator(2 * n, r.iter().flat_map(|v| [v.re, v.im]))
    };
    let mut phi = start;
    let mut f = resid(&phi);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if f.norm() <= 1e-13 {
            break;
        }
        let t = build(&phi);
        let mut jac = DMatrix::<f64>::zeros(2 * n, m * n);
        for i in 0..m {
            for k in 0..n {
                let d = tuple.gs[i].column(k) * (I * t[i][k]);
                for row in 0..n {
                    jac[(2 * row, i * n + k)] = d[row].re;
                    jac[(2 * row + 1, i * n + k)] = d[row].im;
                }
            }
        }
        let jjt = &jac * jac.transpose();
        let mut improved = false;
        for _ in 0..30 {
            let sys = &jjt + DMatrix::<f64>::identity(2 * n, 2 * n) * lambda;
            let Some(y) = sys.lu().solve(&f) else {
                lambda *= 10.0;
                continue;
            };
            let step = jac.transpose() * y;
            let trial: Vec<f64> = phi.iter().zip(step.iter()).map(|(a, b)| a - b).collect();
            let ft = resid(&trial);
            if ft.norm() < f.norm() {
                phi = trial;
                f = ft;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (f.norm() <= TORUS_TOLERANCE).then(|| build(&phi))
}

fn solve_direct(tuple: &MatrixTuple, z: &CVector) -> Result<Vec<CVector>> {
    let (m, n) = (tuple.m(), tuple.n());
    // starts: phases spread evenly over the indices, offset by a golden-ratio sequence
    let golden = 0.618_033_988_749_895;
    for attempt in 0..32 {
        let start: Vec<f64> = (0..m * n)
            .map(|idx| {
                let (i, k) = (idx / n, idx % n);
                TAU * (i as f64 / m as f64 + ((attempt * (k + 1)) as f64 * golden).fract())
            })
            .collect();
        if let Some(t) = direct_attempt(tuple, z, start) {
            return finish(tuple, t, z);
        }
    }
    Err(Error::Budget { steps: 32, residual: f64::NAN })
}

/// `t_1..t_m` on the torus with `sum g_i t_i = z` for `z` in the closed polydisk.
pub fn torus_param(tuple: &MatrixTuple, z: &CVector, plan: TorusPlan) -> Result<Vec<CVector>> {
    check_polydisk(z, tuple.n())?;
    match plan {
        TorusPlan::Pipeline => TorusParam::build(tuple)?.eval(z),
        TorusPlan::Direct => solve_direct(tuple, z),
        TorusPlan::Auto => match TorusParam::build(tuple) {
            Ok(param) => param.eval(z),
            Err(Error::NoPairing { .. } | Error::Coverage(_)) => solve_direct(tuple, z),
            Err(e) => Err(e),
        },
    }
}

/// A random tuple in `K`: perturbations `g_0 (I + E_i)`, `||E_i|| <= spread`, of a
/// base matrix with singular values in `[0.7, 1.3]`.
pub fn random_k_tuple<R: Rng>(rng: &mut R, n: usize, m: usize, spread: f64, r: f64) -> Result<MatrixTuple> {
    let cgauss = |rng: &mut R| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let u = CMatrix::from_fn(n, n, |_, _| cgauss(rng)).qr().q();
    let v = CMatrix::from_fn(n, n, |_, _| cgauss(rng)).qr().q();
    let diag = CMatrix::from_diagonal(&CVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(0.7..1.3), 0.0)));
    let base = u * diag * v;
    let gs = (0..m)
        .map(|_| {
            let mut d = CMatrix::from_fn(n, n, |_, _| cgauss(rng));
            let scale = spread * rng.gen_range(0.0..1.0) / d.norm();
            d *= Complex64::new(scale, 0.0);
            &base * (CMatrix::identity(n, n) + d)
        })
        .collect();
    MatrixTuple::new(gs, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn split_examples() {
        let (a, b) = two_unit_split(c(5.0 / 3.0, 0.0)).unwrap();
        let h = 11f64.sqrt() / 6.0;
        assert!((a - c(5.0 / 6.0, h)).norm() < 1e-15 && (b - c(5.0 / 6.0, -h)).norm() < 1e-15);
        let (a, b) = two_unit_split(c(1.0, 0.0)).unwrap();
        assert!((a - e(1.0 / 6.0)).norm() < 1e-15 && (b - e(-1.0 / 6.0)).norm() < 1e-15);
        assert!(((a / b).im - (TAU / 3.0).sin()).abs() < 1e-15);
        let (a, b) = two_unit_split(c(1.0 / 3.0, 0.0)).unwrap();
        let h = 35f64.sqrt() / 6.0;
        assert!((a - c(1.0 / 6.0, h)).norm() < 1e-15 && (b - c(1.0 / 6.0, -h)).norm() < 1e-15);
        assert!(two_unit_split(c(0.2, 0.0)).is_err());
    }

    #[test]
    fn split_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let z = 1.0 + Complex64::from_polar(rng.gen_range(0.0..2.0 / 3.0), rng.gen_range(0.0..TAU));
            let (a, b) = two_unit_split(z).unwrap();
            assert!((a + b - z).norm() < 1e-14);
            assert!((a.norm() - 1.0).abs() < 1e-14 && (b.norm() - 1.0).abs() < 1e-14);
            assert!((a / b).im > 0.0);
        }
    }

    #[test]
    fn phase_average_bound() {
        let one = CVector::from_element(1, c(1.0, 0.0));
        let th = phase_average(&[one.clone(), one.clone()]);
        assert!((one.clone() * e(th[0]) + &one * e(th[1])).norm() <= 2f64.sqrt());
        assert!(((&one + &one * e(0.25)).norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(phase_average(&[one]), vec![0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vs: Vec<CVector> = (0..50).map(|_| CVector::from_fn(3, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
        let th = phase_average(&vs);
        let total = vs.iter().zip(&th).fold(CVector::zeros(3), |acc, (v, &t)| acc + v * e(t));
        let bound = vs.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
        assert!(bound - total.norm() >= 0.0);
    }

    #[test]
    fn pair_examples() {
        let g = CMatrix::identity(1, 1);
        let w = CVector::from_element(1, c(1.0, 0.0));
        let sol = pair_fixed_point(&g, &g, &w).unwrap();
        assert!((sol.t1[0] - e(1.0 / 6.0)).norm() < 1e-15 && (sol.t2[0] - e(-1.0 / 6.0)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g1 = CMatrix::from_fn(2, 2, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))) + CMatrix::identity(2, 2) * c(2.0, 0.0);
            let mut d = CMatrix::from_fn(2, 2, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            d *= c(0.1 / (3.0 * 2f64.sqrt()) / d.norm(), 0.0);
            let g2 = &g1 * (CMatrix::identity(2, 2) + &d);
            let w = CVector::from_fn(2, |_, _| 1.0 + Complex64::from_polar(rng.gen_range(0.0..1.0 / 3.0), rng.gen_range(0.0..TAU)));
            let sol = pair_fixed_point(&g1, &g2, &w).unwrap();
            assert!(sol.residual <= 1e-10);
            let again = (&sol.t1 + (CMatrix::identity(2, 2) + &d) * &sol.t2 - &w).norm();
            assert!(again <= 1e-10);
        }
    }

    #[test]
    fn pair_rejects_far_matrices() {
        let g1 = CMatrix::identity(1, 1);
        let g2 = CMatrix::identity(1, 1) * c(2.0, 0.0);
        let w = CVector::from_element(1, c(1.0, 0.0));
        assert!(matches!(pair_fixed_point(&g1, &g2, &w), Err(Error::NoPairing { .. })));
    }

    #[test]
    fn identity_triple() {
        let tuple = MatrixTuple::new(vec![CMatrix::identity(1, 1); 3], 1.0).unwrap();
        let t = torus_param(&tuple, &CVector::zeros(1), TorusPlan::Auto).unwrap();
        for (k, ti) in t.iter().enumerate() {
            assert!((ti[0] - e(k as f64 / 3.0)).norm() < 1e-12);
        }
        let one = CVector::from_element(1, c(1.0, 0.0));
        let t = torus_param(&tuple, &one, TorusPlan::Auto).unwrap();
        assert!(torus_residual(&tuple, &t, &one) <= 1e-8);
        assert!(t.iter().all(|ti| ti[0].norm() == 1.0 || (ti[0].norm() - 1.0).abs() < 1e-15));
        assert!(matches!(torus_param(&tuple, &one, TorusPlan::Pipeline), Err(Error::NoPairing { .. })));
    }

    fn random_polydisk<R: Rng>(rng: &mut R, n: usize) -> CVector {
        CVector::from_fn(n, |_, _| Complex64::from_polar(rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..TAU)))
    }

    #[test]
    fn pipeline_on_clustered_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [1, 2] {
            let tuple = random_k_tuple(&mut rng, n, 3 * n * 48, 0.05, 2.0).unwrap();
            let param = TorusParam::build(&tuple).unwrap();
            let mut prev: Option<(CVector, Vec<CVector>)> = None;
            for _ in 0..20 {
                let z = random_polydisk(&mut rng, n);
                let t = param.eval(&z).unwrap();
                assert!(torus_residual(&tuple, &t, &z) <= 1e-8);
                assert!(t.iter().flat_map(|v| v.iter()).all(|x| (x.norm() - 1.0).abs() < 1e-15));
                // a unimodular rotation of z rotates a solution
                let rot = e(0.3);
                let rotated: Vec<CVector> = t.iter().map(|v| v * rot).collect();
                assert!(torus_residual(&tuple, &rotated, &(&z * rot)) <= 1e-8);
                assert!(param.eval(&(&z * rot)).is_ok());
                prev = Some((z, t));
            }
            // sampled Lipschitz check: nearby points map to nearby phases
            let (z, t) = prev.unwrap();
            let z2 = &z * Complex64::new(0.999, 0.0);
            let t2 = param.eval(&z2).unwrap();
            let moved = t.iter().zip(&t2).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(moved < 100.0 * (&z - &z2).norm(), "{moved}");
        }
    }

    #[test]
    fn neighbourhood_lemma() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3] {
            let tuple = random_k_tuple(&mut rng, n, 10, 0.5, 2.0).unwrap();
            let ones = CVector::from_element(n, Complex64::new(1.0, 0.0));
            for g in &tuple.gs {
                let inv = g.clone().try_inverse().unwrap();
                let eps = (1.0 / 3.0) / inv.norm();
                let centre = g * &ones;
                for _ in 0..100 {
                    let mut d = random_polydisk(&mut rng, n);
                    d *= Complex64::new(eps / d.norm(), 0.0);
                    let pre = &inv * (&centre + d);
                    assert!(pre.iter().all(|w| (w - 1.0).norm() <= 1.0 / 3.0 + 1e-12));
                }
            }
        }
    }
}
