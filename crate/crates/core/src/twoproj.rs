//! The two-projection problem on three-tensors: the limit projection
//! Π = lim (PQ)ⁿ, the Friedrichs angle ‖PQ − Π‖, concordance, the Neumann
//! inverse (1 + Π − PQ)^{-1}, and the S₃ group-averaging fast path
//! Π = (1 + U + V + UV + VU + UVU)/6 for U = 2P−1, V = 2Q−1.

use crate::algebra::{Algebra, AlgebraElement, BackendKind};
use crate::cmatrix::CMatrix;
use crate::cyclotomic::Rat;
use crate::error::CoreError;
use crate::geometry::Geometry;
use crate::scalar::Scalar;
use crate::tensor::{ModuleOp, Tensor};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "group-average")]
    GroupAverage,
    #[serde(rename = "iterative")]
    Iterative,
}

#[derive(Clone, Debug)]
pub struct TwoProjectionReport {
    pub pi: ModuleOp,
    pub friedrichs_angle: f64,
    pub concordant: bool,
    pub method: Method,
    pub iterations: usize,
    pub residual: f64,
    /// Rank of Π in the scalar representation when P, Q have constant coefficients.
    pub pi_rank: Option<usize>,
}

/// A flattened (faithful, finite-dimensional) picture of a module operator.
pub enum FlatOp {
    /// Constant coefficients: one scalar matrix represents the operator everywhere.
    Uniform(CMatrix),
    /// One matrix per circle/grid point; `block` is the matrix-block size per
    /// coordinate (q for fuzzy, 1 for grid).
    PerPoint { mats: Vec<CMatrix>, block: usize },
}

impl FlatOp {
    pub fn spectral_norm(&self) -> f64 {
        match self {
            FlatOp::Uniform(m) => m.spectral_norm(),
            FlatOp::PerPoint { mats, .. } => {
                mats.par_iter().map(|m| m.spectral_norm()).reduce(|| 0.0, f64::max)
            }
        }
    }
}

fn constant_complex(e: &AlgebraElement) -> Option<Complex64> {
    if let Some(terms) = e.terms() {
        if terms.is_empty() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if terms.len() == 1 {
            if let Some(v) = terms.get(&[0i64, 0, 0]) {
                return Some(v.to_complex());
            }
        }
        None
    } else if let Some(g) = e.grid_fn() {
        match g.data {
            crate::algebra::GridData::Const(v) => Some(v),
            _ => None,
        }
    } else {
        None
    }
}

/// Flatten a module operator into complex matrices.
pub fn flatten_op(geo: &Geometry, op: &ModuleOp) -> Result<FlatOp, CoreError> {
    let size = op.size();
    if op.is_constant() {
        let mut m = CMatrix::zeros(size, size);
        for i in 0..size {
            for j in 0..size {
                if let Some(v) = constant_complex(op.entry(i, j)) {
                    *m.at_mut(i, j) = v;
                }
            }
        }
        return Ok(FlatOp::Uniform(m));
    }
    match &geo.algebra.backend {
        BackendKind::Fuzzy { q, nz } => {
            let q = *q as usize;
            let mats: Vec<CMatrix> = (0..*nz)
                .map(|zp| {
                    let mut m = CMatrix::zeros(size * q, size * q);
                    for i in 0..size {
                        for j in 0..size {
                            let e = op.entry(i, j);
                            if e.is_zero() {
                                continue;
                            }
                            let blk = e.fuzzy_matrix_at(zp);
                            for a in 0..q {
                                for b in 0..q {
                                    *m.at_mut(i * q + a, j * q + b) = blk.at(a, b);
                                }
                            }
                        }
                    }
                    m
                })
                .collect();
            Ok(FlatOp::PerPoint { mats, block: q })
        }
        BackendKind::Grid { dims } => {
            let total: usize = dims.iter().product();
            // per-entry value tables, then one matrix per point
            let tables: Vec<Option<Vec<Complex64>>> = (0..size * size)
                .map(|f| {
                    let (i, j) = (f / size, f % size);
                    let e = op.entry(i, j);
                    if e.is_zero() {
                        None
                    } else {
                        Some(e.grid_values())
                    }
                })
                .collect();
            let mats: Vec<CMatrix> = (0..total)
                .map(|pt| {
                    let mut m = CMatrix::zeros(size, size);
                    for i in 0..size {
                        for j in 0..size {
                            if let Some(vals) = &tables[i * size + j] {
                                *m.at_mut(i, j) = vals[pt];
                            }
                        }
                    }
                    m
                })
                .collect();
            Ok(FlatOp::PerPoint { mats, block: 1 })
        }
        BackendKind::Laurent => Err(CoreError::NoNorm(
            "Laurent operator with non-constant coefficients has no faithful finite representation"
                .into(),
        )),
    }
}

fn op_from_uniform(alg: &Algebra, k: usize, n: usize, m: &CMatrix) -> ModuleOp {
    ModuleOp::from_fn(alg, k, n, |r, c| {
        let v = m.at(crate::tensor::flat_index(r, n), crate::tensor::flat_index(c, n));
        if v.norm() == 0.0 {
            alg.zero()
        } else {
            match &alg.backend {
                BackendKind::Grid { .. } => alg.grid_const(v),
                _ => alg.monomial([0, 0, 0], Scalar::Approx(v)),
            }
        }
    })
}

/// Dense numeric two-projection driver: Π = lim (PQ)ⁿ by iteration.
/// Returns (Π, iterations, final residual).
pub fn limit_projection_dense(
    p: &CMatrix,
    q: &CMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(CMatrix, usize, f64), CoreError> {
    let pq = p.mul(q);
    let mut m = pq.clone();
    let mut res = f64::INFINITY;
    for it in 1..=max_iter {
        let next = m.mul(&pq);
        res = next.sub(&m).sup_norm();
        m = next;
        if res < tol {
            return Ok((m, it, res));
        }
    }
    Err(CoreError::NonConvergence { max_iter, residual: res })
}

fn unitaries(geo: &Geometry, p: &ModuleOp, q: &ModuleOp) -> (ModuleOp, ModuleOp) {
    let id = ModuleOp::identity(&geo.algebra, p.k, p.n);
    let two = Rat::from_integer(2.into());
    (p.scale_rat(&two).sub(&id), q.scale_rat(&two).sub(&id))
}

/// Does (2P−1)(2Q−1)(2P−1) = (2Q−1)(2P−1)(2Q−1) hold (exactly / to tol)?
pub fn braid_residual(geo: &Geometry, p: &ModuleOp, q: &ModuleOp) -> f64 {
    let (u, v) = unitaries(geo, p, q);
    let lhs = u.compose(&v).compose(&u);
    let rhs = v.compose(&u).compose(&v);
    lhs.residual(&rhs)
}

pub fn braid_holds(geo: &Geometry, p: &ModuleOp, q: &ModuleOp) -> bool {
    let r = braid_residual(geo, p, q);
    if geo.algebra.is_exact() {
        r == 0.0
    } else {
        r <= geo.tol
    }
}

/// Limit projection with the S₃ group-average fast path and the iterative
/// fallback (exact fixpoint iteration on exact backends, flattened numeric
/// iteration on floating ones).
pub fn limit_projection(
    geo: &Geometry,
    p: &ModuleOp,
    q: &ModuleOp,
    tol: f64,
    max_iter: usize,
) -> Result<TwoProjectionReport, CoreError> {
    if braid_holds(geo, p, q) {
        let (u, v) = unitaries(geo, p, q);
        let id = ModuleOp::identity(&geo.algebra, p.k, p.n);
        let uv = u.compose(&v);
        let vu = v.compose(&u);
        let uvu = uv.compose(&u);
        let pi = id
            .add(&u)
            .add(&v)
            .add(&uv)
            .add(&vu)
            .add(&uvu)
            .scale_rat(&Rat::new(1.into(), 6.into()));
        let angle = friedrichs_angle(geo, p, q, &pi).unwrap_or(f64::NAN);
        let rank = pi_rank(geo, &pi);
        return Ok(TwoProjectionReport {
            pi,
            friedrichs_angle: angle,
            concordant: true,
            method: Method::GroupAverage,
            iterations: 0,
            residual: 0.0,
            pi_rank: rank,
        });
    }

    limit_projection_iterative(geo, p, q, tol, max_iter)
}

/// The iterative route only (no S₃ fast path): exact fixpoint iteration on
/// exact backends, flattened numeric iteration on floating ones.
pub fn limit_projection_iterative(
    geo: &Geometry,
    p: &ModuleOp,
    q: &ModuleOp,
    tol: f64,
    max_iter: usize,
) -> Result<TwoProjectionReport, CoreError> {
    if geo.algebra.is_exact() {
        // exact fixpoint iteration: covers PQ nilpotent / P = Q style cases
        let pq = p.compose(q);
        let mut m = pq.clone();
        for it in 1..=max_iter.min(64) {
            let next = m.compose(&pq);
            let res = next.residual(&m);
            if res == 0.0 {
                let angle = friedrichs_angle(geo, p, q, &next).unwrap_or(f64::NAN);
                let concordant = angle.is_finite() && angle < 1.0;
                let rank = pi_rank(geo, &next);
                return Ok(TwoProjectionReport {
                    pi: next,
                    friedrichs_angle: angle,
                    concordant,
                    method: Method::Iterative,
                    iterations: it,
                    residual: 0.0,
                    pi_rank: rank,
                });
            }
            m = next;
        }
        return Err(CoreError::NoNorm(
            "exact backend without the S₃ relation or an exact fixpoint; cannot certify concordance"
                .into(),
        ));
    }

    // floating backends: flattened iteration
    let fp = flatten_op(geo, p)?;
    let fq = flatten_op(geo, q)?;
    let (pi_op, iterations, residual) = match (&fp, &fq) {
        (FlatOp::Uniform(mp), FlatOp::Uniform(mq)) => {
            let (m, it, res) = limit_projection_dense(mp, mq, tol, max_iter)?;
            (op_from_uniform(&geo.algebra, p.k, p.n, &m), it, res)
        }
        (FlatOp::PerPoint { mats: mp, block }, FlatOp::PerPoint { mats: mq, .. }) => {
            let results: Result<Vec<(CMatrix, usize, f64)>, CoreError> = mp
                .par_iter()
                .zip(mq.par_iter())
                .map(|(a, b)| limit_projection_dense(a, b, tol, max_iter))
                .collect();
            let results = results?;
            let it = results.iter().map(|r| r.1).max().unwrap_or(0);
            let res = results.iter().map(|r| r.2).fold(0.0, f64::max);
            let mats: Vec<CMatrix> = results.into_iter().map(|r| r.0).collect();
            (op_from_points_checked(&geo.algebra, p.k, p.n, &mats, *block), it, res)
        }
        _ => {
            return Err(CoreError::NoNorm("mixed flattening shapes".into()));
        }
    };
    let angle = friedrichs_angle(geo, p, q, &pi_op)?;
    let rank = pi_rank(geo, &pi_op);
    Ok(TwoProjectionReport {
        pi: pi_op,
        friedrichs_angle: angle,
        concordant: angle < 1.0,
        method: Method::Iterative,
        iterations,
        residual,
        pi_rank: rank,
    })
}

fn op_from_points_checked(
    alg: &Algebra,
    k: usize,
    n: usize,
    mats: &[CMatrix],
    block: usize,
) -> ModuleOp {
    op_from_points_impl(alg, k, n, mats, block)
}

fn op_from_points_impl(
    alg: &Algebra,
    k: usize,
    n: usize,
    mats: &[CMatrix],
    block: usize,
) -> ModuleOp {
    match &alg.backend {
        BackendKind::Grid { .. } => ModuleOp::from_fn(alg, k, n, |r, c| {
            let (i, j) = (crate::tensor::flat_index(r, n), crate::tensor::flat_index(c, n));
            let vals: Vec<Complex64> = mats.iter().map(|m| m.at(i, j)).collect();
            if vals.iter().all(|z| z.norm() == 0.0) {
                alg.zero()
            } else {
                alg.grid_from_values(vals, crate::algebra::Band::Smooth)
            }
        }),
        BackendKind::Fuzzy { q, nz } => {
            let q = *q as usize;
            assert_eq!(block, q);
            let nz = *nz;
            ModuleOp::from_fn(alg, k, n, |r, c| {
                let (i, j) = (crate::tensor::flat_index(r, n), crate::tensor::flat_index(c, n));
                let qi = q as i64;
                let mut acc = alg.zero();
                for a in 0..qi {
                    for b in 0..qi {
                        let vals: Vec<Complex64> = mats
                            .iter()
                            .map(|m| {
                                let mut coef = Complex64::new(0.0, 0.0);
                                for jj in 0..qi {
                                    let row = (jj - b).rem_euclid(qi) as usize;
                                    let ph = alg.lambda_pow(-a * (jj - b)).to_complex();
                                    coef += ph * m.at(i * q + row, j * q + jj as usize);
                                }
                                coef / q as f64
                            })
                            .collect();
                        for kk in 0..nz {
                            let kbal = {
                                let mut rr = (kk as i64).rem_euclid(nz as i64);
                                if rr > nz as i64 / 2 {
                                    rr -= nz as i64;
                                }
                                rr
                            };
                            let mut mode = Complex64::new(0.0, 0.0);
                            for (pp, v) in vals.iter().enumerate() {
                                let ang = -std::f64::consts::TAU * (kk as f64) * (pp as f64)
                                    / (nz as f64);
                                mode += v * Complex64::new(ang.cos(), ang.sin());
                            }
                            mode /= nz as f64;
                            if mode.norm() > 1e-14 {
                                acc = acc.add(&alg.monomial([a, b, kbal], Scalar::Approx(mode)));
                            }
                        }
                    }
                }
                acc
            })
        }
        BackendKind::Laurent => unreachable!(),
    }
}

fn pi_rank(geo: &Geometry, pi: &ModuleOp) -> Option<usize> {
    match flatten_op(geo, pi) {
        Ok(FlatOp::Uniform(m)) => {
            let t = m.trace().re;
            Some(t.round().max(0.0) as usize)
        }
        _ => None,
    }
}

/// Friedrichs angle c = ‖PQ − Π‖ in the flattened representation.
pub fn friedrichs_angle(
    geo: &Geometry,
    p: &ModuleOp,
    q: &ModuleOp,
    pi: &ModuleOp,
) -> Result<f64, CoreError> {
    let diff = p.compose(q).sub(pi);
    Ok(flatten_op(geo, &diff)?.spectral_norm())
}

/// Σ_{n≥0} (PQ)ⁿ x. Exact backends terminate on an exactly-zero increment or
/// the exact geometric pattern Tₙ₊₁ = Tₙ/4 (always present once the S₃
/// relation holds), floating backends at `tol`.
pub fn geometric_pq_sum(
    geo: &Geometry,
    p: &ModuleOp,
    q: &ModuleOp,
    x0: &Tensor,
    tol: f64,
    max_iter: usize,
) -> Result<(Tensor, usize), CoreError> {
    let exact = geo.algebra.is_exact();
    let mut sum = Tensor::zero(x0.k);
    let mut term = geo.canon(x0);
    for it in 0..max_iter {
        if term.norm_sup() == 0.0 {
            return Ok((sum, it));
        }
        if !exact && term.norm_sup() <= tol {
            return Ok((sum, it));
        }
        sum = sum.add(&term);
        let next = geo.canon(&p.apply(&q.apply(&term)));
        if exact {
            // geometric tail: next = term/4 ⇒ Σ remaining = next·(4/3)
            let probe = next.scale_i64(4).sub(&term);
            if geo.canon(&probe).norm_sup() == 0.0 {
                let tail = next.scale_rat(&Rat::new(4.into(), 3.into()));
                return Ok((sum.add(&tail), it + 1));
            }
        }
        term = next;
    }
    Err(CoreError::NonConvergence { max_iter, residual: term.norm_sup() })
}

/// (1 + Π − PQ)^{-1} t = Πt + Σ_{n≥0} (PQ)ⁿ (1−Π) t.
pub fn neumann_inverse(
    geo: &Geometry,
    p: &ModuleOp,
    q: &ModuleOp,
    pi: &ModuleOp,
    t: &Tensor,
    tol: f64,
    max_iter: usize,
) -> Result<Tensor, CoreError> {
    let tc = geo.canon(t);
    let pit = geo.canon(&pi.apply(&tc));
    let rest = tc.sub(&pit);
    let (series, _) = geometric_pq_sum(geo, p, q, &rest, tol, max_iter)?;
    Ok(geo.canon(&pit.add(&series)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_two_by_two_friedrichs_oracle() {
        // P = proj span(e1), Q = proj span(cos α e1 + sin α e2), α = π/3:
        // closed-form 2×2 projection algebra gives Π = 0, c(M,N) = cos α = 1/2,
        // and (PQ)ⁿ = c^{2(n-1)} PQ decays geometrically.
        let a = std::f64::consts::FRAC_PI_3;
        let (c, s) = (a.cos(), a.sin());
        let p = CMatrix::from_rows(vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        ]);
        let q = CMatrix::from_rows(vec![
            vec![Complex64::new(c * c, 0.0), Complex64::new(c * s, 0.0)],
            vec![Complex64::new(c * s, 0.0), Complex64::new(s * s, 0.0)],
        ]);
        let (pi, iters, res) = limit_projection_dense(&p, &q, 1e-12, 10_000).unwrap();
        assert!(pi.sup_norm() < 1e-9, "Π should vanish");
        assert!(res < 1e-12);
        assert!(iters > 1);
        let angle = p.mul(&q).sub(&pi).spectral_norm();
        assert!((angle - 0.5).abs() < 1e-12, "angle {} != 0.5", angle);
        // geometric decay of (PQ)^n
        let pq = p.mul(&q);
        let pq2 = pq.mul(&pq);
        assert!(pq2.sub(&pq.scale(Complex64::new(c * c, 0.0))).sup_norm() < 1e-12);
    }
}
