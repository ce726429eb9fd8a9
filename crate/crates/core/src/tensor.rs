//! Right-frame-coordinate calculus on tensor powers of the one-forms.
//!
//! A `Tensor` of rank k is a finitely supported map from k-tuples of frame
//! labels to right coefficients: t = Σ_I ω_{i1}⊗…⊗ω_{ik}·c_I. All left
//! actions are routed through the Θ-commutation rule (coefficients pick up a
//! phase when pushed past homogeneous slots), so canonical right-coordinate
//! form is a normal form and exact equality tests are meaningful.
//!
//! A `ModuleOp` of rank k is a right-module endomorphism of the k-tensors in
//! coordinates: an N^k × N^k matrix of algebra elements acting by left
//! multiplication on the coordinate vector. Ψ, σ_θ, P = Ψ⊗1 and Q = 1⊗Ψ all
//! live here.

use crate::algebra::{Algebra, AlgebraElement, Degree};
use crate::cyclotomic::Rat;
use crate::scalar::Scalar;
use num_bigint::BigInt;
use std::collections::BTreeMap;

pub type Idx = Vec<u8>;

/// Rank-k tensor in right frame coordinates.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub k: usize,
    coeffs: BTreeMap<Idx, AlgebraElement>,
}

impl Tensor {
    pub fn zero(k: usize) -> Tensor {
        Tensor { k, coeffs: BTreeMap::new() }
    }

    pub fn from_entries(k: usize, entries: impl IntoIterator<Item = (Idx, AlgebraElement)>) -> Tensor {
        let mut t = Tensor::zero(k);
        for (i, c) in entries {
            t.accumulate(i, c);
        }
        t
    }

    /// Single basis slot tuple with coefficient.
    pub fn basis(k: usize, idx: Idx, coeff: AlgebraElement) -> Tensor {
        let mut t = Tensor::zero(k);
        t.accumulate(idx, coeff);
        t
    }

    pub fn accumulate(&mut self, idx: Idx, c: AlgebraElement) {
        assert_eq!(idx.len(), self.k, "index arity mismatch");
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&idx) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.coeffs.remove(&idx);
                } else {
                    *v = s;
                }
            }
            None => {
                self.coeffs.insert(idx, c);
            }
        }
    }

    pub fn coeff(&self, idx: &[u8]) -> Option<&AlgebraElement> {
        self.coeffs.get(idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Idx, &AlgebraElement)> {
        self.coeffs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, rhs: &Tensor) -> Tensor {
        assert_eq!(self.k, rhs.k);
        let mut out = self.clone();
        for (i, c) in rhs.iter() {
            out.accumulate(i.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Tensor {
        Tensor {
            k: self.k,
            coeffs: self.coeffs.iter().map(|(i, c)| (i.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, rhs: &Tensor) -> Tensor {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Tensor {
        let mut out = Tensor::zero(self.k);
        for (i, c) in self.iter() {
            out.accumulate(i.clone(), c.scale(s));
        }
        out
    }

    pub fn scale_rat(&self, r: &Rat) -> Tensor {
        let mut out = Tensor::zero(self.k);
        for (i, c) in self.iter() {
            out.accumulate(i.clone(), c.scale_rat(r));
        }
        out
    }

    pub fn scale_i64(&self, n: i64) -> Tensor {
        self.scale_rat(&Rat::from_integer(BigInt::from(n)))
    }

    /// Right multiplication t·b.
    pub fn mul_right(&self, b: &AlgebraElement) -> Tensor {
        let mut out = Tensor::zero(self.k);
        for (i, c) in self.iter() {
            out.accumulate(i.clone(), c * b);
        }
        out
    }

    /// Sup of coefficient magnitudes; a cheap residual size.
    pub fn norm_sup(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm_sup()).fold(0.0, f64::max)
    }
}

pub fn flat_index(idx: &[u8], n: usize) -> usize {
    idx.iter().fold(0usize, |acc, &i| acc * n + i as usize)
}

pub fn unflat_index(mut f: usize, k: usize, n: usize) -> Idx {
    let mut out = vec![0u8; k];
    for slot in (0..k).rev() {
        out[slot] = (f % n) as u8;
        f /= n;
    }
    out
}

/// Right-module endomorphism of T^k in coordinates: dense N^k × N^k matrix of
/// algebra elements, acting by (O t)_I = Σ_J O[I,J] ∗ t_J.
#[derive(Clone, Debug)]
pub struct ModuleOp {
    pub k: usize,
    pub n: usize,
    entries: Vec<AlgebraElement>,
}

impl ModuleOp {
    pub fn size(&self) -> usize {
        self.n.pow(self.k as u32)
    }

    pub fn zeros(alg: &Algebra, k: usize, n: usize) -> ModuleOp {
        let size = n.pow(k as u32);
        ModuleOp { k, n, entries: vec![alg.zero(); size * size] }
    }

    pub fn identity(alg: &Algebra, k: usize, n: usize) -> ModuleOp {
        let mut op = Self::zeros(alg, k, n);
        let size = op.size();
        for i in 0..size {
            op.entries[i * size + i] = alg.one();
        }
        op
    }

    pub fn from_fn(
        alg: &Algebra,
        k: usize,
        n: usize,
        mut f: impl FnMut(&[u8], &[u8]) -> AlgebraElement,
    ) -> ModuleOp {
        let size = n.pow(k as u32);
        let mut entries = Vec::with_capacity(size * size);
        for r in 0..size {
            let ri = unflat_index(r, k, n);
            for c in 0..size {
                let ci = unflat_index(c, k, n);
                entries.push(f(&ri, &ci));
            }
        }
        let _ = alg;
        ModuleOp { k, n, entries }
    }

    pub fn entry(&self, row: usize, col: usize) -> &AlgebraElement {
        &self.entries[row * self.size() + col]
    }

    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut AlgebraElement {
        let s = self.size();
        &mut self.entries[row * s + col]
    }

    pub fn apply(&self, t: &Tensor) -> Tensor {
        assert_eq!(t.k, self.k, "operator/tensor rank mismatch");
        let size = self.size();
        let mut out = Tensor::zero(self.k);
        for (j_idx, c) in t.iter() {
            let j = flat_index(j_idx, self.n);
            for i in 0..size {
                let e = self.entry(i, j);
                if e.is_zero() {
                    continue;
                }
                out.accumulate(unflat_index(i, self.k, self.n), e * c);
            }
        }
        out
    }

    pub fn compose(&self, rhs: &ModuleOp) -> ModuleOp {
        assert!(self.k == rhs.k && self.n == rhs.n);
        let size = self.size();
        let mut out = Vec::with_capacity(size * size);
        // sparse-aware: most structural operators have very few nonzeros per row
        let rhs_rows: Vec<Vec<(usize, &AlgebraElement)>> = (0..size)
            .map(|r| {
                (0..size)
                    .filter_map(|c| {
                        let e = rhs.entry(r, c);
                        if e.is_zero() {
                            None
                        } else {
                            Some((c, e))
                        }
                    })
                    .collect()
            })
            .collect();
        for i in 0..size {
            let mut row: Vec<Option<AlgebraElement>> = vec![None; size];
            for kk in 0..size {
                let a = self.entry(i, kk);
                if a.is_zero() {
                    continue;
                }
                for (j, b) in &rhs_rows[kk] {
                    let prod = a * *b;
                    row[*j] = Some(match row[*j].take() {
                        Some(acc) => acc.add(&prod),
                        None => prod,
                    });
                }
            }
            for (j, slot) in row.into_iter().enumerate() {
                let _ = j;
                out.push(slot.unwrap_or_else(|| self.entries[0].algebra().zero()));
            }
        }
        ModuleOp { k: self.k, n: self.n, entries: out }
    }

    pub fn add(&self, rhs: &ModuleOp) -> ModuleOp {
        assert!(self.k == rhs.k && self.n == rhs.n);
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a.add(b)).collect();
        ModuleOp { k: self.k, n: self.n, entries }
    }

    pub fn sub(&self, rhs: &ModuleOp) -> ModuleOp {
        assert!(self.k == rhs.k && self.n == rhs.n);
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a.sub(b)).collect();
        ModuleOp { k: self.k, n: self.n, entries }
    }

    pub fn scale_rat(&self, r: &Rat) -> ModuleOp {
        let entries = self.entries.iter().map(|a| a.scale_rat(r)).collect();
        ModuleOp { k: self.k, n: self.n, entries }
    }

    /// Entrywise dagger-transpose. This is the right-inner-product adjoint for
    /// operators in canonical p-sandwiched form (all shipped structural
    /// operators are).
    pub fn dagger_transpose(&self) -> ModuleOp {
        let size = self.size();
        let mut out = self.clone();
        for i in 0..size {
            for j in 0..size {
                *out.entry_mut(i, j) = self.entry(j, i).star_adjoint();
            }
        }
        out
    }

    /// Sup over entries of the coefficient sup-norm of the difference.
    pub fn residual(&self, rhs: &ModuleOp) -> f64 {
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.sub(b).norm_sup())
            .fold(0.0, f64::max)
    }

    pub fn norm_sup(&self) -> f64 {
        self.entries.iter().map(|a| a.norm_sup()).fold(0.0, f64::max)
    }

    /// True when every entry is a constant multiple of the unit.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|e| {
            if let Some(terms) = e.terms() {
                terms.keys().all(|k| *k == [0, 0, 0])
            } else if let Some(g) = e.grid_fn() {
                matches!(g.data, crate::algebra::GridData::Const(_))
            } else {
                false
            }
        })
    }

    pub fn algebra(&self) -> &Algebra {
        self.entries[0].algebra()
    }
}

/// The braiding σ_θ(ω_i⊗ω_j·b) = Θ(d_i,d_j)·ω_j⊗ω_i·b as a constant-coefficient
/// operator on two-tensor coordinates. Requires all frame degrees present.
pub fn sigma_theta_op(alg: &Algebra, degrees: &[Degree]) -> ModuleOp {
    let n = degrees.len();
    let mut op = ModuleOp::zeros(alg, 2, n);
    for i in 0..n {
        for j in 0..n {
            let phase = alg.theta_phase(degrees[i], degrees[j]);
            let row = j * n + i;
            let col = i * n + j;
            *op.entry_mut(row, col) = alg.one().scale(&phase);
        }
    }
    op
}

/// P = Ψ⊗1 and Q = 1⊗Ψ on three-tensor coordinates. The Ψ entry crossing the
/// extra last slot of P is pushed past it with the Θ rule.
pub fn build_pq(alg: &Algebra, psi: &ModuleOp, degrees: &[Degree]) -> (ModuleOp, ModuleOp) {
    let n = psi.n;
    let mut p = ModuleOp::zeros(alg, 3, n);
    let mut q = ModuleOp::zeros(alg, 3, n);
    for a in 0..n {
        for b in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let e = psi.entry(a * n + b, i * n + j);
                    if e.is_zero() {
                        continue;
                    }
                    for c in 0..n {
                        // P: Ψ on slots 1,2; entry passes slot 3 of degree d_c
                        let pe = e.twist_past(degrees[c]);
                        let prow = (a * n + b) * n + c;
                        let pcol = (i * n + j) * n + c;
                        *p.entry_mut(prow, pcol) = p.entry(prow, pcol).add(&pe);
                        // Q: Ψ on slots 2,3; coefficient already rightmost
                        let qrow = (c * n + a) * n + b;
                        let qcol = (c * n + i) * n + j;
                        *q.entry_mut(qrow, qcol) = q.entry(qrow, qcol).add(e);
                    }
                }
            }
        }
    }
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_theta_paper_example() {
        // deg ω₁=(1,0), deg ω₂=(0,1), θ=1/5: σ(ω₁⊗ω₂) = λ^{-1} ω₂⊗ω₁
        let alg = Algebra::laurent_exact(1, 5);
        let degs = [Degree::new(1, 0), Degree::new(0, 1)];
        let s = sigma_theta_op(&alg, &degs);
        let t = Tensor::basis(2, vec![0, 1], alg.one());
        let got = s.apply(&t);
        let want = Tensor::basis(2, vec![1, 0], alg.one().scale(&alg.lambda_pow(-1)));
        assert!(got.sub(&want).norm_sup() == 0.0);
        // σ² = 1 on all basis two-tensors
        let s2 = s.compose(&s);
        let id = ModuleOp::identity(&alg, 2, 2);
        assert_eq!(s2.residual(&id), 0.0);
    }

    #[test]
    fn sigma_theta_flip_on_central_frames() {
        let alg = Algebra::laurent_exact(1, 5);
        let degs = [Degree::ZERO, Degree::ZERO, Degree::ZERO];
        let s = sigma_theta_op(&alg, &degs);
        let t = Tensor::basis(2, vec![0, 2], alg.monomial([1, 1, 0], alg.scalar_i()));
        let got = s.apply(&t);
        let want = Tensor::basis(2, vec![2, 0], alg.monomial([1, 1, 0], alg.scalar_i()));
        assert!(got.sub(&want).norm_sup() == 0.0);
    }

    #[test]
    fn braid_identity_on_all_basis_three_tensors() {
        // (σ⊗1)(1⊗σ)(σ⊗1) = (1⊗σ)(σ⊗1)(1⊗σ) on an 8-element basis of a 2-frame
        let alg = Algebra::laurent_exact(1, 5);
        let degs = [Degree::new(1, 0), Degree::new(0, 1)];
        let s = sigma_theta_op(&alg, &degs);
        let psi = s.add(&ModuleOp::identity(&alg, 2, 2)).scale_rat(&Rat::new(1.into(), 2.into()));
        let (p, q) = build_pq(&alg, &psi, &degs);
        let id3 = ModuleOp::identity(&alg, 3, 2);
        let u = p.scale_rat(&Rat::from_integer(2.into())).sub(&id3);
        let v = q.scale_rat(&Rat::from_integer(2.into())).sub(&id3);
        let lhs = u.compose(&v).compose(&u);
        let rhs = v.compose(&u).compose(&v);
        for f in 0..8usize {
            let t = Tensor::basis(3, unflat_index(f, 3, 2), alg.one());
            let d = lhs.apply(&t).sub(&rhs.apply(&t));
            assert!(d.norm_sup() == 0.0, "braid fails on basis {}", f);
        }
    }

    #[test]
    fn build_pq_identity_psi() {
        let alg = Algebra::laurent_exact(1, 3);
        let degs = [Degree::ZERO, Degree::ZERO];
        let psi = ModuleOp::identity(&alg, 2, 2);
        let (p, q) = build_pq(&alg, &psi, &degs);
        let id3 = ModuleOp::identity(&alg, 3, 2);
        assert_eq!(p.residual(&id3), 0.0);
        assert_eq!(q.residual(&id3), 0.0);
    }
}
