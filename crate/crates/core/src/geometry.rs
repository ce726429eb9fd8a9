//! Hermitian differential structures presented by a finite frame.
//!
//! A `Geometry` bundles an algebra, a frame description (degrees, dagger
//! matrix, Gram matrix, coframe, frame differentials, optional universal-lift
//! corrections) and the junk projection Ψ. Everything downstream — the
//! differential on the algebra and on one-forms, the quantum metric, inner
//! products, the α raising/lowering maps and the dagger on tensors — is
//! computed from this presented data in right frame coordinates.

use crate::algebra::{Algebra, AlgebraElement, BackendKind, Degree};
use crate::cyclotomic::Rat;
use crate::error::CoreError;
use crate::tensor::{build_pq, flat_index, sigma_theta_op, ModuleOp, Tensor};
use once_cell::sync::OnceCell;
use serde::Serialize;

/// Frame data: ω_j† = Σ_i ω_i D[i][j], gram g[i][j] = ⟨ω_i, ω_j⟩,
/// coframe dx^μ = Σ_j ω_j C[j][μ], per-label differentials d(ω_j) ∈ Λ².
#[derive(Clone, Debug)]
pub struct FrameSpec {
    pub size: usize,
    pub degrees: Vec<Option<Degree>>,
    /// N×N row-major, [i][j] entry at i*size+j.
    pub dagger: Vec<AlgebraElement>,
    /// N×N row-major.
    pub gram: Vec<AlgebraElement>,
    /// N×axes row-major, [j][mu] at j*axes+mu.
    pub coframe: Vec<AlgebraElement>,
    /// N two-tensors d(ω_j).
    pub differentials: Vec<Tensor>,
    /// Universal-lift corrections T_j (None for closed frames).
    pub lift_corrections: Option<Vec<Tensor>>,
}

/// How Ψ is obtained.
pub enum PsiSpec {
    /// Ψ = (1 + σ_θ)/2 from the frame degrees.
    SigmaTheta,
    /// Presented explicitly; must pass validation.
    Explicit(ModuleOp),
}

pub struct Geometry {
    pub name: String,
    pub algebra: Algebra,
    pub frame: FrameSpec,
    pub psi: ModuleOp,
    /// Absolute tolerance for floating backends; exact backends compare literally.
    pub tol: f64,
    gram_cache: [OnceCell<ModuleOp>; 3],
    sigma_cache: OnceCell<Option<ModuleOp>>,
    pq_cache: OnceCell<(ModuleOp, ModuleOp)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn failed_names(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// One junk generator with its Ψ-membership verdict.
#[derive(Clone, Debug)]
pub struct JunkGenerator {
    pub tensor: Tensor,
    pub in_psi_image: bool,
    pub residual: f64,
}

impl Geometry {
    pub fn new(
        name: impl Into<String>,
        algebra: Algebra,
        frame: FrameSpec,
        psi: PsiSpec,
    ) -> Result<Geometry, CoreError> {
        let n = frame.size;
        let axes = algebra.axes();
        if frame.degrees.len() != n
            || frame.dagger.len() != n * n
            || frame.gram.len() != n * n
            || frame.coframe.len() != n * axes
            || frame.differentials.len() != n
        {
            return Err(CoreError::Malformed(format!(
                "frame arrays inconsistent with size {} and {} axes",
                n, axes
            )));
        }
        if let Some(lifts) = &frame.lift_corrections {
            if lifts.len() != n {
                return Err(CoreError::Malformed("lift corrections length".into()));
            }
        }
        for d in &frame.differentials {
            if d.k != 2 {
                return Err(CoreError::Malformed("frame differentials must be two-tensors".into()));
            }
        }
        let psi = match psi {
            PsiSpec::Explicit(op) => {
                if op.k != 2 || op.n != n {
                    return Err(CoreError::Malformed("Ψ operator has wrong shape".into()));
                }
                op
            }
            PsiSpec::SigmaTheta => {
                let degs = homogeneous_degrees(&frame)?;
                let sigma = sigma_theta_op(&algebra, &degs);
                sigma
                    .add(&ModuleOp::identity(&algebra, 2, n))
                    .scale_rat(&Rat::new(1.into(), 2.into()))
            }
        };
        Ok(Geometry {
            name: name.into(),
            algebra,
            frame,
            psi,
            tol: 1e-10,
            gram_cache: [OnceCell::new(), OnceCell::new(), OnceCell::new()],
            sigma_cache: OnceCell::new(),
            pq_cache: OnceCell::new(),
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn size(&self) -> usize {
        self.frame.size
    }

    /// Degree of a frame label (zero when unspecified; only θ=0 geometries may
    /// leave degrees unspecified, which validation enforces).
    pub fn slot_degree(&self, label: u8) -> Degree {
        self.frame.degrees[label as usize].unwrap_or(Degree::ZERO)
    }

    pub fn idx_degree(&self, idx: &[u8]) -> Degree {
        idx.iter().fold(Degree::ZERO, |acc, &i| acc.add(self.slot_degree(i)))
    }

    fn dagger_entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.frame.dagger[i * self.frame.size + j]
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.frame.gram[i * self.frame.size + j]
    }

    pub fn coframe_entry(&self, j: usize, mu: usize) -> &AlgebraElement {
        &self.frame.coframe[j * self.algebra.axes() + mu]
    }

    /// ω_j as a one-form.
    pub fn basis_one_form(&self, j: u8) -> Tensor {
        Tensor::basis(1, vec![j], self.algebra.one())
    }

    /// ω_j† = Σ_i ω_i D[i][j] as a one-form.
    pub fn dagger_one_form(&self, j: u8) -> Tensor {
        let mut t = Tensor::zero(1);
        for i in 0..self.frame.size {
            let e = self.dagger_entry(i, j as usize);
            if !e.is_zero() {
                t.accumulate(vec![i as u8], e.clone());
            }
        }
        t
    }

    /// Induced Gram matrix on T^k (cached).
    pub fn gram_op(&self, k: usize) -> &ModuleOp {
        assert!((1..=3).contains(&k));
        self.gram_cache[k - 1].get_or_init(|| {
            let n = self.frame.size;
            if k == 1 {
                return ModuleOp::from_fn(&self.algebra, 1, n, |r, c| {
                    self.gram_entry(r[0] as usize, c[0] as usize).clone()
                });
            }
            let prev = self.gram_op(k - 1).clone();
            // g_k[(i,I'),(j,J')] = g_{k-1}[I',J'] * twist(g1[i,j], deg J')
            ModuleOp::from_fn(&self.algebra, k, n, |r, c| {
                let (i, rrest) = (r[0], &r[1..]);
                let (j, crest) = (c[0], &c[1..]);
                let gprev = prev.entry(flat_index(rrest, n), flat_index(crest, n));
                if gprev.is_zero() {
                    return self.algebra.zero();
                }
                let g1 = self.gram_entry(i as usize, j as usize);
                if g1.is_zero() {
                    return self.algebra.zero();
                }
                gprev * &g1.twist_past(self.idx_degree(crest))
            })
        })
    }

    /// Canonical right-coordinate form: coordinates projected by the induced
    /// Gram matrix, so equal module elements have equal coordinate maps.
    pub fn canon(&self, t: &Tensor) -> Tensor {
        if t.is_empty() {
            return t.clone();
        }
        self.gram_op(t.k).apply(t)
    }

    /// Exact-or-tolerance equality through canonical forms. Returns residual.
    pub fn residual(&self, a: &Tensor, b: &Tensor) -> f64 {
        self.canon(&a.sub(b)).norm_sup()
    }

    pub fn eq_tensor(&self, a: &Tensor, b: &Tensor) -> bool {
        let r = self.residual(a, b);
        if self.algebra.is_exact() {
            r == 0.0
        } else {
            r <= self.tol
        }
    }

    pub fn is_zero_tensor(&self, t: &Tensor) -> bool {
        self.eq_tensor(t, &Tensor::zero(t.k))
    }

    /// Left multiplication b·t routed through the Θ-commutation rule.
    pub fn mul_left(&self, b: &AlgebraElement, t: &Tensor) -> Tensor {
        let mut out = Tensor::zero(t.k);
        for (i, c) in t.iter() {
            let pushed = b.twist_past(self.idx_degree(i));
            out.accumulate(i.clone(), &pushed * c);
        }
        out
    }

    /// Balanced tensor product t1 ⊗ t2 (coefficients of t1 pushed past t2's slots).
    pub fn tensor_product(&self, t1: &Tensor, t2: &Tensor) -> Tensor {
        let mut out = Tensor::zero(t1.k + t2.k);
        for (i, c1) in t1.iter() {
            for (j, c2) in t2.iter() {
                let pushed = c1.twist_past(self.idx_degree(j));
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                out.accumulate(idx, &pushed * c2);
            }
        }
        out
    }

    /// The antilinear dagger on T^k: reverses slots, maps labels through the
    /// dagger matrix, conjugates and pushes coefficients.
    pub fn tensor_dagger(&self, t: &Tensor) -> Tensor {
        let mut out = Tensor::zero(t.k);
        for (idx, c) in t.iter() {
            // (ω_I · c)† = c† · (ω_{i_k}† ⊗ … ⊗ ω_{i_1}†)
            let mut prod: Option<Tensor> = None;
            for &i in idx.iter().rev() {
                let d = self.dagger_one_form(i);
                prod = Some(match prod {
                    None => d,
                    Some(p) => self.tensor_product(&p, &d),
                });
            }
            let prod = prod.expect("rank ≥ 1");
            let term = self.mul_left(&c.star_adjoint(), &prod);
            for (j, v) in term.iter() {
                out.accumulate(j.clone(), v.clone());
            }
        }
        self.canon(&out)
    }

    /// B-valued inner product ⟨s,t⟩ = Σ s_I† · g_k[I,J] · t_J.
    pub fn inner_product(&self, s: &Tensor, t: &Tensor) -> AlgebraElement {
        assert_eq!(s.k, t.k);
        let g = self.gram_op(s.k);
        let n = self.frame.size;
        let mut acc = self.algebra.zero();
        for (i, ci) in s.iter() {
            let row = flat_index(i, n);
            for (j, cj) in t.iter() {
                let gij = g.entry(row, flat_index(j, n));
                if gij.is_zero() {
                    continue;
                }
                acc = acc.add(&(&(&ci.star_adjoint() * gij) * cj));
            }
        }
        acc
    }

    /// The pairing ⟨y, x⊗ω⟩ = ⟨y,x⟩·ω : Ω¹ × T² → Ω¹.
    pub fn pairing_12(&self, y: &Tensor, t: &Tensor) -> Tensor {
        assert!(y.k == 1 && t.k == 2);
        let n = self.frame.size;
        let mut out = Tensor::zero(1);
        for i in 0..n {
            let mut rho = Tensor::zero(1);
            for (idx, c) in t.iter() {
                if idx[0] as usize == i {
                    rho.accumulate(vec![idx[1]], c.clone());
                }
            }
            if rho.is_empty() {
                continue;
            }
            let pair = self.inner_product(y, &self.basis_one_form(i as u8));
            if pair.is_zero() {
                continue;
            }
            let term = self.mul_left(&pair, &rho);
            out = out.add(&term);
        }
        self.canon(&out)
    }

    /// The pairing ⟨x⊗ω, y⟩ = ω†·⟨x,y⟩ : T² × Ω¹ → Ω¹.
    pub fn pairing_21(&self, t: &Tensor, y: &Tensor) -> Tensor {
        assert!(t.k == 2 && y.k == 1);
        let n = self.frame.size;
        let mut out = Tensor::zero(1);
        for i in 0..n {
            let mut rho = Tensor::zero(1);
            for (idx, c) in t.iter() {
                if idx[0] as usize == i {
                    rho.accumulate(vec![idx[1]], c.clone());
                }
            }
            if rho.is_empty() {
                continue;
            }
            let pair = self.inner_product(&self.basis_one_form(i as u8), y);
            if pair.is_zero() {
                continue;
            }
            out = out.add(&self.tensor_dagger(&rho).mul_right(&pair));
        }
        self.canon(&out)
    }

    /// α(A)(w) = Σ ω_I ⟨(ω_j c)†, w⟩ contracting the last slot of A against w.
    pub fn alpha_apply(&self, a: &Tensor, w: &Tensor) -> Tensor {
        assert!(a.k >= 2 && w.k == 1);
        let w = self.canon(w);
        let n = self.frame.size;
        let mut out = Tensor::zero(a.k - 1);
        for (idx, c) in a.iter() {
            let j = idx[a.k - 1] as usize;
            let head = idx[..a.k - 1].to_vec();
            for aa in 0..n {
                let dentry = self.dagger_entry(aa, j);
                if dentry.is_zero() {
                    continue;
                }
                let wa = match w.coeff(&[aa as u8]) {
                    Some(v) => v,
                    None => continue,
                };
                // (ω_j c)† = Σ_a ω_a · (twist(c†, d_a) * D[a][j]);
                // ⟨ω_a coeff, w⟩ = coeff† * w_a for canonical w
                let coeff = &c.star_adjoint().twist_past(self.slot_degree(aa as u8)) * dentry;
                out.accumulate(head.clone(), &coeff.star_adjoint() * wa);
            }
        }
        self.canon(&out)
    }

    /// α⁻¹ of a right-module map given by its values on the frame:
    /// Σ_j T(ω_j) ⊗ ω_j†.
    pub fn alpha_inv(&self, values: &[Tensor]) -> Tensor {
        assert_eq!(values.len(), self.frame.size);
        let k = values[0].k;
        let mut out = Tensor::zero(k + 1);
        for (j, v) in values.iter().enumerate() {
            let tail = self.dagger_one_form(j as u8);
            let term = self.tensor_product(v, &tail);
            for (i, c) in term.iter() {
                out.accumulate(i.clone(), c.clone());
            }
        }
        self.canon(&out)
    }

    /// Left-handed α: contracts the FIRST slot, α⃖(x⊗y)(w) = ⟨w†, x⟩·y.
    pub fn alpha_left_apply(&self, a: &Tensor, w: &Tensor) -> Tensor {
        assert!(a.k >= 2 && w.k == 1);
        let wdag = self.tensor_dagger(w);
        let _n = self.frame.size;
        let mut out = Tensor::zero(a.k - 1);
        for (idx, c) in a.iter() {
            let i = idx[0];
            let rest = idx[1..].to_vec();
            // ⟨w†, ω_i⟩
            let mut pair = self.algebra.zero();
            for (wi, wc) in wdag.iter() {
                let g = self.gram_entry(wi[0] as usize, i as usize);
                if !g.is_zero() {
                    pair = pair.add(&(&wc.star_adjoint() * g));
                }
            }
            if pair.is_zero() {
                continue;
            }
            let term = self.mul_left(&pair, &Tensor::basis(rest.len(), rest, c.clone()));
            for (jj, v) in term.iter() {
                out.accumulate(jj.clone(), v.clone());
            }
        }
        self.canon(&out)
    }

    /// σ_θ built from the frame degrees (cached). Errors when a degree is missing.
    pub fn sigma_theta(&self) -> Result<ModuleOp, CoreError> {
        let cached = self.sigma_cache.get_or_init(|| {
            homogeneous_degrees(&self.frame)
                .ok()
                .map(|degs| sigma_theta_op(&self.algebra, &degs))
        });
        cached.clone().ok_or(CoreError::NonHomogeneousFrame)
    }

    /// The braiding used by certification: σ_θ when the frame degrees allow it,
    /// otherwise 2Ψ−1.
    pub fn braiding(&self) -> ModuleOp {
        match self.sigma_theta() {
            Ok(s) => s,
            Err(_) => {
                let id = ModuleOp::identity(&self.algebra, 2, self.frame.size);
                self.psi.scale_rat(&Rat::from_integer(2.into())).sub(&id)
            }
        }
    }

    /// P = Ψ⊗1 and Q = 1⊗Ψ on three-tensors (cached).
    pub fn pq_ops(&self) -> &(ModuleOp, ModuleOp) {
        self.pq_cache.get_or_init(|| {
            let degs: Vec<Degree> =
                (0..self.frame.size).map(|j| self.slot_degree(j as u8)).collect();
            build_pq(&self.algebra, &self.psi, &degs)
        })
    }

    pub fn one_minus_psi(&self, t: &Tensor) -> Tensor {
        t.sub(&self.psi.apply(t))
    }

    /// d(b) = Σ_{j,μ} ω_j · (C[j][μ] ∗ δ_μ(b)).
    pub fn differential0(&self, b: &AlgebraElement) -> Tensor {
        let axes = self.algebra.axes();
        let mut out = Tensor::zero(1);
        for mu in 0..axes {
            let db = b.derivation(mu);
            if db.is_zero() {
                continue;
            }
            for j in 0..self.frame.size {
                let c = self.coframe_entry(j, mu);
                if c.is_zero() {
                    continue;
                }
                out.accumulate(vec![j as u8], c * &db);
            }
        }
        self.canon(&out)
    }

    /// Lifted exterior derivative on one-forms:
    /// d(Σ ω_j b_j) = Σ [ d(ω_j)·b_j − (1−Ψ)(ω_j ⊗ d b_j) ].
    pub fn exterior_d(&self, omega: &Tensor) -> Tensor {
        assert_eq!(omega.k, 1);
        let cc = self.canon(omega);
        let mut acc = Tensor::zero(2);
        for (idx, b) in cc.iter() {
            let j = idx[0];
            let term1 = self.frame.differentials[j as usize].mul_right(b);
            let db = self.differential0(b);
            let t2 = self.tensor_product(&self.basis_one_form(j), &db);
            let term2 = self.one_minus_psi(&t2);
            acc = acc.add(&term1).sub(&term2);
        }
        self.canon(&acc)
    }

    /// Quantum metric G = Σ_j ω_j ⊗ ω_j†.
    pub fn quantum_metric(&self) -> Tensor {
        let mut out = Tensor::zero(2);
        for j in 0..self.frame.size {
            let term = self.tensor_product(&self.basis_one_form(j as u8), &self.dagger_one_form(j as u8));
            out = out.add(&term);
        }
        self.canon(&out)
    }

    /// Whether all frame differentials vanish.
    pub fn frame_is_closed(&self) -> bool {
        self.frame.differentials.iter().all(|d| self.is_zero_tensor(d))
    }

    /// Junk generators {∇_T(d b) : b ∈ bs} with ∇_T(η) = ∇^v(η) − Σ_j T_j⟨ω_j,η⟩.
    pub fn junk_from_connection(
        &self,
        bs: &[AlgebraElement],
    ) -> Result<Vec<JunkGenerator>, CoreError> {
        let lifts = match &self.frame.lift_corrections {
            Some(l) => l.clone(),
            None => {
                if self.frame_is_closed() {
                    vec![Tensor::zero(2); self.frame.size]
                } else {
                    return Err(CoreError::MissingLifts);
                }
            }
        };
        let mut out = Vec::new();
        for b in bs {
            let db = self.differential0(b);
            // ∇^v(db) = Σ_j ω_j ⊗ d(coords_j)
            let mut nv = Tensor::zero(2);
            for (idx, c) in db.iter() {
                let d = self.differential0(c);
                let term = self.tensor_product(&self.basis_one_form(idx[0]), &d);
                nv = nv.add(&term);
            }
            for (idx, c) in db.iter() {
                let j = idx[0] as usize;
                nv = nv.sub(&lifts[j].mul_right(c));
            }
            let gen = self.canon(&nv);
            if self.is_zero_tensor(&gen) {
                continue;
            }
            let res = self.residual(&self.psi.apply(&gen), &gen);
            let ok = if self.algebra.is_exact() { res == 0.0 } else { res <= self.tol };
            out.push(JunkGenerator { tensor: gen, in_psi_image: ok, residual: res });
        }
        Ok(out)
    }

    /// Upper bound for the C*-norm of an algebra element in the faithful
    /// representation where one exists (fuzzy blocks, grid points); exact
    /// Laurent elements fall back to the summed coefficient bound.
    pub fn algebra_norm(&self, a: &AlgebraElement) -> f64 {
        match &self.algebra.backend {
            BackendKind::Grid { .. } => a.norm_sup(),
            BackendKind::Fuzzy { nz, .. } => (0..*nz)
                .map(|zp| a.fuzzy_matrix_at(zp).spectral_norm())
                .fold(0.0, f64::max),
            BackendKind::Laurent => match a.terms() {
                Some(m) => m.values().map(|s| s.abs()).sum(),
                None => a.norm_sup(),
            },
        }
    }

    /// Hilbert-module norm ‖t‖ = ‖⟨t,t⟩‖^{1/2}.
    pub fn hilbert_norm(&self, t: &Tensor) -> f64 {
        let ip = self.inner_product(t, t);
        self.algebra_norm(&ip).max(0.0).sqrt()
    }

    /// Run the full validation suite.
    pub fn validate(&self) -> ValidationReport {
        let mut checks: Vec<CheckResult> = Vec::new();
        let n = self.frame.size;
        let exact = self.algebra.is_exact();
        let pass = |r: f64| if exact { r == 0.0 } else { r <= self.tol };
        let push = |name: &str, residual: f64, checks: &mut Vec<CheckResult>| {
            checks.push(CheckResult { name: name.into(), passed: pass(residual), residual });
        };

        // degrees present when the deformation is non-trivial
        let theta_nontrivial = self.algebra.theta.as_f64() != 0.0;
        if theta_nontrivial {
            let missing = self.frame.degrees.iter().any(|d| d.is_none());
            checks.push(CheckResult {
                name: "frame degrees present".into(),
                passed: !missing,
                residual: if missing { 1.0 } else { 0.0 },
            });
        }

        // gram idempotent and self-adjoint
        let g1 = self.gram_op(1).clone();
        push("gram idempotent", g1.compose(&g1).residual(&g1), &mut checks);
        push("gram self-adjoint", g1.dagger_transpose().residual(&g1), &mut checks);

        // dagger involutive on the frame basis
        let mut r = 0.0f64;
        for j in 0..n {
            let d = self.dagger_one_form(j as u8);
            let dd = self.tensor_dagger(&d);
            r = r.max(self.residual(&dd, &self.basis_one_form(j as u8)));
        }
        push("dagger involutive", r, &mut checks);

        // frame relation on a generating test set: frame elements, coframe columns
        let mut r = 0.0f64;
        let mut test_forms: Vec<Tensor> = (0..n).map(|j| self.basis_one_form(j as u8)).collect();
        for mu in 0..self.algebra.axes() {
            let mut t = Tensor::zero(1);
            for j in 0..n {
                t.accumulate(vec![j as u8], self.coframe_entry(j, mu).clone());
            }
            test_forms.push(t);
        }
        for t in &test_forms {
            let c = self.canon(t);
            r = r.max(self.residual(&self.canon(&c), &c));
            // Σ_j ω_j ⟨ω_j, t⟩ in coordinates is exactly gram·coords
            r = r.max(self.residual(&self.gram_op(1).apply(&c), &c));
        }
        push("frame relation", r, &mut checks);

        // Ψ idempotent
        push("psi idempotent", self.psi.compose(&self.psi).residual(&self.psi), &mut checks);

        // Ψ commutes with dagger on basis two-tensors
        let mut r = 0.0f64;
        for i in 0..n * n {
            let t = Tensor::basis(2, crate::tensor::unflat_index(i, 2, n), self.algebra.one());
            let a = self.tensor_dagger(&self.psi.apply(&t));
            let b = self.psi.apply(&self.tensor_dagger(&t));
            r = r.max(self.residual(&a, &b));
        }
        push("psi dagger-commutes", r, &mut checks);

        // Ψ self-adjoint for the induced inner product
        let mut r = 0.0f64;
        for i in 0..n * n {
            let s = Tensor::basis(2, crate::tensor::unflat_index(i, 2, n), self.algebra.one());
            for j in 0..n * n {
                let t = Tensor::basis(2, crate::tensor::unflat_index(j, 2, n), self.algebra.one());
                let lhs = self.inner_product(&self.psi.apply(&s), &t);
                let rhs = self.inner_product(&s, &self.psi.apply(&t));
                r = r.max(self.algebra_residual(&lhs, &rhs));
            }
        }
        push("psi self-adjoint", r, &mut checks);

        // Ψ is a bimodule map: Ψ(b·t) = b·Ψ(t) on generators
        let mut r = 0.0f64;
        for b in self.generator_elements() {
            for i in 0..n * n {
                let t = Tensor::basis(2, crate::tensor::unflat_index(i, 2, n), self.algebra.one());
                let lhs = self.psi.apply(&self.mul_left(&b, &t));
                let rhs = self.mul_left(&b, &self.psi.apply(&t));
                r = r.max(self.residual(&lhs, &rhs));
            }
        }
        push("psi bimodule map", r, &mut checks);

        // Ψ respects the module (commutes with canonicalisation)
        let mut r = 0.0f64;
        for i in 0..n * n {
            let t = Tensor::basis(2, crate::tensor::unflat_index(i, 2, n), self.algebra.one());
            let a = self.canon(&self.psi.apply(&t));
            let b = self.psi.apply(&self.canon(&t));
            r = r.max(self.residual(&a, &b));
        }
        push("psi well-defined on module", r, &mut checks);

        // frame differentials lie in Λ²
        let mut r = 0.0f64;
        for d in &self.frame.differentials {
            r = r.max(self.residual(&self.one_minus_psi(d), d));
        }
        push("frame differentials in Λ²", r, &mut checks);

        // d(ω_j†) = (d ω_j)†
        let mut r = 0.0f64;
        for j in 0..n {
            let lhs = self.exterior_d(&self.dagger_one_form(j as u8));
            let rhs = self.tensor_dagger(&self.frame.differentials[j]);
            r = r.max(self.residual(&lhs, &rhs));
        }
        push("differential dagger-compatible", r, &mut checks);

        // deformed reality of the inner product: ⟨ω_i,ω_j⟩ = Θ(d_i,d_j)⟨ω_j†,ω_i†⟩
        let mut r = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let lhs = self.gram_entry(i, j).clone();
                let th = self
                    .algebra
                    .theta_phase(self.slot_degree(i as u8), self.slot_degree(j as u8));
                let rhs = self
                    .inner_product(&self.dagger_one_form(j as u8), &self.dagger_one_form(i as u8))
                    .scale(&th);
                r = r.max(self.algebra_residual(&lhs, &rhs));
            }
        }
        push("inner product dagger-reality", r, &mut checks);

        // d∘d = 0 on generators
        let mut r = 0.0f64;
        for b in self.generator_elements() {
            let ddb = self.exterior_d(&self.differential0(&b));
            r = r.max(self.residual(&ddb, &Tensor::zero(2)));
        }
        push("d∘d = 0 on generators", r, &mut checks);

        let ok = checks.iter().all(|c| c.passed);
        ValidationReport { ok, checks }
    }

    pub fn algebra_residual(&self, a: &AlgebraElement, b: &AlgebraElement) -> f64 {
        a.sub(b).norm_sup()
    }

    /// A small generating set of the algebra for property checks.
    pub fn generator_elements(&self) -> Vec<AlgebraElement> {
        let alg = &self.algebra;
        match &alg.backend {
            BackendKind::Grid { dims } => {
                let mut out = vec![alg.one()];
                for ax in 0..dims.len() {
                    let mut key = [0i64; 3];
                    key[ax] = 1;
                    out.push(alg.grid_from_modes(&[(key, num_complex::Complex64::new(1.0, 0.0))]));
                }
                out
            }
            _ => {
                let mut out = vec![alg.one()];
                let axes = alg.axes();
                for ax in 0..axes {
                    let mut key = [0i64; 3];
                    key[ax] = 1;
                    out.push(alg.monomial(key, alg.scalar_one()));
                    key[ax] = -1;
                    out.push(alg.monomial(key, alg.scalar_one()));
                }
                out
            }
        }
    }
}

fn homogeneous_degrees(frame: &FrameSpec) -> Result<Vec<Degree>, CoreError> {
    frame
        .degrees
        .iter()
        .map(|d| d.ok_or(CoreError::NonHomogeneousFrame))
        .collect()
}
