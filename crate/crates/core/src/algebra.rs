//! Graded torus algebras with the 2-cocycle deformation, behind one element type.
//!
//! Three backends:
//!
//! * `Laurent` — the noncommutative torus at parameter θ: finitely supported
//!   coefficients on Z², deformed product `a*b = λ^{n2(a)n1(b)} ab`.
//! * `Fuzzy` — the q×q clock/shift matrix algebra at θ = p/q, graded by
//!   (Z/q)², optionally tensored with a central circle factor (cyclic modes,
//!   degree (0,0)) so that metrics can vary along a central direction.
//!   Elements are stored on the clock/shift monomial basis; the matrix
//!   picture is recovered through [`AlgebraElement::to_clock_shift_matrix`].
//! * `Grid` — complex values sampled on a uniform d-dimensional torus grid,
//!   θ = 0 forced, with per-axis band-limit tracking.
//!
//! The deformed product, adjoint and cocycle are
//!
//! ```text
//! a*b = λ^{n2(a) n1(b)} ab      a† = λ^{n1(a) n2(a)} a*      Θ(m,n) = λ^{m2 n1 − n2 m1}
//! ```
//!
//! extended bilinearly over homogeneous components.

use crate::cyclotomic::{Cyclo, Rat};
use crate::error::CoreError;
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use rustfft::FftPlanner;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Bidegree of a homogeneous element under the torus action.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Degree {
    pub n1: i64,
    pub n2: i64,
}

impl Degree {
    pub const ZERO: Degree = Degree { n1: 0, n2: 0 };

    pub fn new(n1: i64, n2: i64) -> Self {
        Degree { n1, n2 }
    }

    pub fn add(self, other: Degree) -> Degree {
        Degree { n1: self.n1 + other.n1, n2: self.n2 + other.n2 }
    }

    pub fn neg(self) -> Degree {
        Degree { n1: -self.n1, n2: -self.n2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaParam {
    Rational { p: i64, q: i64 },
    Irrational(f64),
}

impl ThetaParam {
    pub fn as_f64(&self) -> f64 {
        match self {
            ThetaParam::Rational { p, q } => *p as f64 / *q as f64,
            ThetaParam::Irrational(t) => *t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarField {
    Exact { order: u32 },
    Approx,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BackendKind {
    Laurent,
    Fuzzy { q: u32, nz: usize },
    Grid { dims: Vec<usize> },
}

#[derive(Debug, PartialEq)]
pub struct AlgebraCtx {
    pub backend: BackendKind,
    pub theta: ThetaParam,
    pub field: ScalarField,
}

/// Shared handle to an algebra context. Cheap to clone; elements carry one.
#[derive(Clone, Debug)]
pub struct Algebra(Arc<AlgebraCtx>);

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        *self.0 == *other.0
    }
}

impl std::ops::Deref for Algebra {
    type Target = AlgebraCtx;
    fn deref(&self) -> &AlgebraCtx {
        &self.0
    }
}

fn lcm4(q: i64) -> u32 {
    (4i64.lcm(&q)) as u32
}

impl Algebra {
    /// Exact Laurent torus at θ = p/q (q ≥ 1). λ lives in Q(ζ_M), M = lcm(4, q).
    pub fn laurent_exact(p: i64, q: i64) -> Algebra {
        assert!(q >= 1, "θ denominator must be positive");
        Algebra(Arc::new(AlgebraCtx {
            backend: BackendKind::Laurent,
            theta: ThetaParam::Rational { p, q },
            field: ScalarField::Exact { order: lcm4(q) },
        }))
    }

    /// Floating Laurent torus at arbitrary θ.
    pub fn laurent_approx(theta: f64) -> Algebra {
        Algebra(Arc::new(AlgebraCtx {
            backend: BackendKind::Laurent,
            theta: ThetaParam::Irrational(theta),
            field: ScalarField::Approx,
        }))
    }

    /// Fuzzy torus at θ = p/q: the q×q clock/shift algebra, graded by (Z/q)²,
    /// with `nz` central circle modes (nz = 1 means no central factor).
    pub fn fuzzy(p: i64, q: u32, nz: usize, exact: bool) -> Algebra {
        assert!(q >= 1 && nz >= 1);
        Algebra(Arc::new(AlgebraCtx {
            backend: BackendKind::Fuzzy { q, nz },
            theta: ThetaParam::Rational { p, q: q as i64 },
            field: if exact {
                ScalarField::Exact { order: lcm4(q as i64) }
            } else {
                ScalarField::Approx
            },
        }))
    }

    /// Sampled commutative torus; θ = 0 forced, complex doubles.
    pub fn grid(dims: Vec<usize>) -> Algebra {
        assert!(!dims.is_empty() && dims.iter().all(|&n| n >= 2));
        Algebra(Arc::new(AlgebraCtx {
            backend: BackendKind::Grid { dims },
            theta: ThetaParam::Rational { p: 0, q: 1 },
            field: ScalarField::Approx,
        }))
    }

    /// Number of derivation axes.
    pub fn axes(&self) -> usize {
        match &self.backend {
            BackendKind::Laurent => 2,
            BackendKind::Fuzzy { nz, .. } => {
                if *nz > 1 {
                    3
                } else {
                    2
                }
            }
            BackendKind::Grid { dims } => dims.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.field, ScalarField::Exact { .. })
    }

    pub fn scalar_zero(&self) -> Scalar {
        match self.field {
            ScalarField::Exact { order } => Scalar::Exact(Cyclo::zero(order)),
            ScalarField::Approx => Scalar::Approx(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn scalar_one(&self) -> Scalar {
        match self.field {
            ScalarField::Exact { order } => Scalar::Exact(Cyclo::one(order)),
            ScalarField::Approx => Scalar::Approx(Complex64::new(1.0, 0.0)),
        }
    }

    pub fn scalar_i(&self) -> Scalar {
        match self.field {
            ScalarField::Exact { order } => Scalar::Exact(Cyclo::zeta_pow(order, order as i64 / 4)),
            ScalarField::Approx => Scalar::Approx(Complex64::new(0.0, 1.0)),
        }
    }

    pub fn scalar_from_rat(&self, r: &Rat) -> Scalar {
        match self.field {
            ScalarField::Exact { order } => Scalar::Exact(Cyclo::from_rational(order, r.clone())),
            ScalarField::Approx => {
                Scalar::Approx(Complex64::new(crate::cyclotomic::rat_to_f64(r), 0.0))
            }
        }
    }

    pub fn scalar_from_i64(&self, n: i64) -> Scalar {
        self.scalar_from_rat(&Rat::from_integer(BigInt::from(n)))
    }

    /// λ^e, exact when the field is.
    pub fn lambda_pow(&self, e: i64) -> Scalar {
        match (self.field, self.theta) {
            (ScalarField::Exact { order }, ThetaParam::Rational { p, q }) => {
                let step = (order as i64 / q) * p;
                Scalar::Exact(Cyclo::zeta_pow(order, step * e))
            }
            (ScalarField::Approx, theta) => {
                let ang = std::f64::consts::TAU * theta.as_f64() * e as f64;
                Scalar::Approx(Complex64::new(ang.cos(), ang.sin()))
            }
            (ScalarField::Exact { .. }, ThetaParam::Irrational(_)) => {
                unreachable!("exact field requires rational θ")
            }
        }
    }

    /// The cocycle Θ(m,n) = λ^{m2·n1 − n2·m1}.
    pub fn theta_phase(&self, m: Degree, n: Degree) -> Scalar {
        self.lambda_pow(m.n2 * n.n1 - n.n2 * m.n1)
    }

    /// The deformed inner product of homogeneous one-forms from the
    /// undeformed one: ⟨ω,η⟩_θ = λ^{(n1(ω)−n1(η))·n2(ω)} ⟨ω,η⟩.
    pub fn theta_deform_pairing(
        &self,
        omega_deg: Degree,
        eta_deg: Degree,
        undeformed: &AlgebraElement,
    ) -> AlgebraElement {
        let phase = self.lambda_pow((omega_deg.n1 - eta_deg.n1) * omega_deg.n2);
        undeformed.scale(&phase)
    }

    /// Balanced residue reduction of a monomial key for this backend.
    fn norm_key(&self, k: [i64; 3]) -> [i64; 3] {
        match &self.backend {
            BackendKind::Laurent => {
                debug_assert!(k[2] == 0, "Laurent backend has 2 axes");
                k
            }
            BackendKind::Fuzzy { q, nz } => {
                [bal(k[0], *q as i64), bal(k[1], *q as i64), bal(k[2], *nz as i64)]
            }
            BackendKind::Grid { .. } => panic!("grid backend has no monomial keys"),
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        match &self.backend {
            BackendKind::Grid { .. } => AlgebraElement {
                algebra: self.clone(),
                repr: Repr::Grid(GridFn { data: GridData::Const(Complex64::new(0.0, 0.0)), band: Band::limited_zero(self) }),
            },
            _ => AlgebraElement { algebra: self.clone(), repr: Repr::Graded(BTreeMap::new()) },
        }
    }

    pub fn one(&self) -> AlgebraElement {
        match &self.backend {
            BackendKind::Grid { .. } => self.grid_const(Complex64::new(1.0, 0.0)),
            _ => self.monomial([0, 0, 0], self.scalar_one()),
        }
    }

    /// e_{(n1,n2,n3)} with the given coefficient (graded backends).
    pub fn monomial(&self, key: [i64; 3], coeff: Scalar) -> AlgebraElement {
        let mut m = BTreeMap::new();
        if !coeff.is_zero() {
            m.insert(self.norm_key(key), coeff);
        }
        AlgebraElement { algebra: self.clone(), repr: Repr::Graded(m) }
    }

    pub fn grid_const(&self, v: Complex64) -> AlgebraElement {
        AlgebraElement {
            algebra: self.clone(),
            repr: Repr::Grid(GridFn { data: GridData::Const(v), band: Band::limited_zero(self) }),
        }
    }

    /// Grid element from per-point values (row-major, last axis fastest).
    pub fn grid_from_values(&self, values: Vec<Complex64>, band: Band) -> AlgebraElement {
        let BackendKind::Grid { dims } = &self.backend else {
            panic!("grid_from_values on non-grid backend")
        };
        assert_eq!(values.len(), dims.iter().product::<usize>());
        AlgebraElement {
            algebra: self.clone(),
            repr: Repr::Grid(GridFn { data: GridData::Dense(Arc::new(values)), band }),
        }
    }

    /// Grid element synthesised from trigonometric monomials Σ c·e^{i k·x}.
    pub fn grid_from_modes(&self, modes: &[([i64; 3], Complex64)]) -> AlgebraElement {
        let BackendKind::Grid { dims } = &self.backend else {
            panic!("grid_from_modes on non-grid backend")
        };
        let dims = dims.clone();
        let total: usize = dims.iter().product();
        let mut values = vec![Complex64::new(0.0, 0.0); total];
        let mut band = vec![0usize; dims.len()];
        for (k, _c) in modes {
            for (ax, d) in dims.iter().enumerate() {
                let b = k[ax].unsigned_abs() as usize;
                assert!(b <= (d - 1) / 2, "mode exceeds Nyquist");
                band[ax] = band[ax].max(b);
            }
        }
        for (idx, slot) in values.iter_mut().enumerate() {
            let coords = unindex(idx, &dims);
            for (k, c) in modes {
                let mut ang = 0.0f64;
                for ax in 0..dims.len() {
                    ang += std::f64::consts::TAU * (k[ax] as f64) * (coords[ax] as f64)
                        / (dims[ax] as f64);
                }
                *slot += c * Complex64::new(ang.cos(), ang.sin());
            }
        }
        self.grid_from_values(values, Band::Limited(band))
    }
}

fn bal(n: i64, m: i64) -> i64 {
    if m <= 1 {
        return 0;
    }
    let mut r = n.rem_euclid(m);
    if r > m / 2 {
        r -= m;
    }
    r
}

fn unindex(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for ax in (0..dims.len()).rev() {
        out[ax] = idx % dims[ax];
        idx /= dims[ax];
    }
    out
}

/// Per-axis band-limit bookkeeping for the grid backend.
#[derive(Clone, Debug, PartialEq)]
pub enum Band {
    /// Known per-axis maximal |frequency|.
    Limited(Vec<usize>),
    /// Smooth but not band-limited (inverses, square roots). Products with
    /// such elements cannot alias-check and are allowed.
    Smooth,
}

impl Band {
    fn limited_zero(alg: &Algebra) -> Band {
        match &alg.backend {
            BackendKind::Grid { dims } => Band::Limited(vec![0; dims.len()]),
            _ => Band::Limited(vec![0; 3]),
        }
    }
}

#[derive(Clone, Debug)]
pub enum GridData {
    Const(Complex64),
    Dense(Arc<Vec<Complex64>>),
}

#[derive(Clone, Debug)]
pub struct GridFn {
    pub data: GridData,
    pub band: Band,
}

#[derive(Clone, Debug)]
enum Repr {
    Graded(BTreeMap<[i64; 3], Scalar>),
    Grid(GridFn),
}

/// An element of one of the three backends; immutable value semantics.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    algebra: Algebra,
    repr: Repr,
}

impl AlgebraElement {
    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Graded(m) => m.is_empty(),
            Repr::Grid(g) => match &g.data {
                GridData::Const(v) => v.re == 0.0 && v.im == 0.0,
                GridData::Dense(v) => v.iter().all(|z| z.re == 0.0 && z.im == 0.0),
            },
        }
    }

    /// Sup of coefficient magnitudes (grid: over points). A cheap residual size.
    pub fn norm_sup(&self) -> f64 {
        match &self.repr {
            Repr::Graded(m) => m.values().map(|s| s.abs()).fold(0.0, f64::max),
            Repr::Grid(g) => match &g.data {
                GridData::Const(v) => v.norm(),
                GridData::Dense(v) => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
            },
        }
    }

    pub fn terms(&self) -> Option<&BTreeMap<[i64; 3], Scalar>> {
        match &self.repr {
            Repr::Graded(m) => Some(m),
            Repr::Grid(_) => None,
        }
    }

    pub fn grid_fn(&self) -> Option<&GridFn> {
        match &self.repr {
            Repr::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn add(&self, rhs: &AlgebraElement) -> AlgebraElement {
        assert!(self.algebra == rhs.algebra, "algebra mismatch in add");
        match (&self.repr, &rhs.repr) {
            (Repr::Graded(a), Repr::Graded(b)) => {
                let mut out = a.clone();
                for (k, v) in b {
                    let entry = out.entry(*k).or_insert_with(|| self.algebra.scalar_zero());
                    *entry = entry.add(v);
                }
                out.retain(|_, v| !v.is_zero());
                AlgebraElement { algebra: self.algebra.clone(), repr: Repr::Graded(out) }
            }
            (Repr::Grid(a), Repr::Grid(b)) => {
                let band = band_join(&a.band, &b.band, false, &self.algebra).expect("add never aliases");
                let data = grid_zip(&self.algebra, a, b, |x, y| x + y);
                AlgebraElement { algebra: self.algebra.clone(), repr: Repr::Grid(GridFn { data, band }) }
            }
            _ => unreachable!("repr mismatch within one algebra"),
        }
    }

    pub fn neg(&self) -> AlgebraElement {
        self.scale(&self.algebra.scalar_from_i64(-1))
    }

    pub fn sub(&self, rhs: &AlgebraElement) -> AlgebraElement {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &Scalar) -> AlgebraElement {
        match &self.repr {
            Repr::Graded(m) => {
                let mut out = BTreeMap::new();
                for (k, v) in m {
                    let w = v.mul(c);
                    if !w.is_zero() {
                        out.insert(*k, w);
                    }
                }
                AlgebraElement { algebra: self.algebra.clone(), repr: Repr::Graded(out) }
            }
            Repr::Grid(g) => {
                let z = c.to_complex();
                let data = grid_map(g, |x| x * z);
                AlgebraElement {
                    algebra: self.algebra.clone(),
                    repr: Repr::Grid(GridFn { data, band: g.band.clone() }),
                }
            }
        }
    }

    pub fn scale_rat(&self, r: &Rat) -> AlgebraElement {
        self.scale(&self.algebra.scalar_from_rat(r))
    }

    /// The deformed product, checking backend compatibility.
    pub fn checked_mul(&self, rhs: &AlgebraElement) -> Result<AlgebraElement, CoreError> {
        if self.algebra != rhs.algebra {
            return Err(CoreError::BackendMismatch(format!(
                "{:?} vs {:?}",
                self.algebra.backend, rhs.algebra.backend
            )));
        }
        match (&self.repr, &rhs.repr) {
            (Repr::Graded(a), Repr::Graded(b)) => {
                let alg = &self.algebra;
                let mut out: BTreeMap<[i64; 3], Scalar> = BTreeMap::new();
                for (m, am) in a {
                    for (n, bn) in b {
                        let phase = alg.lambda_pow(m[1] * n[0]);
                        let coeff = phase.mul(am).mul(bn);
                        if coeff.is_zero() {
                            continue;
                        }
                        let key = alg.norm_key([m[0] + n[0], m[1] + n[1], m[2] + n[2]]);
                        let entry = out.entry(key).or_insert_with(|| alg.scalar_zero());
                        *entry = entry.add(&coeff);
                    }
                }
                out.retain(|_, v| !v.is_zero());
                Ok(AlgebraElement { algebra: alg.clone(), repr: Repr::Graded(out) })
            }
            (Repr::Grid(a), Repr::Grid(b)) => {
                let band = band_join(&a.band, &b.band, true, &self.algebra)?;
                let data = grid_zip(&self.algebra, a, b, |x, y| x * y);
                Ok(AlgebraElement {
                    algebra: self.algebra.clone(),
                    repr: Repr::Grid(GridFn { data, band }),
                })
            }
            _ => unreachable!(),
        }
    }

    /// The deformed adjoint a† = λ^{n1 n2} a*.
    pub fn star_adjoint(&self) -> AlgebraElement {
        match &self.repr {
            Repr::Graded(m) => {
                let alg = &self.algebra;
                let mut out = BTreeMap::new();
                for (k, v) in m {
                    let phase = alg.lambda_pow(k[0] * k[1]);
                    let coeff = phase.mul(&v.conj());
                    let key = alg.norm_key([-k[0], -k[1], -k[2]]);
                    if !coeff.is_zero() {
                        out.insert(key, coeff);
                    }
                }
                AlgebraElement { algebra: alg.clone(), repr: Repr::Graded(out) }
            }
            Repr::Grid(g) => {
                let data = grid_map(g, |x| x.conj());
                AlgebraElement {
                    algebra: self.algebra.clone(),
                    repr: Repr::Grid(GridFn { data, band: g.band.clone() }),
                }
            }
        }
    }

    /// δ_j: on a homogeneous component of degree n, multiplication by i·n_j.
    /// Grid backend: spectral differentiation along axis j.
    pub fn derivation(&self, axis: usize) -> AlgebraElement {
        assert!(axis < self.algebra.axes(), "derivation axis out of range");
        match &self.repr {
            Repr::Graded(m) => {
                let alg = &self.algebra;
                let i = alg.scalar_i();
                let mut out = BTreeMap::new();
                for (k, v) in m {
                    let n = k[axis];
                    if n == 0 {
                        continue;
                    }
                    let coeff = v.mul(&i).mul(&alg.scalar_from_i64(n));
                    if !coeff.is_zero() {
                        out.insert(*k, coeff);
                    }
                }
                AlgebraElement { algebra: alg.clone(), repr: Repr::Graded(out) }
            }
            Repr::Grid(g) => {
                let BackendKind::Grid { dims } = &self.algebra.backend else { unreachable!() };
                match &g.data {
                    GridData::Const(_) => self.algebra.zero(),
                    GridData::Dense(v) => {
                        let out = spectral_derivative(v, dims, axis);
                        AlgebraElement {
                            algebra: self.algebra.clone(),
                            repr: Repr::Grid(GridFn {
                                data: GridData::Dense(Arc::new(out)),
                                band: g.band.clone(),
                            }),
                        }
                    }
                }
            }
        }
    }

    /// Finite homogeneous decomposition; parts carry disjoint degrees and sum
    /// back to the element. Grid elements are a single degree-(0,0) part.
    pub fn homogeneous_parts(&self) -> Vec<(Degree, AlgebraElement)> {
        match &self.repr {
            Repr::Grid(_) => {
                if self.is_zero() {
                    vec![]
                } else {
                    vec![(Degree::ZERO, self.clone())]
                }
            }
            Repr::Graded(m) => {
                let mut groups: BTreeMap<(i64, i64), BTreeMap<[i64; 3], Scalar>> = BTreeMap::new();
                for (k, v) in m {
                    groups.entry((k[0], k[1])).or_default().insert(*k, v.clone());
                }
                groups
                    .into_iter()
                    .map(|((n1, n2), terms)| {
                        (
                            Degree::new(n1, n2),
                            AlgebraElement { algebra: self.algebra.clone(), repr: Repr::Graded(terms) },
                        )
                    })
                    .collect()
            }
        }
    }

    /// The common degree if the element is homogeneous (zero counts as (0,0)).
    pub fn degree(&self) -> Option<Degree> {
        let parts = self.homogeneous_parts();
        match parts.len() {
            0 => Some(Degree::ZERO),
            1 => Some(parts[0].0),
            _ => None,
        }
    }

    /// Returns a' with a ∗ x = x ∗ a' for every homogeneous x of degree d,
    /// i.e. each homogeneous part picks up Θ(part, d).
    pub fn twist_past(&self, d: Degree) -> AlgebraElement {
        if d == Degree::ZERO {
            return self.clone();
        }
        match &self.repr {
            Repr::Grid(_) => self.clone(),
            Repr::Graded(m) => {
                let alg = &self.algebra;
                let mut out = BTreeMap::new();
                for (k, v) in m {
                    let ph = alg.theta_phase(Degree::new(k[0], k[1]), d);
                    let coeff = ph.mul(v);
                    if !coeff.is_zero() {
                        out.insert(*k, coeff);
                    }
                }
                AlgebraElement { algebra: alg.clone(), repr: Repr::Graded(out) }
            }
        }
    }

    /// Exact structural equality (canonical forms compare directly).
    pub fn eq_exact(&self, rhs: &AlgebraElement) -> bool {
        self.sub(rhs).is_zero()
    }

    // ---- grid-specific helpers ----

    pub fn grid_values(&self) -> Vec<Complex64> {
        let BackendKind::Grid { dims } = &self.algebra.backend else {
            panic!("grid_values on non-grid element")
        };
        let total: usize = dims.iter().product();
        match &self.repr {
            Repr::Grid(g) => match &g.data {
                GridData::Const(v) => vec![*v; total],
                GridData::Dense(v) => v.as_ref().clone(),
            },
            _ => unreachable!(),
        }
    }

    /// Pointwise inverse (grid). Result is band-untracked (`Smooth`).
    pub fn pointwise_inv(&self) -> AlgebraElement {
        let Repr::Grid(g) = &self.repr else { panic!("pointwise_inv on non-grid element") };
        match &g.data {
            GridData::Const(v) => {
                let mut out = self.algebra.grid_const(1.0 / v);
                if let Repr::Grid(gf) = &mut out.repr {
                    gf.band = Band::Limited(match &self.algebra.backend {
                        BackendKind::Grid { dims } => vec![0; dims.len()],
                        _ => unreachable!(),
                    });
                }
                out
            }
            GridData::Dense(v) => {
                let vals: Vec<Complex64> = v.iter().map(|z| 1.0 / z).collect();
                AlgebraElement {
                    algebra: self.algebra.clone(),
                    repr: Repr::Grid(GridFn { data: GridData::Dense(Arc::new(vals)), band: Band::Smooth }),
                }
            }
        }
    }

    /// Pointwise principal square root (grid).
    pub fn pointwise_sqrt(&self) -> AlgebraElement {
        let Repr::Grid(g) = &self.repr else { panic!("pointwise_sqrt on non-grid element") };
        let data = grid_map(g, |z| z.sqrt());
        let band = match &g.data {
            GridData::Const(_) => g.band.clone(),
            _ => Band::Smooth,
        };
        AlgebraElement { algebra: self.algebra.clone(), repr: Repr::Grid(GridFn { data, band }) }
    }

    // ---- fuzzy-specific helpers ----

    /// Is this element supported on central keys only (n1 = n2 = 0)?
    pub fn is_central_modes(&self) -> bool {
        match &self.repr {
            Repr::Graded(m) => m.keys().all(|k| k[0] == 0 && k[1] == 0),
            Repr::Grid(_) => true,
        }
    }

    /// Values of a central (degree-(0,0)) fuzzy element on the nz circle points.
    pub fn central_values(&self) -> Vec<Complex64> {
        let BackendKind::Fuzzy { nz, .. } = self.algebra.backend else {
            panic!("central_values on non-fuzzy element")
        };
        assert!(self.is_central_modes(), "element has non-central components");
        let mut vals = vec![Complex64::new(0.0, 0.0); nz];
        if let Repr::Graded(m) = &self.repr {
            for (k, c) in m {
                let z = c.to_complex();
                for (p, slot) in vals.iter_mut().enumerate() {
                    let ang = std::f64::consts::TAU * (k[2] as f64) * (p as f64) / (nz as f64);
                    *slot += z * Complex64::new(ang.cos(), ang.sin());
                }
            }
        }
        vals
    }

    /// Central element from circle-point values (inverse DFT), approx scalars.
    pub fn central_from_values(alg: &Algebra, vals: &[Complex64]) -> AlgebraElement {
        let BackendKind::Fuzzy { nz, .. } = alg.backend else {
            panic!("central_from_values on non-fuzzy algebra")
        };
        assert_eq!(vals.len(), nz);
        let mut out = BTreeMap::new();
        for kk in 0..nz {
            let k = bal(kk as i64, nz as i64);
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, v) in vals.iter().enumerate() {
                let ang = -std::f64::consts::TAU * (kk as f64) * (p as f64) / (nz as f64);
                acc += v * Complex64::new(ang.cos(), ang.sin());
            }
            acc /= nz as f64;
            if acc.norm() > 0.0 {
                out.insert([0, 0, k], Scalar::Approx(acc));
            }
        }
        AlgebraElement { algebra: alg.clone(), repr: Repr::Graded(out) }
    }

    /// Pointwise inverse of a central fuzzy element along the circle factor.
    pub fn central_inverse(&self) -> AlgebraElement {
        let vals: Vec<Complex64> = self.central_values().iter().map(|z| 1.0 / z).collect();
        Self::central_from_values(&self.algebra, &vals)
    }

    /// Pointwise square root of a central fuzzy element.
    pub fn central_sqrt(&self) -> AlgebraElement {
        let vals: Vec<Complex64> = self.central_values().iter().map(|z| z.sqrt()).collect();
        Self::central_from_values(&self.algebra, &vals)
    }

    /// The q×q matrix of a pure fuzzy element (nz = 1) on the clock/shift
    /// representation π(e_{(a,b)}) = C^a S^b, entries exact when the field is.
    pub fn to_clock_shift_matrix(&self) -> Vec<Vec<Scalar>> {
        let BackendKind::Fuzzy { q, nz } = self.algebra.backend else {
            panic!("to_clock_shift_matrix on non-fuzzy element")
        };
        assert_eq!(nz, 1, "matrix form requires a pure fuzzy element");
        let q = q as i64;
        let alg = &self.algebra;
        let mut mat = vec![vec![alg.scalar_zero(); q as usize]; q as usize];
        if let Repr::Graded(m) = &self.repr {
            for (k, c) in m {
                let (a, b) = (k[0], k[1]);
                // (C^a S^b) e_j = λ^{a·(j−b)} e_{j−b}
                for j in 0..q {
                    let row = (j - b).rem_euclid(q) as usize;
                    let phase = alg.lambda_pow(a * (j - b));
                    let val = phase.mul(c);
                    mat[row][j as usize] = mat[row][j as usize].add(&val);
                }
            }
        }
        mat
    }

    /// Inverse of [`Self::to_clock_shift_matrix`]: exact clock/shift basis
    /// expansion of a q×q matrix.
    pub fn from_clock_shift_matrix(alg: &Algebra, mat: &[Vec<Scalar>]) -> AlgebraElement {
        let BackendKind::Fuzzy { q, nz } = alg.backend else {
            panic!("from_clock_shift_matrix on non-fuzzy algebra")
        };
        assert_eq!(nz, 1);
        let qi = q as i64;
        let inv_q = alg.scalar_from_rat(&Rat::new(BigInt::from(1), BigInt::from(qi)));
        let mut acc = alg.zero();
        for a in 0..qi {
            for b in 0..qi {
                // coefficient = (1/q) Σ_j λ^{-a(j-b)} M[(j-b) mod q][j]
                let mut coeff = alg.scalar_zero();
                for j in 0..qi {
                    let row = (j - b).rem_euclid(qi) as usize;
                    let ph = alg.lambda_pow(-a * (j - b));
                    coeff = coeff.add(&ph.mul(&mat[row][j as usize]));
                }
                coeff = coeff.mul(&inv_q);
                if !coeff.is_zero() {
                    acc = acc.add(&alg.monomial([a, b, 0], coeff));
                }
            }
        }
        acc
    }

    /// Complex q×q matrix of a fuzzy element evaluated at circle point `zp`.
    pub fn fuzzy_matrix_at(&self, zp: usize) -> crate::cmatrix::CMatrix {
        let BackendKind::Fuzzy { q, nz } = self.algebra.backend else {
            panic!("fuzzy_matrix_at on non-fuzzy element")
        };
        let q = q as i64;
        let mut m = crate::cmatrix::CMatrix::zeros(q as usize, q as usize);
        if let Repr::Graded(terms) = &self.repr {
            for (k, c) in terms {
                let (a, b) = (k[0], k[1]);
                let ang = std::f64::consts::TAU * (k[2] as f64) * (zp as f64) / (nz as f64);
                let zval = c.to_complex() * Complex64::new(ang.cos(), ang.sin());
                for j in 0..q {
                    let row = (j - b).rem_euclid(q) as usize;
                    let phase = self.algebra.lambda_pow(a * (j - b)).to_complex();
                    *m.at_mut(row, j as usize) += phase * zval;
                }
            }
        }
        m
    }
}

impl<'a> std::ops::Mul for &'a AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &'a AlgebraElement) -> AlgebraElement {
        self.checked_mul(rhs).expect("deformed product failed")
    }
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_exact(other)
    }
}

fn band_join(a: &Band, b: &Band, product: bool, alg: &Algebra) -> Result<Band, CoreError> {
    match (a, b) {
        (Band::Limited(x), Band::Limited(y)) => {
            let BackendKind::Grid { dims } = &alg.backend else {
                return Ok(Band::Limited(x.clone()));
            };
            let mut out = Vec::with_capacity(x.len());
            for ax in 0..x.len() {
                let v = if product { x[ax] + y[ax] } else { x[ax].max(y[ax]) };
                let nyquist = (dims[ax] - 1) / 2;
                if product && v > nyquist {
                    return Err(CoreError::BandLimit { axis: ax, band: v, nyquist });
                }
                out.push(v.min(nyquist));
            }
            Ok(Band::Limited(out))
        }
        _ => Ok(Band::Smooth),
    }
}

fn grid_map(g: &GridFn, f: impl Fn(Complex64) -> Complex64) -> GridData {
    match &g.data {
        GridData::Const(v) => GridData::Const(f(*v)),
        GridData::Dense(v) => GridData::Dense(Arc::new(v.iter().map(|z| f(*z)).collect())),
    }
}

fn grid_zip(
    alg: &Algebra,
    a: &GridFn,
    b: &GridFn,
    f: impl Fn(Complex64, Complex64) -> Complex64,
) -> GridData {
    match (&a.data, &b.data) {
        (GridData::Const(x), GridData::Const(y)) => GridData::Const(f(*x, *y)),
        (GridData::Const(x), GridData::Dense(y)) => {
            GridData::Dense(Arc::new(y.iter().map(|z| f(*x, *z)).collect()))
        }
        (GridData::Dense(x), GridData::Const(y)) => {
            GridData::Dense(Arc::new(x.iter().map(|z| f(*z, *y)).collect()))
        }
        (GridData::Dense(x), GridData::Dense(y)) => {
            let BackendKind::Grid { dims } = &alg.backend else { unreachable!() };
            debug_assert_eq!(x.len(), dims.iter().product::<usize>());
            GridData::Dense(Arc::new(x.iter().zip(y.iter()).map(|(p, q)| f(*p, *q)).collect()))
        }
    }
}

/// Spectral derivative along `axis` for a dense grid function.
fn spectral_derivative(values: &[Complex64], dims: &[usize], axis: usize) -> Vec<Complex64> {
    let n = dims[axis];
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let bwd = planner.plan_fft_inverse(n);

    // stride of the axis and number of pencils
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let inner = stride;
    let mut out = values.to_vec();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for (j, b) in buf.iter_mut().enumerate() {
                *b = out[base + j * stride];
            }
            fwd.process(&mut buf);
            for (j, b) in buf.iter_mut().enumerate() {
                let k = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                // standard convention: Nyquist mode derivative set to zero
                let k = if n % 2 == 0 && j == n / 2 { 0 } else { k };
                *b *= Complex64::new(0.0, k as f64);
            }
            bwd.process(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                out[base + j * stride] = b / (n as f64);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nc5() -> Algebra {
        Algebra::laurent_exact(1, 5)
    }

    #[test]
    fn theta_phase_paper_value() {
        // θ = 1/5: Θ((1,0),(0,1)) = λ^{0·0 − 1·1} = λ^{-1} = λ^4
        let a = nc5();
        let got = a.theta_phase(Degree::new(1, 0), Degree::new(0, 1));
        assert_eq!(got, a.lambda_pow(-1));
        assert_eq!(got, a.lambda_pow(4));
    }

    #[test]
    fn theta_phase_antisymmetric_diagonal() {
        let a = nc5();
        for m in [Degree::new(2, 3), Degree::new(-1, 4)] {
            assert_eq!(a.theta_phase(m, m), a.scalar_one());
        }
    }

    #[test]
    fn theta_phase_exponent_arithmetic_vs_complex() {
        // θ = 1/3: Θ((2,1),(1,2)) = λ^{1·1 − 2·2} = λ^{-3} = 1,
        // cross-checked against e^{2πiθ(-3)}.
        let a = Algebra::laurent_exact(1, 3);
        let got = a.theta_phase(Degree::new(2, 1), Degree::new(1, 2));
        assert_eq!(got, a.scalar_one());
        let direct = Complex64::from_polar(1.0, std::f64::consts::TAU * (1.0 / 3.0) * -3.0);
        assert!((got.to_complex() - direct).norm() < 1e-12);
    }

    #[test]
    fn star_mul_monomials() {
        let alg = nc5();
        let a = alg.monomial([1, 0, 0], alg.scalar_one());
        let b = alg.monomial([0, 1, 0], alg.scalar_one());
        // a*b: λ^{n2(a)n1(b)} = λ^0, degree adds
        let ab = &a * &b;
        assert_eq!(ab, alg.monomial([1, 1, 0], alg.scalar_one()));
        // unit
        assert_eq!(&alg.one() * &b, b);
        // b*a = λ^{1·1} e_{(1,1)} and a*b = Θ(a,b)·(b*a)
        let ba = &b * &a;
        assert_eq!(ba, alg.monomial([1, 1, 0], alg.lambda_pow(1)));
        let theta = alg.theta_phase(Degree::new(1, 0), Degree::new(0, 1));
        assert_eq!(ab, ba.scale(&theta));
    }

    #[test]
    fn star_adjoint_examples() {
        let alg = nc5();
        // deg (1,1): a† = λ^{1·1} conj · e_{(-1,-1)}
        let a = alg.monomial([1, 1, 0], alg.scalar_one());
        assert_eq!(a.star_adjoint(), alg.monomial([-1, -1, 0], alg.lambda_pow(1)));
        // involution
        assert_eq!(a.star_adjoint().star_adjoint(), a);
        // deg (1,0): zero exponent
        let b = alg.monomial([1, 0, 0], alg.scalar_one());
        assert_eq!(b.star_adjoint(), alg.monomial([-1, 0, 0], alg.scalar_one()));
    }

    #[test]
    fn star_adjoint_antimultiplicative() {
        let alg = nc5();
        let a = alg
            .monomial([1, 2, 0], alg.lambda_pow(2))
            .add(&alg.monomial([0, 1, 0], alg.scalar_from_i64(3)));
        let b = alg
            .monomial([-1, 1, 0], alg.scalar_one())
            .add(&alg.monomial([2, 0, 0], alg.scalar_i()));
        let lhs = (&a * &b).star_adjoint();
        let rhs = &b.star_adjoint() * &a.star_adjoint();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivation_unit_and_monomial() {
        let alg = nc5();
        assert!(alg.one().derivation(1).is_zero());
        let u = alg.monomial([1, 0, 0], alg.scalar_one());
        // δ_0(u) = i·u  (classical oracle: ∂_x e^{ix} = i e^{ix})
        assert_eq!(u.derivation(0), u.scale(&alg.scalar_i()));
        assert!(u.derivation(1).is_zero());
    }

    #[test]
    fn derivation_leibniz() {
        let alg = nc5();
        let a = alg
            .monomial([1, 0, 0], alg.scalar_from_i64(2))
            .add(&alg.monomial([0, 1, 0], alg.scalar_i()));
        let b = alg
            .monomial([1, 1, 0], alg.scalar_one())
            .add(&alg.monomial([-1, 0, 0], alg.scalar_from_i64(5)));
        for ax in 0..2 {
            let lhs = (&a * &b).derivation(ax);
            let rhs = (&a.derivation(ax) * &b).add(&(&a * &b.derivation(ax)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn homogeneous_parts_basics() {
        let alg = nc5();
        let one = alg.one();
        let parts = one.homogeneous_parts();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, Degree::ZERO);
        assert_eq!(parts[0].1, one);

        let x = alg
            .monomial([1, 0, 0], alg.scalar_one())
            .add(&alg.monomial([0, 2, 0], alg.scalar_i()));
        let parts = x.homogeneous_parts();
        assert_eq!(parts.len(), 2);
        let sum = parts.iter().fold(alg.zero(), |acc, (_, p)| acc.add(p));
        assert_eq!(sum, x);
    }

    #[test]
    fn fuzzy_clock_shift_roundtrip_and_parts() {
        // q = 3: clock + shift as a matrix expands to parts at (1,0) and (0,1)
        let alg = Algebra::fuzzy(1, 3, 1, true);
        let clock = alg.monomial([1, 0, 0], alg.scalar_one());
        let shift = alg.monomial([0, 1, 0], alg.scalar_one());
        let sum = clock.add(&shift);
        let mat = sum.to_clock_shift_matrix();
        let back = AlgebraElement::from_clock_shift_matrix(&alg, &mat);
        assert_eq!(back, sum);
        let parts = back.homogeneous_parts();
        let degs: Vec<Degree> = parts.iter().map(|(d, _)| *d).collect();
        assert_eq!(degs, vec![Degree::new(0, 1), Degree::new(1, 0)]);
    }

    #[test]
    fn fuzzy_matrix_representation_is_homomorphism() {
        // π(a*b) = π(a)π(b) and π(a†) = π(a)^*, SC = λCS convention
        let alg = Algebra::fuzzy(1, 5, 1, true);
        let a = alg
            .monomial([1, 0, 0], alg.scalar_one())
            .add(&alg.monomial([2, 3, 0], alg.scalar_i()));
        let b = alg
            .monomial([0, 1, 0], alg.scalar_from_i64(2))
            .add(&alg.monomial([-1, 1, 0], alg.lambda_pow(3)));
        let pa = a.fuzzy_matrix_at(0);
        let pb = b.fuzzy_matrix_at(0);
        let pab = (&a * &b).fuzzy_matrix_at(0);
        assert!(pa.mul(&pb).sub(&pab).sup_norm() < 1e-12);
        let padag = a.star_adjoint().fuzzy_matrix_at(0);
        assert!(pa.adjoint().sub(&padag).sup_norm() < 1e-12);
        // SC = λ CS
        let c = alg.monomial([1, 0, 0], alg.scalar_one()).fuzzy_matrix_at(0);
        let s = alg.monomial([0, 1, 0], alg.scalar_one()).fuzzy_matrix_at(0);
        let lam = alg.lambda_pow(1).to_complex();
        assert!(s.mul(&c).sub(&c.mul(&s).scale(lam)).sup_norm() < 1e-12);
    }

    #[test]
    fn grid_spectral_derivative_exact_on_band_limited() {
        let alg = Algebra::grid(vec![16]);
        // f = 2 + cos x, df = -sin x
        let f = alg.grid_from_modes(&[
            ([0, 0, 0], Complex64::new(2.0, 0.0)),
            ([1, 0, 0], Complex64::new(0.5, 0.0)),
            ([-1, 0, 0], Complex64::new(0.5, 0.0)),
        ]);
        let df = f.derivation(0);
        let expect = alg.grid_from_modes(&[
            ([1, 0, 0], Complex64::new(0.0, 0.5)),
            ([-1, 0, 0], Complex64::new(0.0, -0.5)),
        ]);
        assert!(df.sub(&expect).norm_sup() < 1e-12);
    }

    #[test]
    fn grid_band_limit_is_enforced() {
        let alg = Algebra::grid(vec![8]);
        let f = alg.grid_from_modes(&[([3, 0, 0], Complex64::new(1.0, 0.0))]);
        let err = f.checked_mul(&f);
        assert!(matches!(err, Err(CoreError::BandLimit { .. })));
        // but products with smooth (untracked) elements are allowed
        let g = f.pointwise_inv();
        assert!(f.checked_mul(&g).is_ok());
    }

    #[test]
    fn exact_and_approx_backends_agree() {
        let ex = Algebra::laurent_exact(1, 5);
        let ap = Algebra::laurent_approx(0.2);
        let to_ap = |e: &AlgebraElement| {
            let mut acc = ap.zero();
            for (k, v) in e.terms().unwrap() {
                acc = acc.add(&ap.monomial(*k, Scalar::Approx(v.to_complex())));
            }
            acc
        };
        let a = ex
            .monomial([1, 2, 0], ex.lambda_pow(1))
            .add(&ex.monomial([0, -1, 0], ex.scalar_from_i64(3)));
        let b = ex.monomial([2, 1, 0], ex.scalar_i()).add(&ex.one());
        let exact_prod = to_ap(&(&a * &b));
        let approx_prod = &to_ap(&a) * &to_ap(&b);
        assert!(exact_prod.sub(&approx_prod).norm_sup() < 1e-12);
        let exact_dag = to_ap(&a.star_adjoint());
        let approx_dag = to_ap(&a).star_adjoint();
        assert!(exact_dag.sub(&approx_dag).norm_sup() < 1e-12);
    }

    #[test]
    fn theta_bicharacter() {
        let alg = nc5();
        let m1 = Degree::new(1, 2);
        let m2 = Degree::new(-2, 1);
        let n = Degree::new(3, -1);
        let lhs = alg.theta_phase(m1.add(m2), n);
        let rhs = alg.theta_phase(m1, n).mul(&alg.theta_phase(m2, n));
        assert_eq!(lhs, rhs);
        // Θ(n,m) = conj Θ(m,n) = Θ(m,n)^{-1}
        let t = alg.theta_phase(m1, n);
        assert_eq!(alg.theta_phase(n, m1), t.conj());
        assert_eq!(t.mul(&t.conj()), alg.scalar_one());
    }
}
