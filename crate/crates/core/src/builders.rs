//! Canonical geometry constructions.
//!
//! * flat classical torus T² (exact Laurent at θ = 0),
//! * flat noncommutative torus at θ = p/q presented by a homogeneous
//!   †-invariant twisted frame (Laurent or fuzzy backend),
//! * curved geometries from a diagonal metric with central coefficients
//!   (grid backend, or fuzzy ⊗ central circle).
//!
//! Frames are assembled in two passes: a provisional geometry without
//! differentials supplies the coordinate calculus, from which the honest
//! frame differentials d(ω_j) = −(1−Ψ)(dx^μ ⊗ d E_{μj}) and the universal
//! lift corrections T_j are computed, and the geometry is then rebuilt.

use crate::algebra::{Algebra, AlgebraElement, BackendKind, Degree};
use crate::cyclotomic::Rat;
use crate::error::CoreError;
use crate::geometry::{FrameSpec, Geometry, PsiSpec};
use crate::tensor::Tensor;
use num_complex::Complex64;

/// Trig-monomial description of a central algebra element.
pub type Modes = Vec<([i64; 3], Complex64)>;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum LiftMode {
    /// Closed frame: T_j = 0.
    Zero,
    /// T_j = Σ_μ [ T_{dx^μ}·E_{μj} − dx^μ ⊗ d(E_{μj}) ] with T_{dx^μ} = −i dx^μ⊗dx^μ.
    Honest,
}

/// Flat classical T²: exact Laurent backend at θ = 0, closed orthonormal
/// coordinate frame (dx, dy).
pub fn flat_t2() -> Geometry {
    let alg = Algebra::laurent_exact(0, 1);
    let e = identity_vielbein(&alg, 2);
    build_vielbein_geometry("flat-t2", alg, 2, &e, central_degrees(2), LiftMode::Zero)
        .expect("flat T² construction")
}

/// Flat noncommutative torus at θ = p/q on the exact Laurent backend,
/// presented by the homogeneous †-invariant frame
/// (dx·v, dx·v⁻¹, dy·u, dy·u⁻¹) with non-constant Gram.
pub fn flat_nc_torus(p: i64, q: i64) -> Geometry {
    let alg = Algebra::laurent_exact(p, q);
    twisted_torus_geometry(&format!("flat-nc-torus-{}-{}", p, q), alg)
        .expect("flat NC torus construction")
}

/// The same twisted frame on the exact fuzzy backend (pure M_q, nz = 1).
pub fn fuzzy_flat(p: i64, q: u32) -> Geometry {
    let alg = Algebra::fuzzy(p, q, 1, true);
    twisted_torus_geometry(&format!("fuzzy-flat-q{}", q), alg).expect("fuzzy flat construction")
}

/// Curved classical T³ on the grid backend with metric
/// diag((2+cos z)², (2+½ sin z)², 1).
pub fn curved_t3_grid(n: usize) -> Geometry {
    let alg = Algebra::grid(vec![n, n, n]);
    let metric = standard_t3_metric();
    geometry_from_diag_metric("curved-t3-grid", alg, &metric).expect("curved T³ construction")
}

/// Curved fuzzy torus: x,y fuzzified at θ = 1/5 (q = 5), the metric varying
/// along the central circle (nz modes), same diagonal metric as the grid T³.
pub fn fuzzy_q5_curved(nz: usize) -> Geometry {
    let alg = Algebra::fuzzy(1, 5, nz, false);
    let metric = standard_t3_metric();
    geometry_from_diag_metric("fuzzy-q5-curved", alg, &metric).expect("curved fuzzy construction")
}

/// diag((2+cos z)², (2+½ sin z)², 1) as mode lists along the last axis.
pub fn standard_t3_metric() -> Vec<Modes> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    vec![
        // (2+cos z)^2 = 4.5 + 4 cos z + 0.5 cos 2z
        vec![
            ([0, 0, 0], c(4.5, 0.0)),
            ([0, 0, 1], c(2.0, 0.0)),
            ([0, 0, -1], c(2.0, 0.0)),
            ([0, 0, 2], c(0.25, 0.0)),
            ([0, 0, -2], c(0.25, 0.0)),
        ],
        // (2+0.5 sin z)^2 = 4.125 + 2 sin z - 0.125 cos 2z
        vec![
            ([0, 0, 0], c(4.125, 0.0)),
            ([0, 0, 1], c(0.0, -1.0)),
            ([0, 0, -1], c(0.0, 1.0)),
            ([0, 0, 2], c(-0.0625, 0.0)),
            ([0, 0, -2], c(-0.0625, 0.0)),
        ],
        vec![([0, 0, 0], c(1.0, 0.0))],
    ]
}

fn central_degrees(n: usize) -> Vec<Option<Degree>> {
    vec![Some(Degree::ZERO); n]
}

fn identity_vielbein(alg: &Algebra, axes: usize) -> Vec<AlgebraElement> {
    let mut e = vec![alg.zero(); axes * axes];
    for mu in 0..axes {
        e[mu * axes + mu] = alg.one();
    }
    e
}

/// Build a geometry from a vielbein E (axes×N row-major): ω_j = Σ_μ dx^μ E_{μj},
/// with ⟨dx^μ, dx^ν⟩ determined by the requirement that (ω_j) is a frame.
/// Supports the two shipped shapes: identity/diagonal E (orthonormal frames,
/// ⟨dx^μ,dx^ν⟩ = δ·f⁻²) and the twisted monomial frame (⟨dx^μ,dx^ν⟩ = ½δ).
fn build_vielbein_geometry(
    name: &str,
    alg: Algebra,
    n: usize,
    e: &[AlgebraElement],
    degrees: Vec<Option<Degree>>,
    lifts: LiftMode,
) -> Result<Geometry, CoreError> {
    let axes = alg.axes();
    assert_eq!(e.len(), axes * n);

    // Orthonormal closed coordinate frame: everything constant.
    let mut dagger = vec![alg.zero(); n * n];
    for j in 0..n {
        dagger[j * n + j] = alg.one().neg();
    }
    let mut gram = vec![alg.zero(); n * n];
    for j in 0..n {
        gram[j * n + j] = alg.one();
    }
    let mut coframe = vec![alg.zero(); n * axes];
    for mu in 0..axes.min(n) {
        coframe[mu * axes + mu] = alg.one();
    }
    let frame0 = FrameSpec {
        size: n,
        degrees,
        dagger,
        gram,
        coframe,
        differentials: vec![Tensor::zero(2); n],
        lift_corrections: None,
    };
    finalize_geometry(name, alg, frame0, e, lifts)
}

/// Second pass: compute differentials and lifts from the vielbein with the
/// provisional geometry's calculus, then rebuild.
fn finalize_geometry(
    name: &str,
    alg: Algebra,
    frame0: FrameSpec,
    e: &[AlgebraElement],
    lifts: LiftMode,
) -> Result<Geometry, CoreError> {
    let geo0 = Geometry::new(name, alg.clone(), frame0.clone(), PsiSpec::SigmaTheta)?;
    let axes = alg.axes();
    let n = frame0.size;

    // coordinate one-forms ξ^μ in frame coordinates
    let xi: Vec<Tensor> = (0..axes)
        .map(|mu| {
            let mut t = Tensor::zero(1);
            for j in 0..n {
                let c = geo0.coframe_entry(j, mu);
                if !c.is_zero() {
                    t.accumulate(vec![j as u8], c.clone());
                }
            }
            geo0.canon(&t)
        })
        .collect();

    let mut differentials = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Tensor::zero(2);
        for mu in 0..axes {
            let emj = &e[mu * n + j];
            if emj.is_zero() {
                continue;
            }
            let de = geo0.differential0(emj);
            if de.is_empty() {
                continue;
            }
            acc = acc.add(&geo0.tensor_product(&xi[mu], &de));
        }
        let d = geo0.one_minus_psi(&geo0.canon(&acc)).neg();
        differentials.push(geo0.canon(&d));
    }

    let lift_corrections = match lifts {
        LiftMode::Zero => Some(vec![Tensor::zero(2); n]),
        LiftMode::Honest => {
            let minus_i = geo0.algebra.scalar_i().neg();
            let t_dx: Vec<Tensor> = (0..axes)
                .map(|mu| geo0.canon(&geo0.tensor_product(&xi[mu], &xi[mu]).scale(&minus_i)))
                .collect();
            let mut out = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = Tensor::zero(2);
                for mu in 0..axes {
                    let emj = &e[mu * n + j];
                    if emj.is_zero() {
                        continue;
                    }
                    acc = acc.add(&t_dx[mu].mul_right(emj));
                    let de = geo0.differential0(emj);
                    if !de.is_empty() {
                        acc = acc.sub(&geo0.tensor_product(&xi[mu], &de));
                    }
                }
                out.push(geo0.canon(&acc));
            }
            Some(out)
        }
    };

    let frame = FrameSpec { differentials, lift_corrections, ..frame0 };
    Geometry::new(name, alg, frame, PsiSpec::SigmaTheta)
}

/// The twisted †-invariant homogeneous frame (dx·v, dx·v⁻¹, dy·u, dy·u⁻¹)
/// on a 2-axis graded backend.
fn twisted_torus_geometry(name: &str, alg: Algebra) -> Result<Geometry, CoreError> {
    assert_eq!(alg.axes(), 2, "twisted frame is a 2-axis construction");
    let one = alg.scalar_one();
    let half = Rat::new(1.into(), 2.into());
    let u = alg.monomial([1, 0, 0], one.clone());
    let ui = alg.monomial([-1, 0, 0], one.clone());
    let v = alg.monomial([0, 1, 0], one.clone());
    let vi = alg.monomial([0, -1, 0], one.clone());
    let n = 4usize;

    let degrees = vec![
        Some(Degree::new(0, 1)),
        Some(Degree::new(0, -1)),
        Some(Degree::new(1, 0)),
        Some(Degree::new(-1, 0)),
    ];

    // ω₀† = −ω₁, ω₁† = −ω₀, ω₂† = −ω₃, ω₃† = −ω₂
    let mut dagger = vec![alg.zero(); n * n];
    let m1 = alg.one().neg();
    dagger[1 * n + 0] = m1.clone();
    dagger[0 * n + 1] = m1.clone();
    dagger[3 * n + 2] = m1.clone();
    dagger[2 * n + 3] = m1;

    // gram with ⟨dx,dx⟩ = ⟨dy,dy⟩ = 1/2
    let mut gram = vec![alg.zero(); n * n];
    gram[0] = alg.one().scale_rat(&half);
    gram[1 * n + 1] = alg.one().scale_rat(&half);
    gram[2 * n + 2] = alg.one().scale_rat(&half);
    gram[3 * n + 3] = alg.one().scale_rat(&half);
    gram[0 * n + 1] = alg.monomial([0, -2, 0], one.clone()).scale_rat(&half);
    gram[1 * n + 0] = alg.monomial([0, 2, 0], one.clone()).scale_rat(&half);
    gram[2 * n + 3] = alg.monomial([-2, 0, 0], one.clone()).scale_rat(&half);
    gram[3 * n + 2] = alg.monomial([2, 0, 0], one.clone()).scale_rat(&half);

    // dx = ω₀·(v⁻¹/2) + ω₁·(v/2), dy = ω₂·(u⁻¹/2) + ω₃·(u/2)
    let axes = 2usize;
    let mut coframe = vec![alg.zero(); n * axes];
    coframe[0 * axes + 0] = vi.scale_rat(&half);
    coframe[1 * axes + 0] = v.scale_rat(&half);
    coframe[2 * axes + 1] = ui.scale_rat(&half);
    coframe[3 * axes + 1] = u.scale_rat(&half);

    // vielbein rows: dx-row (v, v⁻¹, 0, 0), dy-row (0, 0, u, u⁻¹)
    let mut e = vec![alg.zero(); axes * n];
    e[0 * n + 0] = v;
    e[0 * n + 1] = vi;
    e[1 * n + 2] = u;
    e[1 * n + 3] = ui;

    let frame0 = FrameSpec {
        size: n,
        degrees,
        dagger,
        gram,
        coframe,
        differentials: vec![Tensor::zero(2); n],
        lift_corrections: None,
    };
    finalize_geometry(name, alg, frame0, &e, LiftMode::Honest)
}

/// Geometry from a diagonal metric with central coefficients: orthonormal
/// frame ω_j = dx^j·f_j with f_j = √g_jj, coframe diag(1/f_j).
pub fn geometry_from_diag_metric(
    name: &str,
    alg: Algebra,
    metric: &[Modes],
) -> Result<Geometry, CoreError> {
    let axes = alg.axes();
    if metric.len() != axes {
        return Err(CoreError::Malformed(format!(
            "diagonal metric needs {} entries, got {}",
            axes,
            metric.len()
        )));
    }
    let g: Vec<AlgebraElement> = metric.iter().map(|m| central_element(&alg, m)).collect();
    // positivity at the sample points
    for (j, gj) in g.iter().enumerate() {
        let vals = central_values_of(&alg, gj);
        if vals.iter().any(|z| z.re <= 0.0 || z.im.abs() > 1e-12) {
            return Err(CoreError::Malformed(format!(
                "metric entry {} is not positive on the sample circle",
                j
            )));
        }
    }
    let f: Vec<AlgebraElement> = g.iter().map(|gj| central_sqrt_of(&alg, gj)).collect();
    let finv: Vec<AlgebraElement> = f.iter().map(|fj| central_inv_of(&alg, fj)).collect();

    let n = axes;
    let mut dagger = vec![alg.zero(); n * n];
    for j in 0..n {
        dagger[j * n + j] = alg.one().neg();
    }
    let mut gram = vec![alg.zero(); n * n];
    for j in 0..n {
        gram[j * n + j] = alg.one();
    }
    let mut coframe = vec![alg.zero(); n * axes];
    for j in 0..n {
        coframe[j * axes + j] = finv[j].clone();
    }
    let mut e = vec![alg.zero(); axes * n];
    for j in 0..n {
        e[j * n + j] = f[j].clone();
    }
    let frame0 = FrameSpec {
        size: n,
        degrees: central_degrees(n),
        dagger,
        gram,
        coframe,
        differentials: vec![Tensor::zero(2); n],
        lift_corrections: None,
    };
    let geo = finalize_geometry(name, alg.clone(), frame0, &e, LiftMode::Honest)?;
    // The coframe entries 1/f_j are smooth but not band-limited; on an n-point
    // grid axis their spectral derivatives (hit inside d∘d and junk checks)
    // carry an aliasing floor of roughly (n/2)·r^{n/2} with r the Fourier
    // decay rate of 1/f. For the shipped metrics that floor sits near 4e-9 at
    // 32 points, so grid geometries validate at a looser tolerance; circle
    // factors of curved fuzzy geometries use ≥ 64 modes and keep the default.
    let tol = match alg.backend {
        BackendKind::Grid { .. } => 1e-7,
        _ => 1e-10,
    };
    Ok(geo.with_tol(tol))
}

/// A central element from trig modes, on either a grid or a fuzzy⊗circle backend.
pub fn central_element(alg: &Algebra, modes: &Modes) -> AlgebraElement {
    match &alg.backend {
        BackendKind::Grid { .. } => alg.grid_from_modes(modes),
        _ => {
            let mut acc = alg.zero();
            for (k, c) in modes {
                acc = acc.add(&alg.monomial(*k, crate::scalar::Scalar::Approx(*c)));
            }
            acc
        }
    }
}

fn central_values_of(alg: &Algebra, a: &AlgebraElement) -> Vec<Complex64> {
    match &alg.backend {
        BackendKind::Grid { .. } => a.grid_values(),
        BackendKind::Fuzzy { .. } => a.central_values(),
        BackendKind::Laurent => panic!("central sampling unsupported on Laurent"),
    }
}

fn central_sqrt_of(alg: &Algebra, a: &AlgebraElement) -> AlgebraElement {
    match &alg.backend {
        BackendKind::Grid { .. } => a.pointwise_sqrt(),
        BackendKind::Fuzzy { .. } => a.central_sqrt(),
        BackendKind::Laurent => panic!("central sqrt unsupported on Laurent"),
    }
}

fn central_inv_of(alg: &Algebra, a: &AlgebraElement) -> AlgebraElement {
    match &alg.backend {
        BackendKind::Grid { .. } => a.pointwise_inv(),
        BackendKind::Fuzzy { .. } => a.central_inverse(),
        BackendKind::Laurent => panic!("central inverse unsupported on Laurent"),
    }
}
