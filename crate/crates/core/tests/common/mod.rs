//! Shared test fixtures.

use lcw_core::algebra::Degree;
use lcw_core::builders;
use lcw_core::geometry::{FrameSpec, Geometry, PsiSpec};
use lcw_core::tensor::Tensor;

/// The flat T² presented by the unimodular-scaled frame (dx·u, dy): same
/// module and inner product as `flat_t2`, but a non-closed frame with W ≠ 0.
pub fn flat_t2_scaled_frame() -> Geometry {
    let base = builders::flat_t2();
    let alg = base.algebra.clone();
    let u = alg.monomial([1, 0, 0], alg.scalar_one());
    let ui = alg.monomial([-1, 0, 0], alg.scalar_one());
    let n = 2usize;
    let mut dagger = vec![alg.zero(); n * n];
    dagger[0] = alg.monomial([-2, 0, 0], alg.scalar_one()).neg();
    dagger[1 * n + 1] = alg.one().neg();
    let gram = vec![alg.one(), alg.zero(), alg.zero(), alg.one()];
    let coframe = vec![ui.clone(), alg.zero(), alg.zero(), alg.one()];
    let frame0 = FrameSpec {
        size: n,
        degrees: vec![Some(Degree::new(1, 0)), Some(Degree::ZERO)],
        dagger,
        gram,
        coframe,
        differentials: vec![Tensor::zero(2); 2],
        lift_corrections: None,
    };
    let geo0 = Geometry::new("flat-t2-scaled", alg.clone(), frame0.clone(), PsiSpec::SigmaTheta)
        .unwrap();
    let du = geo0.differential0(&u);
    let dxi = Tensor::basis(1, vec![0], ui);
    let d0 = geo0.one_minus_psi(&geo0.tensor_product(&dxi, &du)).neg();
    let frame = FrameSpec {
        differentials: vec![geo0.canon(&d0), Tensor::zero(2)],
        lift_corrections: None,
        ..frame0
    };
    Geometry::new("flat-t2-scaled", alg, frame, PsiSpec::SigmaTheta).unwrap()
}
