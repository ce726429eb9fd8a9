//! Deterministic random data for property tests: seeded generation of algebra
//! elements and one-forms with controlled degree windows.

use crate::algebra::{Algebra, AlgebraElement, BackendKind};
use crate::cyclotomic::Rat;
use crate::geometry::Geometry;
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random element with monomial degrees in a balanced window. Exact fields
/// get small rational × ζ-power coefficients; floating fields get complex
/// coefficients of modest size.
pub fn rand_element(alg: &Algebra, rng: &mut ChaCha8Rng, max_deg: i64, n_terms: usize) -> AlgebraElement {
    match &alg.backend {
        BackendKind::Grid { dims } => {
            let d = dims.len();
            let mut modes = Vec::new();
            for _ in 0..n_terms {
                let mut key = [0i64; 3];
                for (ax, k) in key.iter_mut().enumerate().take(d.min(3)) {
                    let _ = ax;
                    *k = rng.gen_range(-max_deg..=max_deg);
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                modes.push((key, c));
            }
            alg.grid_from_modes(&modes)
        }
        _ => {
            let axes = alg.axes();
            let mut acc = alg.zero();
            for _ in 0..n_terms {
                let mut key = [0i64; 3];
                for k in key.iter_mut().take(axes) {
                    *k = rng.gen_range(-max_deg..=max_deg);
                }
                let coeff = rand_scalar(alg, rng);
                acc = acc.add(&alg.monomial(key, coeff));
            }
            acc
        }
    }
}

pub fn rand_scalar(alg: &Algebra, rng: &mut ChaCha8Rng) -> Scalar {
    if alg.is_exact() {
        let num = rng.gen_range(-4i64..=4);
        let den = rng.gen_range(1i64..=3);
        let zpow = rng.gen_range(0i64..8);
        alg.lambda_pow(zpow).scale_rat(&Rat::new(num.into(), den.into()))
    } else {
        Scalar::Approx(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }
}

/// A random one-form in canonical coordinates.
pub fn rand_one_form(geo: &Geometry, rng: &mut ChaCha8Rng, max_deg: i64, n_terms: usize) -> Tensor {
    let mut t = Tensor::zero(1);
    for j in 0..geo.size() {
        t.accumulate(vec![j as u8], rand_element(&geo.algebra, rng, max_deg, n_terms));
    }
    geo.canon(&t)
}

/// A random real one-form (η = −η†).
pub fn rand_real_one_form(geo: &Geometry, rng: &mut ChaCha8Rng, max_deg: i64, n_terms: usize) -> Tensor {
    let t = rand_one_form(geo, rng, max_deg, n_terms);
    let td = geo.tensor_dagger(&t);
    geo.canon(&t.sub(&td))
}
