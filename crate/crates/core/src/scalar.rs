//! Scalars: exact cyclotomic values or complex doubles, behind one enum.
//!
//! An algebra fixes the scalar field once; mixing variants in arithmetic is a
//! programming error and panics.

use crate::cyclotomic::{rat_to_f64, Cyclo, Rat};
use num_complex::Complex64;
use num_traits::Zero;

#[derive(Clone, PartialEq, Debug)]
pub enum Scalar {
    Exact(Cyclo),
    Approx(Complex64),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.is_zero(),
            Scalar::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.add(b)),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a + b),
            _ => panic!("scalar field mismatch"),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Scalar {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.neg()),
            Scalar::Approx(a) => Scalar::Approx(-a),
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(a * b),
            _ => panic!("scalar field mismatch"),
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.conj()),
            Scalar::Approx(a) => Scalar::Approx(a.conj()),
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Exact(a) => a.inv().map(Scalar::Exact),
            Scalar::Approx(a) => {
                if a.is_zero() {
                    None
                } else {
                    Some(Scalar::Approx(1.0 / a))
                }
            }
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(a) => a.to_complex(),
            Scalar::Approx(a) => *a,
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_complex().norm()
    }

    /// Multiply by the rational r in either field.
    pub fn scale_rat(&self, r: &Rat) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.scale(r)),
            Scalar::Approx(a) => Scalar::Approx(a * rat_to_f64(r)),
        }
    }
}
