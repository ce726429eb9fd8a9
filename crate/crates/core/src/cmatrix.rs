//! Small dense complex matrices: the faithful-representation workhorse for
//! operator norms and the two-projection iteration.

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        CMatrix { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    *out.at_mut(i, j) += a * rhs.at(k, j);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).conj();
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.at(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.at(i, i)).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm via power iteration on A†A with a deterministic start.
    pub fn spectral_norm(&self) -> f64 {
        if self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            return 0.0;
        }
        let ata = self.adjoint().mul(self);
        let n = ata.rows;
        // deterministic pseudo-random start vector
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = ((i as f64) * 0.7548776662466927 + 0.3).fract() - 0.5;
                let y = ((i as f64) * 0.5698402909980532 + 0.7).fract() - 0.5;
                Complex64::new(1.0 + x, y)
            })
            .collect();
        normalize(&mut v);
        let mut lam = 0.0f64;
        for _ in 0..500 {
            let mut w = ata.apply(&v);
            let nl = normalize(&mut w);
            if (nl - lam).abs() <= 1e-14 * nl.max(1.0) {
                lam = nl;
                break;
            }
            lam = nl;
            v = w;
        }
        lam.max(0.0).sqrt()
    }
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Least-squares solve of A x = b via the normal equations with partial
/// pivoting; returns (x, residual sup-norm). Used by the flattened linear
/// oracles and the bimodule-correction solver.
pub fn lstsq(a: &CMatrix, b: &[Complex64]) -> (Vec<Complex64>, f64) {
    let ata = a.adjoint().mul(a);
    let atb = a.adjoint().apply(b);
    let n = ata.rows;
    let mut m = ata.clone();
    let mut rhs = atb.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        // pivot
        let (mut best, mut bv) = (col, m.at(col, col).norm());
        for r in col + 1..n {
            let v = m.at(r, col).norm();
            if v > bv {
                best = r;
                bv = v;
            }
        }
        if bv < 1e-13 {
            continue; // rank-deficient direction: leave x component at 0
        }
        if best != col {
            for j in 0..n {
                let t = m.at(col, j);
                *m.at_mut(col, j) = m.at(best, j);
                *m.at_mut(best, j) = t;
            }
            rhs.swap(col, best);
            perm.swap(col, best);
        }
        let piv = m.at(col, col);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m.at(r, col) / piv;
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.at(col, j) * f;
                *m.at_mut(r, j) -= v;
            }
            let v = rhs[col] * f;
            rhs[r] -= v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n {
        let piv = m.at(col, col);
        if piv.norm() >= 1e-13 {
            x[col] = rhs[col] / piv;
        }
    }
    // residual of the original system
    let ax = a.apply(&x);
    let res = ax.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    (x, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_known_matrix() {
        // [[c^2, cs],[0,0]] has spectral norm c for c=cos α, s=sin α
        let a = std::f64::consts::FRAC_PI_3;
        let (c, s) = (a.cos(), a.sin());
        let m = CMatrix::from_rows(vec![
            vec![Complex64::new(c * c, 0.0), Complex64::new(c * s, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        ]);
        assert!((m.spectral_norm() - c).abs() < 1e-12);
    }

    #[test]
    fn lstsq_solves_square_system() {
        let m = CMatrix::from_rows(vec![
            vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 1.0), Complex64::new(3.0, 0.0)],
        ]);
        let b = vec![Complex64::new(5.0, 0.0), Complex64::new(1.0, 2.0)];
        let (x, res) = lstsq(&m, &b);
        assert!(res < 1e-10);
        let back = m.apply(&x);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).norm() < 1e-10);
        }
    }
}
