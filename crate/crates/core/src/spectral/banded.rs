//! Cholesky factorization of Hermitian positive definite band matrices.

use num_complex::Complex64;

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Lower factor L with `M = L L^*`, stored by rows: `rows[i][k]` is L(i, i - bw + k).
pub(crate) struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<Complex64>,
}

impl BandCholesky {
    pub fn factor(m: &CsrMatrix, shift: f64) -> Result<Self> {
        let n = m.nrows();
        let bw = m.bandwidth();
        let width = bw + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); n * width];
        for (i, j, v) in m.triplets() {
            if j <= i {
                data[i * width + (j + bw - i)] = v;
            }
        }
        for i in 0..n {
            data[i * width + bw] += shift;
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                // L(i, j) = (M(i, j) - sum_k L(i, k) conj(L(j, k))) / L(j, j)
                let klo = lo.max(j.saturating_sub(bw));
                let mut acc = data[i * width + (j + bw - i)];
                let ri = i * width + bw - i;
                let rj = j * width + bw - j;
                for k in klo..j {
                    acc -= data[ri + k] * data[rj + k].conj();
                }
                if j == i {
                    if !(acc.re > 0.0) {
                        return Err(Error::Solver("band matrix is not positive definite".into()));
                    }
                    data[i * width + bw] = Complex64::new(acc.re.sqrt(), 0.0);
                } else {
                    data[i * width + (j + bw - i)] = acc / data[j * width + bw].re;
                }
            }
        }
        Ok(BandCholesky { n, bw, data })
    }

    /// Solves (L L^*) x = b.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let (n, bw) = (self.n, self.bw);
        let width = bw + 1;
        let mut y = b.to_vec();
        for i in 0..n {
            let base = i * width + bw - i;
            let mut acc = y[i];
            for k in i.saturating_sub(bw)..i {
                acc -= self.data[base + k] * y[k];
            }
            y[i] = acc / self.data[i * width + bw].re;
        }
        for i in (0..n).rev() {
            let acc = y[i] / self.data[i * width + bw].re;
            y[i] = acc;
            for k in i.saturating_sub(bw)..i {
                let l = self.data[i * width + bw - i + k];
                y[k] -= l.conj() * acc;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_hermitian_band_system() {
        let n = 30;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, Complex64::new(6.0, 0.0)));
            if i + 1 < n {
                let v = Complex64::new(1.0, 0.5);
                trip.push((i, i + 1, v));
                trip.push((i + 1, i, v.conj()));
            }
            if i + 3 < n {
                let v = Complex64::new(0.0, -1.0);
                trip.push((i, i + 3, v));
                trip.push((i + 3, i, v.conj()));
            }
        }
        let m = CsrMatrix::from_triplets(n, n, trip);
        let f = BandCholesky::factor(&m, 0.25).unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = f.solve(&b);
        let mx = m.matvec(&x);
        for i in 0..n {
            assert!((mx[i] + 0.25 * x[i] - b[i]).norm() < 1e-12);
        }
    }
}
