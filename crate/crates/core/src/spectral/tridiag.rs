//! Hermitian tridiagonal eigenproblems: a diagonal phase change makes the
//! matrix real symmetric, implicit QL gives the eigenvalues and inverse
//! iteration the eigenvectors.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Real symmetric tridiagonal matrix `P^* H P` with its phase vector P.
pub(crate) struct RealTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub phase: Vec<Complex64>,
}

impl RealTridiagonal {
    pub fn from_hermitian(m: &CsrMatrix) -> Self {
        let n = m.nrows();
        let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        let mut phase = vec![Complex64::new(1.0, 0.0); n];
        for i in 0..n.saturating_sub(1) {
            let e = m.get(i, i + 1);
            let a = e.norm();
            off.push(a);
            phase[i + 1] = if a > 0.0 { phase[i] * e.conj() / a } else { phase[i] };
        }
        RealTridiagonal { diag, off, phase }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.diag[i].abs()
                    + if i > 0 { self.off[i - 1] } else { 0.0 }
                    + if i + 1 < n { self.off[i] } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        ql_implicit(&mut d, &mut e)?;
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(d)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solves (T - shift) x = b by Gaussian elimination with partial pivoting.
    /// Exactly singular pivots are nudged to `tiny`.
    fn shifted_solve(&self, shift: f64, b: &[f64], tiny: f64) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            let p = self.diag[0] - shift;
            return vec![b[0] / if p == 0.0 { tiny } else { p }];
        }
        // Row i of U holds u0 (diagonal), u1, u2 (superdiagonals).
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let mut cur = [self.diag[0] - shift, self.off[0], 0.0];
        for i in 0..n - 1 {
            let sub = self.off[i];
            let next = [sub, self.diag[i + 1] - shift, if i + 2 < n { self.off[i + 1] } else { 0.0 }];
            // cur = [row i at col i, col i+1, col i+2]; next = [row i+1 at col i, i+1, i+2]
            let (mut top, mut bot) = (cur, next);
            if bot[0].abs() > top[0].abs() {
                std::mem::swap(&mut top, &mut bot);
                rhs.swap(i, i + 1);
            }
            if top[0] == 0.0 {
                top[0] = tiny;
            }
            let l = bot[0] / top[0];
            u0[i] = top[0];
            u1[i] = top[1];
            u2[i] = top[2];
            rhs[i + 1] -= l * rhs[i];
            cur = [bot[1] - l * top[1], bot[2] - l * top[2], 0.0];
        }
        u0[n - 1] = if cur[0] == 0.0 { tiny } else { cur[0] };
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= u2[i] * x[i + 2];
            }
            x[i] = v / u0[i];
        }
        x
    }

    /// Eigenvector for eigenvalue `lambda` by inverse iteration, kept
    /// orthogonal to `cluster`.
    pub fn inverse_iteration(&self, lambda: f64, cluster: &[Vec<f64>], seed: u64) -> Vec<f64> {
        let n = self.len();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * norm;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..4 {
            orthogonalize(&mut x, cluster);
            normalize(&mut x);
            x = self.shifted_solve(lambda, &x, tiny);
            orthogonalize(&mut x, cluster);
            normalize(&mut x);
            let r = residual(self, &x, lambda);
            if r <= 1e-14 * norm {
                break;
            }
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, x);
            x.iter_mut().zip(q).for_each(|(v, qv)| *v -= c * qv);
        }
    }
}

pub(crate) fn residual(t: &RealTridiagonal, x: &[f64], lambda: f64) -> f64 {
    t.apply(x).iter().zip(x).map(|(y, v)| (y - lambda * v).powi(2)).sum::<f64>().sqrt()
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// `e[i]` couples rows i and i+1; e has length n with e[n-1] unused.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Solver("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
