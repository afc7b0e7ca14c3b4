//! Lanczos iteration with full reorthogonalization for the largest
//! eigenvalues of a Hermitian positive operator (in practice a shifted
//! inverse, so the largest eigenvalues belong to the smallest of the original).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub(crate) type CVec = Vec<Complex64>;

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(yv, xv)| *yv += a * xv);
}

fn project_out(w: &mut [Complex64], basis: &[CVec]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(w, -c, q);
        }
    }
}

/// Eigenpair of the operator with the Ritz residual estimate.
pub(crate) struct RitzPair {
    pub value: f64,
    pub vector: CVec,
}

/// One Lanczos run in the orthogonal complement of `locked`, stopping when
/// the `want` largest Ritz values have relative residual below `tol`.
fn run(
    op: &dyn Fn(&[Complex64]) -> CVec,
    n: usize,
    want: usize,
    locked: &[CVec],
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<Vec<RitzPair>> {
    let room = n - locked.len();
    let mut q: CVec = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    project_out(&mut q, locked);
    let nq = norm(&q);
    if nq == 0.0 {
        return Ok(Vec::new());
    }
    q.iter_mut().for_each(|v| *v /= nq);
    let mut basis: Vec<CVec> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let max_steps = room.min(want * 6 + 120).max(1);
    loop {
        let j = basis.len() - 1;
        let mut w = op(&basis[j]);
        project_out(&mut w, locked);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        project_out(&mut w, &basis);
        let b = norm(&w);
        let steps = alpha.len();
        let check = steps >= want && (steps.is_multiple_of(5) || steps == max_steps || b <= 1e-14 * a.abs());
        if check {
            let (vals, vecs) = tridiagonal_eigen(&alpha, &beta);
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|&x, &y| vals[y].partial_cmp(&vals[x]).unwrap());
            let top = vals[order[0]].abs().max(f64::MIN_POSITIVE);
            let take = want.min(vals.len());
            let converged = order[..take].iter().all(|&i| (b * vecs[(steps - 1, i)]).abs() <= tol * top);
            if converged || steps == max_steps || b <= 1e-14 * top {
                if !converged && steps == max_steps && steps < room && b > 1e-14 * top {
                    return Err(Error::Solver(format!("Lanczos did not converge in {steps} steps")));
                }
                return Ok(order[..take]
                    .iter()
                    .map(|&i| {
                        let mut v = vec![Complex64::new(0.0, 0.0); n];
                        for (k, qk) in basis.iter().enumerate() {
                            axpy(&mut v, Complex64::new(vecs[(k, i)], 0.0), qk);
                        }
                        project_out(&mut v, locked);
                        let nv = norm(&v);
                        v.iter_mut().for_each(|x| *x /= nv);
                        RitzPair { value: vals[i], vector: v }
                    })
                    .collect());
            }
        }
        if b == 0.0 {
            return Err(Error::Solver("Lanczos breakdown".into()));
        }
        beta.push(b);
        w.iter_mut().for_each(|v| *v /= b);
        basis.push(w);
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let e = SymmetricEigen::new(t);
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// The `k` largest eigenpairs of the Hermitian positive operator `op` on C^n.
/// Converged vectors are locked and a fresh run in their complement checks
/// that no larger eigenvalue (for example a missed copy of a degenerate one)
/// was skipped.
pub(crate) fn largest(op: &dyn Fn(&[Complex64]) -> CVec, n: usize, k: usize, seed: u64) -> Result<Vec<RitzPair>> {
    let k = k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-12;
    let mut found: Vec<RitzPair> = Vec::new();
    for _round in 0..(k + 8) {
        let missing = k - found.len().min(k);
        let locked: Vec<CVec> = found.iter().map(|p| p.vector.clone()).collect();
        if locked.len() == n {
            break;
        }
        let want = missing.max(1);
        let fresh = run(op, n, want, &locked, &mut rng, tol)?;
        let floor = if found.len() >= k { found[k - 1].value } else { f64::NEG_INFINITY };
        let mut added = false;
        for p in fresh {
            if p.value > floor * (1.0 + 1e-10) || found.len() < k {
                found.push(p);
                added = true;
            }
        }
        found.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap());
        found.truncate(k);
        if !added && found.len() == k {
            return Ok(found);
        }
    }
    if found.len() == k {
        Ok(found)
    } else {
        Err(Error::Solver("Lanczos locking did not settle".into()))
    }
}
