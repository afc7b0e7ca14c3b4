//! The constant unitary that turns the normal-direction splitting of the
//! ambient Dirac operator into the tensor-product form used for the tube.
//!
//! Spinors on the tube are sections of (Sigma+ + Sigma-) (x) C^2, written with
//! the C^2 factor outermost: A (x) B is the block matrix [[A b11, A b12],
//! [A b21, A b22]]. In the block order (e1 Sigma+, e1 Sigma-, e2 Sigma+,
//! e2 Sigma-) the unitary is
//!
//! ```text
//!     [ i  0  0  0 ]
//! U = [ 0  0  0  i ]
//!     [ 0  0  1  0 ]
//!     [ 0 -1  0  0 ]
//! ```
//!
//! and it satisfies
//! `U (f (x) s1 + i g (D + d) (x) s2) U* = D (x) 1 + g i d (x) s1 - g f (x) s2`
//! together with `U (1 (x) s3) U* = g (x) s3`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CMat = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest entrywise defects found by [`verify_twist_unitary`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistReport {
    pub unitarity: f64,
    pub intertwining: f64,
    pub grading: f64,
}

impl TwistReport {
    pub fn max_defect(&self) -> f64 {
        self.unitarity.max(self.intertwining).max(self.grading)
    }
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn pauli() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// U lifted to blocks of size `block`.
pub fn twist_unitary(block: usize) -> CMat {
    let u = CMat::from_row_slice(
        4,
        4,
        &[I, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, I, ZERO, ZERO, ONE, ZERO, ZERO, -ONE, ZERO, ZERO],
    );
    kron(&u, &CMat::identity(block, block))
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks the twist identities on random placeholders: a chirality-odd
/// Hermitian D on Sigma = C^{2 half_dim}, a real diagonal f and a real
/// antisymmetric stand-in for d/ds on C^q.
pub fn verify_twist_unitary(seed: u64, half_dim: usize, q: usize) -> TwistReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uni = || rng.gen_range(-1.0..1.0);
    let d = 2 * half_dim;
    let mut x = CMat::zeros(half_dim, half_dim);
    x.iter_mut().for_each(|z| *z = Complex64::new(uni(), uni()));
    let mut dirac = CMat::zeros(d, d);
    dirac.view_mut((0, half_dim), (half_dim, half_dim)).copy_from(&x);
    dirac.view_mut((half_dim, 0), (half_dim, half_dim)).copy_from(&x.adjoint());
    let gamma = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        (0..d).map(|i| if i < half_dim { ONE } else { -ONE }),
    ));
    let f = CMat::from_diagonal(&nalgebra::DVector::from_iterator(q, (0..q).map(|_| Complex64::new(uni(), 0.0))));
    let mut k = CMat::zeros(q, q);
    for i in 0..q {
        for j in i + 1..q {
            let v = uni();
            k[(i, j)] = Complex64::new(v, 0.0);
            k[(j, i)] = Complex64::new(-v, 0.0);
        }
    }
    let [s1, s2, s3] = pauli();
    let id2 = CMat::identity(2, 2);
    let idd = CMat::identity(d, d);
    let idq = CMat::identity(q, q);
    let lhs = kron(&s1, &kron(&idd, &f))
        + kron(&s2, &kron(&(&gamma * &dirac), &idq)) * I
        + kron(&s2, &kron(&gamma, &k)) * I;
    let rhs = kron(&id2, &kron(&dirac, &idq)) + kron(&s1, &kron(&gamma, &(&k * I))) - kron(&s2, &kron(&gamma, &f));
    let u = twist_unitary(half_dim * q);
    let ud = u.adjoint();
    let n = u.nrows();
    TwistReport {
        unitarity: max_abs(&(&u * &ud - CMat::identity(n, n))),
        intertwining: max_abs(&(&u * &lhs * &ud - rhs)),
        grading: max_abs(&(&u * kron(&s3, &kron(&idd, &idq)) * &ud - kron(&s3, &kron(&gamma, &idq)))),
    }
}
