//! Randomized check that two operators anticommute up to a relatively
//! bounded error and that their sum controls each summand.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::operators::{Basis, OperatorMatrix, UBoundary};
use crate::{Error, Result};

/// Largest ratios seen over all trials:
/// `||{D1, D2} psi||^2 / (||psi||^2 + ||D1 psi||^2)` and
/// `(||psi||^2 + ||D1 psi||^2 + ||D2 psi||^2) / (||psi||^2 + ||(D1 + D2) psi||^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub anticommutator_ratio: f64,
    pub domination_ratio: f64,
    pub trials: usize,
}

fn sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn u_profile(b: UBoundary, a: usize, x: f64) -> Complex64 {
    match b {
        UBoundary::Poles => Complex64::new(((a + 1) as f64 * PI * x).sin(), 0.0),
        UBoundary::Periodic => Complex64::from_polar(1.0, 2.0 * PI * a as f64 * x),
        UBoundary::Antiperiodic => Complex64::from_polar(1.0, PI * (2 * a + 1) as f64 * x),
        UBoundary::None => Complex64::new(if a == 0 { 1.0 } else { 0.0 }, 0.0),
    }
}

/// Band-limited random vector: a few low Fourier modes in u and s with
/// random complex coefficients for each (gamma, sigma) component.
fn smooth_vector(basis: &Basis, rng: &mut ChaCha8Rng, modes: usize) -> Vec<Complex64> {
    let mut coef = vec![Complex64::new(0.0, 0.0); modes * modes * 4];
    coef.iter_mut().for_each(|c| *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let (u0, u1) = basis.u_range;
    let (s0, s1) = basis.s_range;
    basis
        .sites
        .iter()
        .map(|site| {
            let x = if u1 > u0 { (site.u - u0) / (u1 - u0) } else { 0.0 };
            let y = if s1 > s0 { (site.s - s0) / (s1 - s0) } else { 0.5 };
            let comp = usize::from(site.gamma < 0) * 2 + usize::from(site.sigma < 0);
            let mut v = Complex64::new(0.0, 0.0);
            for a in 0..modes {
                let fu = u_profile(basis.u_boundary, a, x);
                for b in 0..modes {
                    let fs = ((b + 1) as f64 * PI * y).sin();
                    v += coef[(a * modes + b) * 4 + comp] * fu * fs;
                }
            }
            v
        })
        .collect()
}

/// Probes `{D1, D2}` against `D1` and `D1 + D2` against both summands with
/// `trials` smooth random vectors.
pub fn anticommutator_probe(d1: &OperatorMatrix, d2: &OperatorMatrix, trials: usize, seed: u64) -> Result<ProbeResult> {
    if d1.dim() != d2.dim() || d1.basis != d2.basis {
        return Err(Error::Solver("probe operators act on different bases".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for _ in 0..trials {
        let psi = smooth_vector(&d1.basis, &mut rng, 4);
        let a = d1.matrix.matvec(&psi);
        let b = d2.matrix.matvec(&psi);
        let ab = d1.matrix.matvec(&b);
        let ba = d2.matrix.matvec(&a);
        let anti: Vec<Complex64> = ab.iter().zip(&ba).map(|(x, y)| x + y).collect();
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (p, na, nb) = (sq(&psi), sq(&a), sq(&b));
        r1 = r1.max(sq(&anti) / (p + na));
        r2 = r2.max((p + na + nb) / (p + sq(&sum)));
    }
    Ok(ProbeResult { anticommutator_ratio: r1, domination_ratio: r2, trials })
}
