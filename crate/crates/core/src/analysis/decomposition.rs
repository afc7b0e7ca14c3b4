//! Ambient check of the Dirac decomposition near an offset surface:
//!
//! D_Y psi = i c(nu) (D_{X_s} psi - Tr II_s psi / 2 + d_s psi)
//!
//! for a smooth spinor on R^3, with every derivative taken by central
//! differences of step h. The residual is O(h^2).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ConvergenceReport;
use crate::geometry::{OffsetGeometry, Topology};
use crate::{Error, Result};

type Spinor = [Complex64; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Clifford multiplication by a vector via Pauli matrices.
fn clifford(v: [f64; 3], x: Spinor) -> Spinor {
    let z = Complex64::new(v[2], 0.0);
    let w = Complex64::new(v[0], -v[1]);
    [z * x[0] + w * x[1], w.conj() * x[0] - z * x[1]]
}

fn add(a: Spinor, b: Spinor) -> Spinor {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(c: Complex64, a: Spinor) -> Spinor {
    [c * a[0], c * a[1]]
}

fn diff(a: Spinor, b: Spinor, h: f64) -> Spinor {
    let k = 0.5 / h;
    [(a[0] - b[0]) * k, (a[1] - b[1]) * k]
}

/// Sum of plane waves with random wave vectors (|k| <= 2) and amplitudes.
struct PlaneWaves(Vec<([f64; 3], Spinor)>);

impl PlaneWaves {
    fn random(seed: u64, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let waves = (0..count)
            .map(|_| {
                let k = [c().re * 1.15, c().re * 1.15, c().re * 1.15];
                (k, [c(), c()])
            })
            .collect();
        PlaneWaves(waves)
    }

    fn eval(&self, x: [f64; 3]) -> Spinor {
        self.0.iter().fold([Complex64::new(0.0, 0.0); 2], |acc, (k, a)| {
            let ph = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            add(acc, scale(ph, *a))
        })
    }
}

fn residual_at(geom: &OffsetGeometry, psi: &PlaneWaves, u: f64, phi: f64, s: f64, h: f64) -> Result<f64> {
    let p = geom.fermi_chart(u, phi, s)?;
    let (a, r) = geom.metric(u, s)?;
    let x = p.position;
    let f0 = psi.eval(x);

    let mut lhs = [Complex64::new(0.0, 0.0); 2];
    for axis in 0..3 {
        let mut e = [0.0; 3];
        e[axis] = h;
        let fp = psi.eval([x[0] + e[0], x[1] + e[1], x[2] + e[2]]);
        let fm = psi.eval([x[0] - e[0], x[1] - e[1], x[2] - e[2]]);
        let mut unit = [0.0; 3];
        unit[axis] = 1.0;
        lhs = add(lhs, scale(I, clifford(unit, diff(fp, fm, h))));
    }

    let at = |u: f64, phi: f64, s: f64| geom.fermi_chart(u, phi, s);
    let (up, um) = (at(u + h, phi, s)?, at(u - h, phi, s)?);
    let (pp, pm) = (at(u, phi + h, s)?, at(u, phi - h, s)?);
    let (sp, sm) = (at(u, phi, s + h)?, at(u, phi, s - h)?);
    let nu = p.normal;
    // c_s(v) = i c(v) c(nu)
    let cs = |v: [f64; 3], x: Spinor| scale(I, clifford(v, clifford(nu, x)));
    let dnu = |a: [f64; 3], b: [f64; 3], len: f64| -> [f64; 3] {
        let k = 0.5 / (h * len);
        [(a[0] - b[0]) * k, (a[1] - b[1]) * k, (a[2] - b[2]) * k]
    };

    let du = scale(Complex64::new(1.0 / a, 0.0), diff(psi.eval(up.position), psi.eval(um.position), h));
    let dphi = scale(Complex64::new(1.0 / r, 0.0), diff(psi.eval(pp.position), psi.eval(pm.position), h));
    let ds = diff(psi.eval(sp.position), psi.eval(sm.position), h);
    let wu = dnu(up.normal, um.normal, a);
    let wphi = dnu(pp.normal, pm.normal, r);

    let half_i = Complex64::new(0.0, 0.5);
    let cov_u = add(du, scale(half_i, cs(wu, f0)));
    let cov_phi = add(dphi, scale(half_i, cs(wphi, f0)));
    let dx = add(scale(I, cs(p.e_u, cov_u)), scale(I, cs(p.e_phi, cov_phi)));
    let tr = geom.trace_ii(u, s)?;
    let inner = add(add(dx, scale(Complex64::new(-0.5 * tr, 0.0), f0)), ds);
    let rhs = scale(I, clifford(nu, inner));
    Ok(((lhs[0] - rhs[0]).norm_sqr() + (lhs[1] - rhs[1]).norm_sqr()).sqrt())
}

/// Largest pointwise residual of the decomposition at `points` random
/// (u, phi, s) with |s| <= 0.3 times the focal bound, for each step in `steps`.
pub fn decomposition_residual(geom: &OffsetGeometry, steps: &[f64], points: usize, seed: u64) -> Result<ConvergenceReport> {
    if steps.len() < 3 {
        return Err(Error::Config(format!("need at least 3 step sizes, got {}", steps.len())));
    }
    if let Some(h) = steps.iter().find(|h| !(h.is_finite() && **h > 0.0 && **h < 0.05)) {
        return Err(Error::Config(format!("step sizes must lie in (0, 0.05), got {h}")));
    }
    if points == 0 {
        return Err(Error::Config("need at least one sample point".into()));
    }
    let psi = PlaneWaves::random(seed, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let l = geom.length();
    let (u_lo, u_hi) = match geom.profile().topology() {
        Topology::IntervalWithPoles => (0.1 * l, 0.9 * l),
        Topology::Circle => (0.1, l - 0.1),
    };
    let s_max = 0.3 * geom.focal_bound();
    let samples: Vec<(f64, f64, f64)> = (0..points)
        .map(|_| (rng.gen_range(u_lo..u_hi), rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-s_max..s_max)))
        .collect();
    let errors = steps
        .iter()
        .map(|&h| {
            samples.iter().try_fold(0.0f64, |m, &(u, phi, s)| Ok(m.max(residual_at(geom, &psi, u, phi, s, h)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new("h", steps.to_vec(), errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometrySpec, Orientation};

    #[test]
    fn second_order_on_sphere_and_torus() {
        for spec in [
            GeometrySpec::sphere(1.0),
            GeometrySpec::torus(2.0, 0.5),
            GeometrySpec::spheroid(1.0, 1.5).with_orientation(Orientation::Inward),
        ] {
            let g = OffsetGeometry::from_spec(&spec).unwrap();
            let r = decomposition_residual(&g, &[1e-2, 5e-3, 2.5e-3], 20, 7).unwrap();
            let order = r.fitted_order.unwrap();
            assert!((1.7..=2.3).contains(&order), "{spec:?}: {r:?}");
        }
    }
}
