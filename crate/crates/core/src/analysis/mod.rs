//! Convergence studies built on the operators and solvers: small-eps
//! expansion of the tube spectrum, the divergent normal term, curvature and
//! A-term decay, the t-homotopy, the ambient decomposition residual and the
//! anticommutator probe under refinement.

mod decomposition;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{OffsetGeometry, OffsetSample, Topology};
use crate::operators::{
    assemble_homotopy, assemble_mode_dirac, assemble_normal_t, assemble_product, assemble_product_parts,
    assemble_product_with_leaf, Grid1D, Mode, PointLeaf,
};
use crate::spectral::{anticommutator_probe, eig_symmetric, graded_index, match_spectra, EigRequest, ProbeResult, SpectrumResult};
use crate::{Error, Result};

pub use decomposition::decomposition_residual;

/// Errors against a refinement parameter with a least-squares order fit of
/// `log error = order * log param + c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub param_name: String,
    pub params: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_order: Option<f64>,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: Option<f64>,
    pub flags: Vec<String>,
}

impl ConvergenceReport {
    pub fn new(param_name: &str, params: Vec<f64>, errors: Vec<f64>) -> Self {
        let fit = fit_order(&params, &errors);
        let mut flags = Vec::new();
        // Identically zero errors are an exact result, not an indeterminate one.
        if fit.is_none() && errors.iter().any(|&e| e != 0.0) {
            flags.push("order not fitted: need at least 3 positive errors".to_string());
        }
        ConvergenceReport {
            param_name: param_name.to_string(),
            params,
            errors,
            fitted_order: fit.map(|f| f.0),
            fit_residual: fit.map(|f| f.1),
            flags,
        }
    }

    /// Errors strictly decrease along decreasing parameter.
    pub fn is_monotone(&self) -> bool {
        let mut idx: Vec<usize> = (0..self.params.len()).collect();
        idx.sort_by(|&a, &b| self.params[b].partial_cmp(&self.params[a]).unwrap());
        idx.windows(2).all(|w| self.errors[w[1]] < self.errors[w[0]])
    }

    /// Successive ratios error(p_i) / error(p_{i+1}) in the given order.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// Least-squares slope and RMS residual on log-log data; `None` with fewer
/// than three usable points.
pub fn fit_order(params: &[f64], errors: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = params
        .iter()
        .zip(errors)
        .filter(|(p, e)| **p > 0.0 && **e > 0.0 && e.is_finite())
        .map(|(p, e)| (p.ln(), e.ln()))
        .collect();
    if pts.len() < 3 || pts.len() != params.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let c = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - slope * p.0 - c).powi(2)).sum::<f64>() / n).sqrt();
    Some((slope, rms))
}

fn check_epsilons(geom: Option<&OffsetGeometry>, eps: &[f64]) -> Result<()> {
    if eps.len() < 3 {
        return Err(Error::Config(format!("need at least 3 epsilon values, got {}", eps.len())));
    }
    for &e in eps {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::Config(format!("epsilon values must be positive, got {e}")));
        }
        if let Some(g) = geom {
            g.check_offset(e)?;
        }
    }
    Ok(())
}

fn u_grid(geom: &OffsetGeometry, n_u: usize) -> Result<Grid1D> {
    Grid1D::new(n_u, 0.0, geom.length())
}

/// One matched eigenvalue pair of the expansion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub epsilon: f64,
    pub mode: String,
    pub k: usize,
    pub tube: f64,
    pub surface: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub report: ConvergenceReport,
    pub rows: Vec<ExpansionRow>,
}

/// Compares the k smallest-modulus eigenvalues of the tube operator H_eps with
/// those of the surface operator D_{X_0}, mode by mode, for each eps. The error
/// at eps is the largest difference over modes and pairs.
pub fn expansion_sweep(
    geom: &OffsetGeometry,
    modes: &[Mode],
    epsilons: &[f64],
    n_u: usize,
    n_s: usize,
    k: usize,
) -> Result<ExpansionReport> {
    check_epsilons(Some(geom), epsilons)?;
    if modes.is_empty() {
        return Err(Error::Config("no modes to sweep".into()));
    }
    let gu = u_grid(geom, n_u)?;
    let surface: Vec<SpectrumResult> = modes
        .iter()
        .map(|&m| eig_symmetric(&assemble_mode_dirac(geom, m, &gu, 0.0)?, EigRequest::smallest(k)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..epsilons.len()).flat_map(|e| (0..modes.len()).map(move |m| (e, m))).collect();
    let tube: Vec<SpectrumResult> = jobs
        .par_iter()
        .map(|&(e, m)| {
            let eps = epsilons[e];
            let h = assemble_product(geom, modes[m], eps, &gu, &Grid1D::normal(n_s, eps)?)?;
            eig_symmetric(&h, EigRequest::smallest(k).with_vectors(false))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut errors = vec![0.0f64; epsilons.len()];
    let mut flags = Vec::new();
    for (&(e, m), sp) in jobs.iter().zip(&tube) {
        let matched = match_spectra(sp, &surface[m], k);
        if matched.truncated {
            flags.push(format!("fewer than {k} eigenvalues matched for m = {} at eps = {}", modes[m], epsilons[e]));
        }
        for (i, &(a, b, d)) in matched.pairs.iter().enumerate() {
            rows.push(ExpansionRow { epsilon: epsilons[e], mode: modes[m].to_string(), k: i, tube: a, surface: b, difference: d });
            errors[e] = errors[e].max(d);
        }
    }
    let mut report = ConvergenceReport::new("epsilon", epsilons.to_vec(), errors);
    if !report.is_monotone() {
        report.flags.push("errors do not decrease monotonically with epsilon".into());
    }
    report.flags.extend(flags);
    Ok(ExpansionReport { report, rows })
}

/// The same sweep with a point as the surface: H = gamma (x) T_eps, whose
/// lowest eigenvalue should be zero for every eps.
pub fn expansion_sweep_point(epsilons: &[f64], n_s: usize) -> Result<ConvergenceReport> {
    check_epsilons(None, epsilons)?;
    let errors = epsilons
        .iter()
        .map(|&eps| {
            let h = assemble_product_with_leaf(&PointLeaf, eps, &Grid1D::normal(n_s, eps)?)?;
            Ok(eig_symmetric(&h, EigRequest::smallest(1))?.smallest_modulus())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new("epsilon", epsilons.to_vec(), errors))
}

/// Smallest nonzero eigenvalue modulus of T_eps against eps; it grows like
/// 1 / eps, so the fitted order should be -1.
pub fn divergent_term_check(epsilons: &[f64], n_s: usize) -> Result<ConvergenceReport> {
    check_epsilons(None, epsilons)?;
    let errors = epsilons
        .par_iter()
        .map(|&eps| {
            let t = assemble_normal_t(eps, &Grid1D::normal(n_s, eps)?)?;
            let sp = eig_symmetric(&t, EigRequest::smallest(3))?;
            let floor = 1e-6 * std::f64::consts::FRAC_PI_2 / eps;
            sp.smallest_modulus_above(floor).ok_or_else(|| Error::Solver("no nonzero eigenvalue of T found".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new("epsilon", epsilons.to_vec(), errors))
}

/// Sample offsets symmetric about zero, exactly mirrored.
fn symmetric_offsets(eps: f64, n: usize) -> Vec<f64> {
    let half: Vec<f64> = (0..=n).map(|i| eps * i as f64 / n as f64).collect();
    let mut out: Vec<f64> = half.iter().rev().map(|s| -s).collect();
    out.extend(half.into_iter().skip(1));
    out
}

fn u_samples(geom: &OffsetGeometry, n_u: usize) -> Vec<f64> {
    let l = geom.length();
    match geom.profile().topology() {
        Topology::IntervalWithPoles => (0..=n_u).map(|i| l * i as f64 / n_u as f64).collect(),
        Topology::Circle => (0..n_u).map(|i| l * i as f64 / n_u as f64).collect(),
    }
}

/// Scalar curvature term `-(a^{-1} d_u Lambda)^2 / (4 Lambda^2) - (Tr II)^2 / 4`.
pub fn curvature_field(x: &OffsetSample) -> f64 {
    let (a, _) = x.metric();
    let g = x.dlog_lambda_du() / a;
    let t = x.trace_ii();
    -0.25 * g * g - 0.25 * t * t
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    /// sup |c(u, s) - c(u, 0)| over |s| <= eps, against eps.
    pub deviation: ConvergenceReport,
    /// sup |c| over the slab for each eps.
    pub sup_norm: Vec<f64>,
    /// (u, c(u, 0)) on the sample grid.
    pub limit: Vec<(f64, f64)>,
}

impl CurvatureReport {
    /// deviation(eps_i) / deviation(eps_{i+1}).
    pub fn ratios(&self) -> Vec<f64> {
        self.deviation.ratios()
    }
}

/// Uniform convergence of the curvature field to its value on the surface.
pub fn curvature_convergence(geom: &OffsetGeometry, epsilons: &[f64], n_u: usize, n_s: usize) -> Result<CurvatureReport> {
    check_epsilons(Some(geom), epsilons)?;
    let points = u_samples(geom, n_u).into_iter().map(|u| geom.point(u)).collect::<Result<Vec<_>>>()?;
    let limit: Vec<(f64, f64)> = points.iter().map(|p| (p.u, curvature_field(&OffsetSample::new(p, 0.0)))).collect();
    let mut dev = Vec::with_capacity(epsilons.len());
    let mut sup = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let offsets = symmetric_offsets(eps, n_s);
        let (mut d, mut m) = (0.0f64, 0.0f64);
        for (p, &(_, c0)) in points.iter().zip(&limit) {
            for &s in &offsets {
                let c = curvature_field(&OffsetSample::new(p, s));
                d = d.max((c - c0).abs());
                m = m.max(c.abs());
            }
        }
        dev.push(d);
        sup.push(m);
    }
    Ok(CurvatureReport { deviation: ConvergenceReport::new("epsilon", epsilons.to_vec(), dev), sup_norm: sup, limit })
}

/// sup |a^{-1} d_u Lambda / (2 Lambda)| over the slab |s| <= eps, against eps.
/// Identically zero when Lambda is constant along u.
pub fn a_term_norm_sweep(geom: &OffsetGeometry, epsilons: &[f64], n_u: usize, n_s: usize) -> Result<ConvergenceReport> {
    check_epsilons(Some(geom), epsilons)?;
    let points = u_samples(geom, n_u).into_iter().map(|u| geom.point(u)).collect::<Result<Vec<_>>>()?;
    let errors = epsilons
        .iter()
        .map(|&eps| {
            let mut sup = 0.0f64;
            for p in &points {
                for s in symmetric_offsets(eps, n_s) {
                    let x = OffsetSample::new(p, s);
                    sup = sup.max((0.5 * x.dlog_lambda_du() / x.metric().0).abs());
                }
            }
            sup
        })
        .collect();
    Ok(ConvergenceReport::new("epsilon", epsilons.to_vec(), errors))
}

/// Central difference of log Lambda in s against the closed-form Tr II,
/// maximised over a u-grid and offsets up to half the focal bound.
pub fn lambda_trace_check(geom: &OffsetGeometry, steps: &[f64], n_u: usize) -> Result<ConvergenceReport> {
    if steps.len() < 3 {
        return Err(Error::Config(format!("need at least 3 step sizes, got {}", steps.len())));
    }
    let points = u_samples(geom, n_u).into_iter().map(|u| geom.point(u)).collect::<Result<Vec<_>>>()?;
    let s_max = 0.5 * geom.focal_bound();
    let offsets = symmetric_offsets(s_max, 4);
    let errors = steps
        .iter()
        .map(|&h| {
            let mut e = 0.0f64;
            for p in &points {
                for &s in &offsets {
                    let fd = (OffsetSample::new(p, s + h).lambda().ln() - OffsetSample::new(p, s - h).lambda().ln()) / (2.0 * h);
                    e = e.max((fd - OffsetSample::new(p, s).trace_ii()).abs());
                }
            }
            e
        })
        .collect();
    Ok(ConvergenceReport::new("h", steps.to_vec(), errors))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyPoint {
    pub t: f64,
    /// Sum of the per-mode indices; `None` if any mode was indeterminate.
    pub index: Option<i64>,
    /// Smallest eigenvalue modulus over all modes.
    pub gap: f64,
    /// (mode, eigenvalue) for the tracked eigenvalues.
    pub eigenvalues: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyReport {
    pub epsilon: f64,
    pub points: Vec<HomotopyPoint>,
    /// Largest change of a tracked eigenvalue between neighbouring t.
    pub max_jump: f64,
    /// max_jump / dt.
    pub lipschitz_constant: f64,
    /// Largest jump divided by the smaller of the two neighbouring gaps.
    pub worst_jump_to_gap: f64,
    pub flags: Vec<String>,
}

/// Follows H_t for t on a uniform grid of `t_count` points in [0, 1], tracking
/// the k smallest eigenvalues of each mode and the index.
pub fn homotopy_scan(
    geom: &OffsetGeometry,
    modes: &[Mode],
    eps: f64,
    t_count: usize,
    n_u: usize,
    n_s: usize,
    k: usize,
) -> Result<HomotopyReport> {
    if t_count < 2 {
        return Err(Error::Config(format!("homotopy needs at least 2 t values, got {t_count}")));
    }
    if modes.is_empty() {
        return Err(Error::Config("no modes to scan".into()));
    }
    geom.check_offset(eps)?;
    let gu = u_grid(geom, n_u)?;
    let gs = Grid1D::normal(n_s, eps)?;
    let estimates: Vec<f64> = modes
        .iter()
        .map(|&m| Ok(eig_symmetric(&assemble_mode_dirac(geom, m, &gu, 0.0)?, EigRequest::smallest(2))?.smallest_modulus()))
        .collect::<Result<_>>()?;
    let ts: Vec<f64> = (0..t_count).map(|i| i as f64 / (t_count - 1) as f64).collect();
    let jobs: Vec<(usize, usize)> = (0..t_count).flat_map(|i| (0..modes.len()).map(move |m| (i, m))).collect();
    let results: Vec<(SpectrumResult, Option<i64>)> = jobs
        .par_iter()
        .map(|&(i, m)| {
            let h = assemble_homotopy(geom, modes[m], eps, &gu, &gs, ts[i])?;
            let sp = eig_symmetric(&h, EigRequest::smallest(k))?;
            let idx = graded_index(&h, &sp, Some(estimates[m]))?;
            Ok((sp, idx.index))
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(t_count);
    for (i, &t) in ts.iter().enumerate() {
        let slice = &results[i * modes.len()..(i + 1) * modes.len()];
        let index = slice.iter().map(|r| r.1).sum::<Option<i64>>();
        let gap = slice.iter().map(|r| r.0.smallest_modulus()).fold(f64::INFINITY, f64::min);
        let eigenvalues = slice
            .iter()
            .zip(modes)
            .flat_map(|(r, m)| r.0.eigenvalues.iter().map(move |&v| (m.to_string(), v)))
            .collect();
        points.push(HomotopyPoint { t, index, gap, eigenvalues });
    }
    let mut max_jump = 0.0f64;
    let mut worst = 0.0f64;
    let mut flags = Vec::new();
    for i in 0..t_count - 1 {
        let mut jump = 0.0f64;
        for m in 0..modes.len() {
            let a = &results[i * modes.len() + m].0;
            let b = &results[(i + 1) * modes.len() + m].0;
            jump = jump.max(match_spectra(a, b, k).max_difference());
        }
        max_jump = max_jump.max(jump);
        let gap = points[i].gap.min(points[i + 1].gap);
        worst = worst.max(jump / gap);
    }
    if points.iter().any(|p| p.index.is_none()) {
        flags.push("index indeterminate at some t".into());
    }
    if points.iter().any(|p| p.index != points[0].index) {
        flags.push("index changes along the homotopy".into());
    }
    if worst > 0.5 {
        flags.push("eigenvalue jump exceeds half the local gap".into());
    }
    let dt = 1.0 / (t_count - 1) as f64;
    Ok(HomotopyReport { epsilon: eps, points, max_jump, lipschitz_constant: max_jump / dt, worst_jump_to_gap: worst, flags })
}

/// Probe ratios on a base grid and on grids refined by factors of two.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeStudy {
    /// (n_u, n_s, result) per level.
    pub levels: Vec<(usize, usize, ProbeResult)>,
    /// Level-to-level growth of the anticommutator ratio.
    pub growth: Vec<f64>,
    pub flags: Vec<String>,
}

/// Runs [`anticommutator_probe`] on the two summands of H_eps (surface blocks
/// and gamma (x) T) for `levels` successive grid doublings.
#[allow(clippy::too_many_arguments)]
pub fn probe_refinement(
    geom: &OffsetGeometry,
    mode: Mode,
    eps: f64,
    n_u: usize,
    n_s: usize,
    levels: usize,
    trials: usize,
    seed: u64,
) -> Result<ProbeStudy> {
    let mut out = Vec::new();
    for l in 0..levels {
        let (nu, ns) = (n_u << l, n_s << l);
        let (d1, d2) = assemble_product_parts(geom, mode, eps, &u_grid(geom, nu)?, &Grid1D::normal(ns, eps)?)?;
        out.push((nu, ns, anticommutator_probe(&d1, &d2, trials, seed)?));
    }
    let growth: Vec<f64> = out.windows(2).map(|w| w[1].2.anticommutator_ratio / w[0].2.anticommutator_ratio).collect();
    let mut flags = Vec::new();
    if out.iter().any(|l| !l.2.anticommutator_ratio.is_finite() || !l.2.domination_ratio.is_finite()) {
        flags.push("non-finite probe ratio".into());
    }
    if growth.iter().any(|&g| g > 2.0) {
        flags.push("probe ratio more than doubles under refinement".into());
    }
    Ok(ProbeStudy { levels: out, growth, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;

    #[test]
    fn fit_recovers_power_law() {
        let p = [0.1, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = p.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        let (o, r) = fit_order(&p, &e).unwrap();
        assert!((o - 2.0).abs() < 1e-12 && r < 1e-12);
        assert!(fit_order(&p[..2], &e[..2]).is_none());
    }

    #[test]
    fn too_few_epsilons_is_a_config_error() {
        assert!(matches!(divergent_term_check(&[0.1, 0.2], 64), Err(Error::Config(_))));
    }

    #[test]
    fn sphere_curvature_deviation_matches_closed_form() {
        let g = OffsetGeometry::from_spec(&GeometrySpec::sphere(1.0)).unwrap();
        let r = curvature_convergence(&g, &[0.2, 0.1, 0.05], 16, 8).unwrap();
        for (e, d) in r.deviation.params.iter().zip(&r.deviation.errors) {
            let exact = 1.0 / (1.0 - e).powi(2) - 1.0;
            assert!((d - exact).abs() < 1e-12, "{d} vs {exact}");
        }
        assert!(r.limit.iter().all(|&(_, c)| (c + 1.0).abs() < 1e-12));
    }

    #[test]
    fn point_leaf_sweep_has_zero_error() {
        let r = expansion_sweep_point(&[0.2, 0.1, 0.05], 64).unwrap();
        assert!(r.errors.iter().all(|&e| e < 1e-9));
    }

    #[test]
    fn orientation_flip_leaves_curvature_report_unchanged() {
        use crate::geometry::Orientation;
        let spec = GeometrySpec::spheroid(1.0, 1.5);
        let a = OffsetGeometry::from_spec(&spec).unwrap();
        let b = OffsetGeometry::from_spec(&spec.with_orientation(Orientation::Inward)).unwrap();
        let ra = curvature_convergence(&a, &[0.2, 0.1, 0.05], 24, 6).unwrap();
        let rb = curvature_convergence(&b, &[0.2, 0.1, 0.05], 24, 6).unwrap();
        assert_eq!(ra.deviation, rb.deviation);
        assert_eq!(ra.sup_norm, rb.sup_norm);
    }
}
