//! Eigen-solvers for the Hermitian operator matrices, index counts from
//! graded kernels, spectral matching and the anticommutator probe.
//!
//! [`eig_symmetric`] picks a path from the matrix structure:
//!
//! * tridiagonal: phase change to real symmetric, implicit QL, inverse iteration;
//! * small: dense Hermitian eigen-decomposition;
//! * large and graded `H = [[0, B], [B^*, 0]]`: shift-invert Lanczos on
//!   `B B^*` and `B^* B` with banded Cholesky solves, then `lambda = +-sigma`;
//! * large and ungraded: the same on `H^2`, followed by Rayleigh-Ritz with H.

mod banded;
mod lanczos;
mod probe;
mod tridiag;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::operators::{GradingMatrix, Mode, OperatorMatrix};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};
use banded::BandCholesky;
use lanczos::{dot, norm, CVec};
use tridiag::RealTridiagonal;

pub use probe::{anticommutator_probe, ProbeResult};

/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 1024;

/// Relative Hermiticity tolerance, measured in the Frobenius norm.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Largest accepted eigen-residual relative to the matrix norm.
pub const RESIDUAL_TOL: f64 = 1e-8;

const LANCZOS_SEED: u64 = 0x5eed_1a2c;

/// How much of the spectrum to compute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Count {
    All,
    /// The k eigenvalues of smallest modulus.
    Smallest(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigRequest {
    pub count: Count,
    pub vectors: bool,
    /// Overrides the automatic choice of algorithm.
    pub path: Option<SolverPath>,
}

impl EigRequest {
    pub fn all() -> Self {
        EigRequest { count: Count::All, vectors: false, path: None }
    }

    pub fn smallest(k: usize) -> Self {
        EigRequest { count: Count::Smallest(k), vectors: true, path: None }
    }

    pub fn with_vectors(mut self, v: bool) -> Self {
        self.vectors = v;
        self
    }

    pub fn with_path(mut self, p: SolverPath) -> Self {
        self.path = Some(p);
        self
    }
}

/// Which algorithm produced a spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    Tridiagonal,
    Dense,
    GradedShiftInvert,
    SquaredShiftInvert,
}

/// Sector tags used to pair spectra.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SectorLabel {
    pub mode: Option<Mode>,
    pub chirality: Option<i8>,
}

/// Eigenvalues in ascending order with residuals `||H v - lambda v||`.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub eigenvectors: Option<Vec<CVec>>,
    pub norm: f64,
    pub dim: usize,
    pub complete: bool,
    pub path: SolverPath,
    pub label: SectorLabel,
}

impl SpectrumResult {
    /// Eigenvalues sorted by modulus.
    pub fn by_modulus(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap().then(a.partial_cmp(b).unwrap()));
        v
    }

    pub fn smallest_modulus(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Smallest modulus above `floor`.
    pub fn smallest_modulus_above(&self, floor: f64) -> Option<f64> {
        self.eigenvalues.iter().map(|v| v.abs()).filter(|&v| v > floor).min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Eigenvalues (and optionally eigenvectors) of a Hermitian operator matrix.
pub fn eig_symmetric(op: &OperatorMatrix, req: EigRequest) -> Result<SpectrumResult> {
    let mut r = eig_hermitian(&op.matrix, op.grading.as_ref(), req)?;
    r.label.mode = op.meta.mode;
    Ok(r)
}

/// As [`eig_symmetric`] on a bare matrix.
pub fn eig_hermitian(m: &CsrMatrix, grading: Option<&GradingMatrix>, req: EigRequest) -> Result<SpectrumResult> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Solver(format!("need a non-empty square matrix, got {}x{}", n, m.ncols())));
    }
    let fro = m.frobenius_norm();
    let defect = m.hermitian_defect();
    if defect > HERMITICITY_TOL * fro.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { defect, tolerance: HERMITICITY_TOL * fro });
    }
    let norm = m.max_abs_row_sum();
    let graded = grading.filter(|g| g.len() == n && g.anticommutator_defect(m) == 0.0);
    let path = req.path.unwrap_or(if m.bandwidth() <= 1 {
        SolverPath::Tridiagonal
    } else if n <= DENSE_LIMIT || req.count == Count::All {
        SolverPath::Dense
    } else if graded.is_some() {
        SolverPath::GradedShiftInvert
    } else {
        SolverPath::SquaredShiftInvert
    });
    let k = match req.count {
        Count::All => n,
        Count::Smallest(k) => k,
    };
    let mut out = match path {
        SolverPath::Tridiagonal if m.bandwidth() <= 1 => tridiagonal_path(m, req)?,
        SolverPath::Tridiagonal => return Err(Error::Solver("matrix is not tridiagonal".into())),
        SolverPath::Dense if n > DENSE_LIMIT && req.count == Count::All => {
            return Err(Error::Solver(format!("full spectrum of a {n}x{n} matrix exceeds the dense limit {DENSE_LIMIT}")));
        }
        SolverPath::Dense => dense_path(m, req),
        SolverPath::GradedShiftInvert => {
            let g = graded.ok_or_else(|| Error::Grading("graded solver needs an odd operator".into()))?;
            graded_path(m, g, k, norm)?
        }
        SolverPath::SquaredShiftInvert => squared_path(m, k, norm)?,
    };
    out.norm = norm;
    out.dim = n;
    let worst = out.max_residual();
    if worst > RESIDUAL_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Solver(format!("eigen-residual {worst:.3e} exceeds {RESIDUAL_TOL:e} x norm {norm:.3e}")));
    }
    if !req.vectors {
        out.eigenvectors = None;
    }
    Ok(out)
}

fn residual(m: &CsrMatrix, v: &[Complex64], lambda: f64) -> f64 {
    let hv = m.matvec(v);
    hv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt()
}

/// Indices of the k smallest-modulus values, returned in ascending value order.
fn pick_smallest(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].abs().partial_cmp(&values[b].abs()).unwrap().then(a.cmp(&b)));
    idx.truncate(k.min(values.len()));
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    idx
}

fn finish(pairs: Vec<(f64, CVec, f64)>, complete: bool, path: SolverPath) -> SpectrumResult {
    let mut pairs = pairs;
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    SpectrumResult {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.2).collect(),
        eigenvectors: Some(pairs.into_iter().map(|p| p.1).collect()),
        norm: 0.0,
        dim: 0,
        complete,
        path,
        label: SectorLabel::default(),
    }
}

fn tridiagonal_path(m: &CsrMatrix, req: EigRequest) -> Result<SpectrumResult> {
    let t = RealTridiagonal::from_hermitian(m);
    let values = t.eigenvalues()?;
    let chosen: Vec<usize> = match req.count {
        Count::All => (0..values.len()).collect(),
        Count::Smallest(k) => pick_smallest(&values, k),
    };
    let cluster_tol = 1e-7 * t.norm();
    let mut residuals = Vec::with_capacity(chosen.len());
    let mut vectors = Vec::new();
    let mut cluster: Vec<Vec<f64>> = Vec::new();
    let mut prev: Option<f64> = None;
    for &i in &chosen {
        let lam = values[i];
        if prev.is_none_or(|p| lam - p > cluster_tol) {
            cluster.clear();
        }
        let x = t.inverse_iteration(lam, &cluster, i as u64);
        residuals.push(tridiag::residual(&t, &x, lam));
        if req.vectors {
            vectors.push(x.iter().zip(&t.phase).map(|(&v, p)| p * v).collect());
        }
        cluster.push(x);
        prev = Some(lam);
    }
    Ok(SpectrumResult {
        eigenvalues: chosen.iter().map(|&i| values[i]).collect(),
        residuals,
        eigenvectors: req.vectors.then_some(vectors),
        norm: 0.0,
        dim: 0,
        complete: req.count == Count::All,
        path: SolverPath::Tridiagonal,
        label: SectorLabel::default(),
    })
}

fn dense_path(m: &CsrMatrix, req: EigRequest) -> SpectrumResult {
    let e = SymmetricEigen::new(m.to_dense());
    let values: Vec<f64> = e.eigenvalues.iter().copied().collect();
    let chosen: Vec<usize> = match req.count {
        Count::All => (0..values.len()).collect(),
        Count::Smallest(k) => pick_smallest(&values, k),
    };
    let pairs = chosen
        .iter()
        .map(|&i| {
            let v: CVec = e.eigenvectors.column(i).iter().copied().collect();
            let r = residual(m, &v, values[i]);
            (values[i], v, r)
        })
        .collect();
    finish(pairs, req.count == Count::All, SolverPath::Dense)
}

/// Shift that keeps `A + mu` safely positive definite without moving the
/// ordering of the small eigenvalues of A = H^2-like products.
fn shift_for(norm: f64) -> f64 {
    1e-10 * norm * norm
}

/// Smallest eigenpairs (Rayleigh quotient, vector) of a Hermitian positive
/// semidefinite sparse matrix.
fn smallest_psd(a: &CsrMatrix, k: usize, norm: f64) -> Result<Vec<(f64, CVec)>> {
    let n = a.nrows();
    if n == 0 || k == 0 {
        return Ok(Vec::new());
    }
    let chol = BandCholesky::factor(a, shift_for(norm))?;
    let op = |x: &[Complex64]| chol.solve(x);
    let pairs = lanczos::largest(&op, n, k, LANCZOS_SEED)?;
    Ok(pairs
        .into_iter()
        .map(|p| {
            let av = a.matvec(&p.vector);
            (dot(&p.vector, &av).re.max(0.0), p.vector)
        })
        .collect())
}

fn graded_path(m: &CsrMatrix, g: &GradingMatrix, k: usize, norm: f64) -> Result<SpectrumResult> {
    let n = m.nrows();
    let (plus, minus) = g.sectors();
    let b = m.submatrix(&plus, &minus);
    let bh = b.adjoint();
    let zero_tol = 1e-9 * norm;
    let embed = |u: &[Complex64], v: &[Complex64]| {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (p, &i) in plus.iter().enumerate() {
            x[i] = u[p];
        }
        for (q, &i) in minus.iter().enumerate() {
            x[i] = v[q];
        }
        x
    };
    let mut pairs: Vec<(f64, CVec, f64)> = Vec::new();
    let upper = smallest_psd(&b.mul(&bh), k.min(plus.len()), norm)?;
    for (theta, u) in upper {
        let sigma = theta.sqrt();
        let bu = bh.matvec(&u);
        if sigma <= zero_tol {
            let x = embed(&u, &vec![Complex64::new(0.0, 0.0); minus.len()]);
            let r = residual(m, &x, 0.0);
            pairs.push((0.0, x, r));
        } else {
            let s2 = std::f64::consts::SQRT_2;
            let v: CVec = bu.iter().map(|z| z / (sigma * s2)).collect();
            let uu: CVec = u.iter().map(|z| z / s2).collect();
            for sign in [1.0, -1.0] {
                let vv: CVec = v.iter().map(|z| z * sign).collect();
                let x = embed(&uu, &vv);
                let r = residual(m, &x, sign * sigma);
                pairs.push((sign * sigma, x, r));
            }
        }
    }
    let lower = smallest_psd(&bh.mul(&b), k.min(minus.len()), norm)?;
    for (theta, v) in lower {
        if theta.sqrt() <= zero_tol {
            let x = embed(&vec![Complex64::new(0.0, 0.0); plus.len()], &v);
            let r = residual(m, &x, 0.0);
            pairs.push((0.0, x, r));
        }
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let keep = pick_smallest(&values, k);
    let mut chosen: Vec<Option<(f64, CVec, f64)>> = pairs.into_iter().map(Some).collect();
    let pairs = keep.iter().map(|&i| chosen[i].take().unwrap()).collect();
    Ok(finish(pairs, false, SolverPath::GradedShiftInvert))
}

fn squared_path(m: &CsrMatrix, k: usize, norm: f64) -> Result<SpectrumResult> {
    let n = m.nrows();
    let extra = (k + 4).min(n);
    let sq = smallest_psd(&m.mul(m), extra, norm)?;
    // Rayleigh-Ritz with H on the span of the computed vectors.
    let basis: Vec<CVec> = orthonormalize(sq.into_iter().map(|p| p.1).collect());
    let r = basis.len();
    let hb: Vec<CVec> = basis.iter().map(|q| m.matvec(q)).collect();
    let small = DMatrix::from_fn(r, r, |i, j| dot(&basis[i], &hb[j]));
    let e = SymmetricEigen::new(small);
    let mut pairs = Vec::with_capacity(r);
    for c in 0..r {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (i, q) in basis.iter().enumerate() {
            let w = e.eigenvectors[(i, c)];
            x.iter_mut().zip(q).for_each(|(xv, qv)| *xv += w * qv);
        }
        let nx = norm_of(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let lam = e.eigenvalues[c];
        let res = residual(m, &x, lam);
        pairs.push((lam, x, res));
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let keep = pick_smallest(&values, k);
    let mut all: Vec<Option<_>> = pairs.into_iter().map(Some).collect();
    Ok(finish(keep.iter().map(|&i| all[i].take().unwrap()).collect(), false, SolverPath::SquaredShiftInvert))
}

fn norm_of(x: &[Complex64]) -> f64 {
    norm(x)
}

fn orthonormalize(vs: Vec<CVec>) -> Vec<CVec> {
    let mut out: Vec<CVec> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}

/// Kernel dimensions by chirality and the resulting index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexResult {
    /// `None` when the kernel could not be separated from the rest of the
    /// spectrum (gap ratio below the threshold) or its chirality is mixed.
    pub index: Option<i64>,
    pub kernel_dim_plus: usize,
    pub kernel_dim_minus: usize,
    /// Ratio of the first eigenvalue outside the kernel to the largest inside.
    pub gap_ratio: f64,
    /// Moduli below this counted as kernel.
    pub kernel_threshold: f64,
    pub kernel_moduli: Vec<f64>,
}

impl IndexResult {
    pub fn is_determinate(&self) -> bool {
        self.index.is_some()
    }
}

/// Required separation between kernel and the rest of the spectrum.
pub const GAP_RATIO_MIN: f64 = 10.0;

/// Index of a G-odd Hermitian matrix from a computed spectrum.
///
/// Kernel candidates are moduli below half of `gap_estimate` (or a tenth of
/// the spectral span when no estimate is given); the kernel ends at the
/// largest multiplicative jump among them. Chirality counts come from the
/// eigenvalues of G compressed to the kernel.
pub fn graded_index(op: &OperatorMatrix, spectrum: &SpectrumResult, gap_estimate: Option<f64>) -> Result<IndexResult> {
    let g = op.grading.as_ref().ok_or_else(|| Error::Grading("operator carries no grading".into()))?;
    graded_index_with(&op.matrix, g, spectrum, gap_estimate)
}

pub fn graded_index_with(
    m: &CsrMatrix,
    g: &GradingMatrix,
    spectrum: &SpectrumResult,
    gap_estimate: Option<f64>,
) -> Result<IndexResult> {
    if g.len() != m.nrows() {
        return Err(Error::Grading("grading and matrix sizes differ".into()));
    }
    let defect = g.anticommutator_defect(m);
    if defect > 1e-12 * m.max_abs_row_sum() {
        return Err(Error::Grading(format!("G M G + M has entries of size {defect:.3e}")));
    }
    let vectors = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Grading("index needs eigenvectors".into()))?;
    let threshold = match gap_estimate {
        Some(e) => 0.5 * e,
        None if spectrum.complete => {
            let lo = spectrum.eigenvalues.first().copied().unwrap_or(0.0);
            let hi = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
            0.1 * (hi - lo)
        }
        None => 0.2 * spectrum.norm,
    };
    let mut order: Vec<usize> = (0..spectrum.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| spectrum.eigenvalues[a].abs().partial_cmp(&spectrum.eigenvalues[b].abs()).unwrap());
    let moduli: Vec<f64> = order.iter().map(|&i| spectrum.eigenvalues[i].abs()).collect();
    let cands = moduli.iter().filter(|&&v| v < threshold).count();
    if cands == 0 {
        return Ok(IndexResult {
            index: Some(0),
            kernel_dim_plus: 0,
            kernel_dim_minus: 0,
            gap_ratio: f64::INFINITY,
            kernel_threshold: threshold,
            kernel_moduli: Vec::new(),
        });
    }
    let tiny = f64::MIN_POSITIVE;
    let mut best = (0, 0.0);
    for i in 0..cands {
        // Past the last candidate, the first computed value outside (or the
        // threshold itself when the spectrum stops there).
        let next = moduli.get(i + 1).copied().unwrap_or(threshold);
        let ratio = next / moduli[i].max(tiny);
        if ratio > best.1 {
            best = (i + 1, ratio);
        }
    }
    let (dim, gap_ratio) = best;
    let kernel: Vec<&CVec> = order[..dim].iter().map(|&i| &vectors[i]).collect();
    let comp = DMatrix::from_fn(dim, dim, |i, j| dot(kernel[i], &g.apply(kernel[j])));
    let chir = SymmetricEigen::new(comp).eigenvalues;
    let plus = chir.iter().filter(|&&c| c > 0.0).count();
    let minus = dim - plus;
    let clean = chir.iter().all(|c| c.abs() >= 0.9);
    let index = (gap_ratio >= GAP_RATIO_MIN && clean).then_some(plus as i64 - minus as i64);
    Ok(IndexResult {
        index,
        kernel_dim_plus: plus,
        kernel_dim_minus: minus,
        gap_ratio,
        kernel_threshold: threshold,
        kernel_moduli: moduli[..dim].to_vec(),
    })
}

/// Paired eigenvalues of two spectra.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    /// (lambda_a, lambda_b, |lambda_a - lambda_b|).
    pub pairs: Vec<(f64, f64, f64)>,
    /// Fewer than k values were available on one side.
    pub truncated: bool,
    /// Sector labels disagree, so nothing was paired.
    pub sector_mismatch: bool,
}

impl MatchResult {
    pub fn max_difference(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).fold(0.0, f64::max)
    }
}

/// Pairs the k smallest-modulus eigenvalues of `a` and `b` by order statistics.
/// Spectra from different sectors are never paired.
pub fn match_spectra(a: &SpectrumResult, b: &SpectrumResult, k: usize) -> MatchResult {
    if a.label != b.label {
        return MatchResult { pairs: Vec::new(), truncated: false, sector_mismatch: true };
    }
    let pick = |s: &SpectrumResult| {
        let idx = pick_smallest(&s.eigenvalues, k);
        idx.iter().map(|&i| s.eigenvalues[i]).collect::<Vec<_>>()
    };
    let (va, vb) = (pick(a), pick(b));
    let len = va.len().min(vb.len());
    MatchResult {
        pairs: va.iter().zip(&vb).take(len).map(|(&x, &y)| (x, y, (x - y).abs())).collect(),
        truncated: len < k,
        sector_mismatch: false,
    }
}

#[cfg(test)]
mod tests;
