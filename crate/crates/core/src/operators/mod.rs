//! Finite-difference operator matrices.
//!
//! All first-order operators live on staggered grids: the two chiral
//! components of a spinor sit on cell centers and cell faces respectively, so
//! a difference quotient couples nearest neighbours without the spurious
//! doubled spectrum of a centered stencil on a collocated grid.
//!
//! * [`assemble_mode_dirac`]: the surface Dirac operator restricted to the
//!   angular Fourier mode `e^{i m phi}`, in half-density form
//!   `-i sigma_1 a^{-1/2} d_u a^{-1/2} + sigma_2 m / r`.
//! * [`assemble_normal_t`]: the one-dimensional operator
//!   `i sigma_1 d_s - f sigma_2` with `f = -(pi / 2 eps) tan(pi s / 2 eps)`.
//! * [`assemble_product`]: the tube operator `D_{X_s} + gamma (x) T` over the
//!   normal grid, and its homotopy and rescaled variants.

mod normal;
mod stencil;
mod twist;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{OffsetGeometry, SpinStructure, Topology};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub use normal::NormalStencil;
pub use stencil::{Leaf, ModeLeaf, PointLeaf};
pub use twist::{twist_unitary, verify_twist_unitary, TwistReport};

/// Uniform 1D grid of `n` cells on (lo, hi). Unknowns sit at cell centers
/// `lo + (j + 1/2) h` or at faces `lo + k h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n: usize,
    lo: f64,
    hi: f64,
}

impl Grid1D {
    pub fn new(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 cells, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Grid(format!("bad interval ({lo}, {hi})")));
        }
        Ok(Grid1D { n, lo, hi })
    }

    /// Grid on the normal interval (-eps, eps).
    pub fn normal(n: usize, eps: f64) -> Result<Self> {
        Self::new(n, -eps, eps)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.h()
    }

    pub fn face(&self, k: usize) -> f64 {
        if k == self.n {
            self.hi
        } else {
            self.lo + k as f64 * self.h()
        }
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.center(j))
    }

    fn spans(&self, lo: f64, hi: f64) -> bool {
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        (self.lo - lo).abs() <= tol && (self.hi - hi).abs() <= tol
    }
}

/// Same number of cells, mapped to (-1, 1) by s -> s / eps.
pub fn rescale_grid(grid: &Grid1D, eps: f64) -> Result<Grid1D> {
    if !grid.spans(-eps, eps) {
        return Err(Error::Grid(format!("grid ({}, {}) does not span (-{eps}, {eps})", grid.lo, grid.hi)));
    }
    Grid1D::new(grid.n, -1.0, 1.0)
}

/// Angular momentum m, stored as the integer 2m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode(i32);

impl Mode {
    pub fn from_twice(twice: i32) -> Self {
        Mode(twice)
    }

    /// Exact conversion from a float that is an integer or half-integer.
    pub fn from_f64(m: f64) -> Result<Self> {
        let t = 2.0 * m;
        if !t.is_finite() || t.round() != t || t.abs() > i32::MAX as f64 {
            return Err(Error::Mode(format!("m = {m} is not an integer or half-integer")));
        }
        Ok(Mode(t as i32))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_half_integer(self) -> bool {
        self.0 % 2 != 0
    }

    /// Modes allowed on a geometry with |m| <= m_max, in increasing order.
    pub fn admissible(geom: &OffsetGeometry, m_max: f64) -> Vec<Mode> {
        let top = (2.0 * m_max + 1e-9).floor() as i32;
        (-top..=top).map(Mode).filter(|m| check_mode(geom, *m).is_ok()).collect()
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Half-integer modes go with the bounding spin structure, integer modes with
/// the periodic one.
pub(crate) fn check_mode(geom: &OffsetGeometry, m: Mode) -> Result<()> {
    let p = geom.profile();
    let want_half = p.topology() == Topology::IntervalWithPoles || p.spin_structure() == SpinStructure::Antiperiodic;
    if m.is_half_integer() == want_half {
        Ok(())
    } else if want_half {
        Err(Error::Mode(format!("m = {m} must be a half-integer for this spin structure")))
    } else {
        Err(Error::Mode(format!("m = {m} must be an integer for the periodic spin structure")))
    }
}

/// How spinor values continue past the ends of the u-interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UBoundary {
    /// Poles at both ends.
    Poles,
    Periodic,
    Antiperiodic,
    /// No u-direction at all (point leaf).
    None,
}

/// Location and chirality labels of one basis vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site {
    pub u: f64,
    pub s: f64,
    /// Eigenvalue of the surface chirality gamma.
    pub gamma: i8,
    /// Eigenvalue of sigma_3 on the normal factor (0 when there is none).
    pub sigma: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub sites: Vec<Site>,
    pub u_range: (f64, f64),
    pub s_range: (f64, f64),
    pub u_boundary: UBoundary,
}

/// Diagonal +-1 grading operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradingMatrix(Vec<i8>);

impl GradingMatrix {
    pub fn new(diag: Vec<i8>) -> Result<Self> {
        if diag.iter().any(|&g| g != 1 && g != -1) {
            return Err(Error::Grading("grading entries must be +1 or -1".into()));
        }
        Ok(GradingMatrix(diag))
    }

    pub fn diag(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().zip(&self.0).map(|(x, &g)| x * g as f64).collect()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::diagonal(&self.0.iter().map(|&g| g as f64).collect::<Vec<_>>())
    }

    /// Indices in the +1 and -1 eigenspaces.
    pub fn sectors(&self) -> (Vec<usize>, Vec<usize>) {
        let plus = (0..self.0.len()).filter(|&i| self.0[i] > 0).collect();
        let minus = (0..self.0.len()).filter(|&i| self.0[i] < 0).collect();
        (plus, minus)
    }

    /// Largest entry of G M G + M; zero when M is odd.
    pub fn anticommutator_defect(&self, m: &CsrMatrix) -> f64 {
        m.triplets().filter(|&(i, j, _)| self.0[i] == self.0[j]).map(|(_, _, v)| 2.0 * v.norm()).fold(0.0, f64::max)
    }
}

/// Descriptive tags carried along with a matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorMeta {
    pub label: String,
    pub mode: Option<Mode>,
    pub epsilon: Option<f64>,
    pub t: Option<f64>,
    pub n_u: usize,
    pub n_s: usize,
}

/// Sparse matrix together with its basis description and grading.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub matrix: CsrMatrix,
    pub basis: Basis,
    pub grading: Option<GradingMatrix>,
    pub meta: OperatorMeta,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn require_u_grid(geom: &OffsetGeometry, grid_u: &Grid1D) -> Result<()> {
    if grid_u.spans(0.0, geom.length()) {
        Ok(())
    } else {
        Err(Error::Grid(format!("u-grid ({}, {}) does not span (0, {})", grid_u.lo, grid_u.hi, geom.length())))
    }
}

fn require_s_grid(grid_s: &Grid1D, eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Grid(format!("epsilon must be positive, got {eps}")));
    }
    if grid_s.spans(-eps, eps) {
        Ok(())
    } else {
        Err(Error::Grid(format!("s-grid ({}, {}) does not span (-{eps}, {eps})", grid_s.lo, grid_s.hi)))
    }
}

/// Surface Dirac operator on the offset surface at distance s, restricted to
/// angular mode m, with Dirichlet conditions at the poles. Hermitian, odd for
/// the chirality grading, and its spectrum does not change under m -> -m.
pub fn assemble_mode_dirac(geom: &OffsetGeometry, m: Mode, grid_u: &Grid1D, s: f64) -> Result<OperatorMatrix> {
    require_u_grid(geom, grid_u)?;
    geom.check_offset(s)?;
    let leaf = ModeLeaf::new(geom, m, grid_u)?;
    let sites = leaf.sites();
    let matrix = CsrMatrix::from_triplets(leaf.dim(), leaf.dim(), leaf.block(s));
    let grading = GradingMatrix::new(sites.iter().map(|x| x.1).collect())?;
    Ok(OperatorMatrix {
        matrix,
        basis: Basis {
            sites: sites.iter().map(|&(u, gamma)| Site { u, s, gamma, sigma: 0 }).collect(),
            u_range: (0.0, geom.length()),
            s_range: (s, s),
            u_boundary: leaf.u_boundary(),
        },
        grading: Some(grading),
        meta: OperatorMeta {
            label: "mode_dirac".into(),
            mode: Some(m),
            epsilon: Some(s),
            t: None,
            n_u: grid_u.len(),
            n_s: 0,
        },
    })
}

/// The one-dimensional operator T_eps with its kernel spanned by cos(pi s / 2 eps)
/// in the sigma_3 = +1 component. Hermitian and odd for sigma_3.
pub fn assemble_normal_t(eps: f64, grid_s: &Grid1D) -> Result<OperatorMatrix> {
    require_s_grid(grid_s, eps)?;
    let st = NormalStencil::new(eps, grid_s, 1.0);
    let n = st.dim();
    let sites = st.sites();
    Ok(OperatorMatrix {
        matrix: CsrMatrix::from_triplets(n, n, st.triplets()),
        basis: Basis {
            sites: sites.iter().map(|&(s, sigma)| Site { u: 0.0, s, gamma: 1, sigma }).collect(),
            u_range: (0.0, 0.0),
            s_range: (-eps, eps),
            u_boundary: UBoundary::None,
        },
        grading: Some(GradingMatrix::new(sites.iter().map(|x| x.1).collect())?),
        meta: OperatorMeta { label: "normal_t".into(), epsilon: Some(eps), n_s: grid_s.len(), ..Default::default() },
    })
}

/// Which pieces of the tube operator to assemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct FamilyParts {
    pub leaf: bool,
    pub normal: bool,
    pub a_term: bool,
}

/// Assembles `sum_p e_p (x) L(t s_p) + gamma (x) T` over the normal nodes s_p.
/// `normal` gives the nodes and the T stencil; the leaf operator at node p is
/// taken at offset `t * s_p`.
pub(crate) fn assemble_family(leaf: &dyn Leaf, normal: &NormalStencil, t: f64, parts: FamilyParts) -> Result<OperatorMatrix> {
    let d = leaf.dim();
    let nodes = normal.sites();
    let n = d * nodes.len();
    let leaf_sites = leaf.sites();
    let mut trip = Vec::new();
    for (p, &(s, _)) in nodes.iter().enumerate() {
        let off = p * d;
        if parts.leaf {
            trip.extend(leaf.block(t * s).into_iter().map(|(i, j, v)| (off + i, off + j, v)));
        }
        if parts.a_term {
            trip.extend(leaf.a_block(t * s).into_iter().map(|(i, j, v)| (off + i, off + j, v)));
        }
    }
    if parts.normal {
        for (p, q, v) in normal.triplets() {
            for (b, &(_, g)) in leaf_sites.iter().enumerate() {
                trip.push((p * d + b, q * d + b, v * g as f64));
            }
        }
    }
    let sites: Vec<Site> = nodes
        .iter()
        .flat_map(|&(s, sigma)| leaf_sites.iter().map(move |&(u, gamma)| Site { u, s, gamma, sigma }))
        .collect();
    let grading = GradingMatrix::new(sites.iter().map(|x| x.gamma * x.sigma).collect())?;
    let eps = normal.epsilon();
    Ok(OperatorMatrix {
        matrix: CsrMatrix::from_triplets(n, n, trip),
        basis: Basis { sites, u_range: leaf.u_range(), s_range: (-eps, eps), u_boundary: leaf.u_boundary() },
        grading: Some(grading),
        meta: OperatorMeta {
            label: "product".into(),
            mode: leaf.mode(),
            epsilon: Some(eps),
            t: Some(t),
            n_u: leaf.n_u(),
            n_s: normal.n(),
        },
    })
}

const FULL: FamilyParts = FamilyParts { leaf: true, normal: true, a_term: false };

fn checked_leaf(geom: &OffsetGeometry, m: Mode, eps: f64, grid_u: &Grid1D) -> Result<ModeLeaf> {
    require_u_grid(geom, grid_u)?;
    geom.check_offset(eps)?;
    ModeLeaf::new(geom, m, grid_u)
}

/// Tube operator H_eps for mode m: the offset-surface Dirac operators (already
/// conjugated to the flat half-density frame, which absorbs the A-term) plus
/// gamma (x) T_eps. Odd for Gamma = gamma (x) sigma_3.
pub fn assemble_product(geom: &OffsetGeometry, m: Mode, eps: f64, grid_u: &Grid1D, grid_s: &Grid1D) -> Result<OperatorMatrix> {
    assemble_homotopy(geom, m, eps, grid_u, grid_s, 1.0)
}

/// H_t: the leaf at normal node s is the offset surface at t s. At t = 0 this
/// is the straight product D_{X_0} + gamma (x) T; at t = 1 it is
/// [`assemble_product`] exactly.
pub fn assemble_homotopy(geom: &OffsetGeometry, m: Mode, eps: f64, grid_u: &Grid1D, grid_s: &Grid1D, t: f64) -> Result<OperatorMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Grid(format!("homotopy parameter t = {t} outside [0, 1]")));
    }
    require_s_grid(grid_s, eps)?;
    let leaf = checked_leaf(geom, m, eps, grid_u)?;
    let mut op = assemble_family(&leaf, &NormalStencil::new(eps, grid_s, 1.0), t, FULL)?;
    op.meta.label = if t == 1.0 { "product".into() } else { "homotopy".into() };
    Ok(op)
}

/// H_eps written in the rescaled normal variable sigma = s / eps on
/// `unit_grid` = (-1, 1): leaves at eps sigma_p and (1 / eps) gamma (x) T_1.
pub fn assemble_product_rescaled(geom: &OffsetGeometry, m: Mode, eps: f64, grid_u: &Grid1D, unit_grid: &Grid1D) -> Result<OperatorMatrix> {
    require_s_grid(unit_grid, 1.0)?;
    let leaf = checked_leaf(geom, m, eps, grid_u)?;
    let mut op = assemble_family(&leaf, &NormalStencil::new(1.0, unit_grid, eps), 1.0, FULL)?;
    op.meta.label = "product_rescaled".into();
    Ok(op)
}

/// A-term of the tube operator in the Lambda^{1/2}-frame, block diagonal over
/// the normal nodes: multiplication by `-i sigma_1 a^{-1} d_u Lambda / (2 Lambda)`.
/// The result is skew-Hermitian. It vanishes identically when Lambda does not
/// depend on u.
pub fn assemble_a_term(geom: &OffsetGeometry, m: Mode, eps: f64, grid_u: &Grid1D, grid_s: &Grid1D) -> Result<OperatorMatrix> {
    require_s_grid(grid_s, eps)?;
    let leaf = checked_leaf(geom, m, eps, grid_u)?;
    let parts = FamilyParts { leaf: false, normal: false, a_term: true };
    let mut op = assemble_family(&leaf, &NormalStencil::new(eps, grid_s, 1.0), 1.0, parts)?;
    op.meta.label = "a_term".into();
    op.grading = None;
    Ok(op)
}

/// The two summands of the tube operator separately: the leaf part (surface
/// Dirac blocks) and the normal part gamma (x) T.
pub fn assemble_product_parts(
    geom: &OffsetGeometry,
    m: Mode,
    eps: f64,
    grid_u: &Grid1D,
    grid_s: &Grid1D,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    require_s_grid(grid_s, eps)?;
    let leaf = checked_leaf(geom, m, eps, grid_u)?;
    let normal = NormalStencil::new(eps, grid_s, 1.0);
    let d1 = assemble_family(&leaf, &normal, 1.0, FamilyParts { leaf: true, normal: false, a_term: false })?;
    let d2 = assemble_family(&leaf, &normal, 1.0, FamilyParts { leaf: false, normal: true, a_term: false })?;
    Ok((d1, d2))
}

/// Tube operator over an arbitrary leaf family, for example a point.
pub fn assemble_product_with_leaf(leaf: &dyn Leaf, eps: f64, grid_s: &Grid1D) -> Result<OperatorMatrix> {
    require_s_grid(grid_s, eps)?;
    assemble_family(leaf, &NormalStencil::new(eps, grid_s, 1.0), 1.0, FULL)
}
