//! Leaf operators: what sits at each normal node of the tube.

use num_complex::Complex64;

use super::{check_mode, Grid1D, Mode, UBoundary};
use crate::geometry::{OffsetGeometry, OffsetSample, ProfilePoint, SpinStructure, Topology};
use crate::Result;

/// A family of Hermitian, chirality-odd matrices L(s) on a fixed basis.
pub trait Leaf: Sync {
    fn dim(&self) -> usize;
    /// (u, gamma) for each basis vector.
    fn sites(&self) -> Vec<(f64, i8)>;
    /// Triplets of L(s).
    fn block(&self, s: f64) -> Vec<(usize, usize, Complex64)>;
    /// Triplets of the A-term at s; empty when there is none.
    fn a_block(&self, _s: f64) -> Vec<(usize, usize, Complex64)> {
        Vec::new()
    }
    fn u_boundary(&self) -> UBoundary;
    fn u_range(&self) -> (f64, f64);
    fn mode(&self) -> Option<Mode> {
        None
    }
    fn n_u(&self) -> usize {
        0
    }
}

/// Zero-dimensional leaf: a single positive-chirality state with L = 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct PointLeaf;

impl Leaf for PointLeaf {
    fn dim(&self) -> usize {
        1
    }
    fn sites(&self) -> Vec<(f64, i8)> {
        vec![(0.0, 1)]
    }
    fn block(&self, _s: f64) -> Vec<(usize, usize, Complex64)> {
        Vec::new()
    }
    fn u_boundary(&self) -> UBoundary {
        UBoundary::None
    }
    fn u_range(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Staggered discretization of the mode-m surface Dirac operator.
///
/// Local index 2j is the cell center c_j and 2j + 1 the face f_{j+1}. With
/// poles, the north face f_0 carries a Dirichlet zero and the south face f_n
/// is an unknown; on a circle f_n is identified with f_0 (with a sign for the
/// antiperiodic structure). For m > 0 the upper component lives on centers;
/// negative m uses D_{-m} = sigma_1 D_m sigma_1, which only swaps labels.
#[derive(Clone, Debug)]
pub struct ModeLeaf {
    mode: Mode,
    n: usize,
    h: f64,
    length: f64,
    boundary: UBoundary,
    centers: Vec<ProfilePoint>,
    /// f_0 .. f_n.
    faces: Vec<ProfilePoint>,
}

impl ModeLeaf {
    pub fn new(geom: &OffsetGeometry, mode: Mode, grid: &Grid1D) -> Result<Self> {
        check_mode(geom, mode)?;
        let n = grid.len();
        let centers = grid.centers().map(|u| geom.point(u)).collect::<Result<Vec<_>>>()?;
        let faces = (0..=n).map(|k| geom.point(grid.face(k))).collect::<Result<Vec<_>>>()?;
        let p = geom.profile();
        let boundary = match (p.topology(), p.spin_structure()) {
            (Topology::IntervalWithPoles, _) => UBoundary::Poles,
            (Topology::Circle, SpinStructure::Periodic) => UBoundary::Periodic,
            (Topology::Circle, SpinStructure::Antiperiodic) => UBoundary::Antiperiodic,
        };
        Ok(ModeLeaf { mode, n, h: grid.h(), length: geom.length(), boundary, centers, faces })
    }

    fn upper_on_centers(&self) -> bool {
        self.mode.twice() >= 0
    }

    /// Neighbouring faces of center j as (local index, face point, seam sign).
    fn neighbours(&self, j: usize) -> impl Iterator<Item = (usize, &ProfilePoint, f64, bool)> + '_ {
        let right = Some((2 * j + 1, &self.faces[j + 1], 1.0, true));
        let left = if j > 0 {
            Some((2 * j - 1, &self.faces[j], 1.0, false))
        } else {
            match self.boundary {
                UBoundary::Periodic => Some((2 * self.n - 1, &self.faces[0], 1.0, false)),
                UBoundary::Antiperiodic => Some((2 * self.n - 1, &self.faces[0], -1.0, false)),
                _ => None,
            }
        };
        right.into_iter().chain(left)
    }
}

fn push_hermitian(out: &mut Vec<(usize, usize, Complex64)>, i: usize, j: usize, v: Complex64) {
    out.push((i, j, v));
    out.push((j, i, v.conj()));
}

impl Leaf for ModeLeaf {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn sites(&self) -> Vec<(f64, i8)> {
        let g: i8 = if self.upper_on_centers() { 1 } else { -1 };
        (0..self.n)
            .flat_map(|j| {
                let f = if j + 1 == self.n { self.length } else { self.faces[j + 1].u };
                [(self.centers[j].u, g), (f, -g)]
            })
            .collect()
    }

    fn block(&self, s: f64) -> Vec<(usize, usize, Complex64)> {
        let m = self.mode.value().abs();
        let mut out = Vec::with_capacity(8 * self.n);
        for j in 0..self.n {
            let c = OffsetSample::new(&self.centers[j], s);
            let (ac, rc) = c.metric();
            let wc = ac.powf(-0.5) / self.h;
            let mr = 0.5 * m / rc;
            for (col, face, seam, right) in self.neighbours(j) {
                let af = OffsetSample::new(face, s).metric().0;
                let d = if right { wc * af.powf(-0.5) } else { -wc * af.powf(-0.5) };
                push_hermitian(&mut out, 2 * j, col, Complex64::new(0.0, -(d + mr) * seam));
            }
        }
        out
    }

    fn a_block(&self, s: f64) -> Vec<(usize, usize, Complex64)> {
        let w = |p: &ProfilePoint| {
            let x = OffsetSample::new(p, s);
            0.5 * x.dlog_lambda_du() / x.metric().0
        };
        let mut out = Vec::with_capacity(4 * self.n);
        for j in 0..self.n {
            let wc = w(&self.centers[j]);
            for (col, face, seam, _) in self.neighbours(j) {
                let v = Complex64::new(0.0, -0.25 * (wc + w(face)) * seam);
                out.push((2 * j, col, v));
                out.push((col, 2 * j, v));
            }
        }
        out
    }

    fn u_boundary(&self) -> UBoundary {
        self.boundary
    }

    fn u_range(&self) -> (f64, f64) {
        (0.0, self.length)
    }

    fn mode(&self) -> Option<Mode> {
        Some(self.mode)
    }

    fn n_u(&self) -> usize {
        self.n
    }
}
