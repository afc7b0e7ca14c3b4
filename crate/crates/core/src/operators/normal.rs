use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::Grid1D;

/// Staggered discretization of `T = i sigma_1 d_s - f sigma_2` on (-eps, eps).
///
/// The sigma_3 = +1 component lives on the n cell centers, the -1 component on
/// the n - 1 interior faces, which encodes the Dirichlet condition at the
/// ends. Local order is c_0, f_1, c_1, ..., f_{n-1}, c_{n-1}, so the matrix is
/// tridiagonal. The lower block is `i (d_s - f)`, whose discrete kernel is a
/// sampled cosine bump.
#[derive(Clone, Debug)]
pub struct NormalStencil {
    grid: Grid1D,
    half_width: f64,
    scale: f64,
}

impl NormalStencil {
    /// Stencil on `grid`, which must span (-w, w); node positions and the
    /// operator are then rescaled by `scale`, so the physical interval is
    /// (-w scale, w scale).
    pub fn new(half_width: f64, grid: &Grid1D, scale: f64) -> Self {
        NormalStencil { grid: *grid, half_width, scale }
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.grid.len() - 1
    }

    pub fn epsilon(&self) -> f64 {
        self.half_width * self.scale
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Potential f at a grid coordinate.
    fn potential(&self, x: f64) -> f64 {
        let c = FRAC_PI_2 / self.half_width;
        -c * (c * x).tan()
    }

    /// (physical s, sigma_3) for each local index.
    pub fn sites(&self) -> Vec<(f64, i8)> {
        let n = self.grid.len();
        (0..self.dim())
            .map(|i| {
                if i % 2 == 0 {
                    (self.scale * self.grid.center(i / 2), 1)
                } else {
                    (self.scale * self.grid.face(i / 2 + 1), -1)
                }
            })
            .take(2 * n - 1)
            .collect()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let n = self.grid.len();
        let h = self.grid.h();
        let inv = 1.0 / self.scale;
        let mut out = Vec::with_capacity(4 * n);
        for k in 1..n {
            let face = 2 * k - 1;
            let f_right = self.potential(self.grid.center(k));
            let f_left = self.potential(self.grid.center(k - 1));
            let right = Complex64::new(0.0, inv * (1.0 / h - 0.5 * f_right));
            let left = Complex64::new(0.0, inv * (-1.0 / h - 0.5 * f_left));
            for (col, v) in [(2 * k, right), (2 * k - 2, left)] {
                out.push((face, col, v));
                out.push((col, face, v.conj()));
            }
        }
        out
    }
}
