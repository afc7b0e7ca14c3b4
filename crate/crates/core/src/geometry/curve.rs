//! Raw parametrized profile curves t -> (rho(t), z(t)) with derivatives up to
//! third order. Arclength is handled one level up.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Value and first three derivatives of a scalar function.
pub(crate) type Jet = [f64; 4];

#[derive(Clone, Debug)]
pub(crate) enum RawCurve {
    /// rho = a sin t, z = c cos t on [0, pi]. A sphere has a == c.
    Ellipse { a: f64, c: f64 },
    /// rho = R + r cos t, z = -r sin t on [0, 2 pi]; clockwise so that the
    /// rotated tangent points away from the axis at t = 0.
    Torus { big: f64, small: f64 },
    Spline(Spline2),
}

impl RawCurve {
    pub(crate) fn range(&self) -> (f64, f64) {
        match self {
            RawCurve::Ellipse { .. } => (0.0, std::f64::consts::PI),
            RawCurve::Torus { .. } => (0.0, 2.0 * std::f64::consts::PI),
            RawCurve::Spline(s) => (0.0, *s.knots.last().unwrap()),
        }
    }

    pub(crate) fn jet(&self, t: f64) -> (Jet, Jet) {
        match *self {
            RawCurve::Ellipse { a, c } => {
                let (s, co) = t.sin_cos();
                (
                    [a * s, a * co, -a * s, -a * co],
                    [c * co, -c * s, -c * co, c * s],
                )
            }
            RawCurve::Torus { big, small } => {
                let (s, co) = t.sin_cos();
                (
                    [big + small * co, -small * s, -small * co, small * s],
                    [-small * s, -small * co, small * s, small * co],
                )
            }
            RawCurve::Spline(ref sp) => sp.jet(t),
        }
    }

    pub(crate) fn speed(&self, t: f64) -> f64 {
        let (r, z) = self.jet(t);
        r[1].hypot(z[1])
    }
}

/// How the ends of a spline are closed off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum SplineEnds {
    /// Closed loop: periodic conditions on both coordinates.
    Periodic,
    /// Both ends on the rotation axis: rho'' = 0 and z' = 0 there, which is
    /// what smoothness of the surface of revolution across the axis demands.
    Axis,
}

/// Cubic spline through planar points, parametrized by cumulative chord length.
#[derive(Clone, Debug)]
pub(crate) struct Spline2 {
    knots: Vec<f64>,
    rho: Vec<f64>,
    z: Vec<f64>,
    m_rho: Vec<f64>,
    m_z: Vec<f64>,
}

impl Spline2 {
    pub(crate) fn new(points: &[[f64; 2]], ends: SplineEnds) -> Result<Self> {
        let mut knots = vec![0.0];
        for w in points.windows(2) {
            let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            if d <= 0.0 {
                return Err(Error::Geometry("custom profile has repeated consecutive points".into()));
            }
            knots.push(knots.last().unwrap() + d);
        }
        let rho: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let z: Vec<f64> = points.iter().map(|p| p[1]).collect();
        let (m_rho, m_z) = match ends {
            SplineEnds::Periodic => (
                second_derivatives(&knots, &rho, End::Periodic)?,
                second_derivatives(&knots, &z, End::Periodic)?,
            ),
            SplineEnds::Axis => (
                second_derivatives(&knots, &rho, End::Natural)?,
                second_derivatives(&knots, &z, End::Clamped)?,
            ),
        };
        Ok(Spline2 { knots, rho, z, m_rho, m_z })
    }

    fn jet(&self, t: f64) -> (Jet, Jet) {
        let n = self.knots.len();
        let t = t.clamp(0.0, self.knots[n - 1]);
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        (
            piece_jet(&self.knots, &self.rho, &self.m_rho, i, t),
            piece_jet(&self.knots, &self.z, &self.m_z, i, t),
        )
    }
}

#[derive(Clone, Copy)]
enum End {
    Natural,
    Clamped,
    Periodic,
}

fn piece_jet(x: &[f64], y: &[f64], m: &[f64], i: usize, t: f64) -> Jet {
    let h = x[i + 1] - x[i];
    let a = (x[i + 1] - t) / h;
    let b = (t - x[i]) / h;
    let val = a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    let d1 = (y[i + 1] - y[i]) / h - (3.0 * a * a - 1.0) * h / 6.0 * m[i] + (3.0 * b * b - 1.0) * h / 6.0 * m[i + 1];
    let d2 = a * m[i] + b * m[i + 1];
    let d3 = (m[i + 1] - m[i]) / h;
    [val, d1, d2, d3]
}

/// Second derivatives at the knots. Profiles have at most a few thousand
/// points, so a dense solve is fine.
fn second_derivatives(x: &[f64], y: &[f64], end: End) -> Result<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope = |i: usize| (y[i + 1] - y[i]) / h[i];
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 1..n - 1 {
        a[(i, i - 1)] = h[i - 1];
        a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
        a[(i, i + 1)] = h[i];
        rhs[i] = 6.0 * (slope(i) - slope(i - 1));
    }
    match end {
        End::Natural => {
            a[(0, 0)] = 1.0;
            a[(n - 1, n - 1)] = 1.0;
        }
        End::Clamped => {
            a[(0, 0)] = 2.0 * h[0];
            a[(0, 1)] = h[0];
            rhs[0] = 6.0 * slope(0);
            a[(n - 1, n - 1)] = 2.0 * h[n - 2];
            a[(n - 1, n - 2)] = h[n - 2];
            rhs[n - 1] = -6.0 * slope(n - 2);
        }
        End::Periodic => {
            // Knot n-1 duplicates knot 0.
            a[(0, 0)] = 2.0 * (h[n - 2] + h[0]);
            a[(0, 1)] = h[0];
            a[(0, n - 2)] += h[n - 2];
            rhs[0] = 6.0 * (slope(0) - slope(n - 2));
            a[(n - 1, 0)] = 1.0;
            a[(n - 1, n - 1)] = -1.0;
        }
    }
    a.lu()
        .solve(&rhs)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Geometry("spline system is singular".into()))
}
