//! Surfaces of revolution, their unit-speed profile curves and the geometry of
//! parallel (offset) surfaces at signed normal distance s.
//!
//! A profile (rho(u), z(u)) with |(rho', z')| = 1 is rotated about the z-axis.
//! The unit normal is nu = sign * (-z', rho'), and the two principal
//! curvatures are along the meridian and along the parallel:
//!
//! ```text
//! kappa_mu = sign * (rho' z'' - z' rho'')      kappa_pi = sign * z' / rho
//! ```
//!
//! The offset surface at distance s has metric coefficients
//! a = 1 - s kappa_mu (meridian) and r = rho (1 - s kappa_pi) (parallel).

mod curve;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};
use curve::{RawCurve, SplineEnds};

/// Which way the unit normal points. `Outward` matches the sign convention
/// above with sign = +1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Orientation {
    #[default]
    Outward,
    Inward,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Outward => 1.0,
            Orientation::Inward => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Outward => Orientation::Inward,
            Orientation::Inward => Orientation::Outward,
        }
    }
}

impl TryFrom<i8> for Orientation {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Orientation::Outward),
            -1 => Ok(Orientation::Inward),
            other => Err(format!("normal_orientation must be +1 or -1, got {other}")),
        }
    }
}

impl From<Orientation> for i8 {
    fn from(o: Orientation) -> i8 {
        o.sign() as i8
    }
}

/// Spin structure along the closed u-direction of a torus. On surfaces with
/// poles only the bounding (antiperiodic) one exists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinStructure {
    #[default]
    Antiperiodic,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Profile runs from the axis to the axis: a sphere-like surface.
    IntervalWithPoles,
    /// Closed profile away from the axis: a torus-like surface.
    Circle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Sphere { radius: f64 },
    Spheroid { equatorial_radius: f64, polar_radius: f64 },
    Torus { major_radius: f64, minor_radius: f64 },
    /// Samples (rho, z). Equal first and last points close the curve; otherwise
    /// both ends must sit on the axis.
    Custom { points: Vec<[f64; 2]> },
}

/// Everything needed to build a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    #[serde(flatten)]
    pub kind: ProfileKind,
    #[serde(default)]
    pub normal_orientation: Orientation,
    #[serde(default)]
    pub spin_structure: SpinStructure,
}

impl GeometrySpec {
    pub fn new(kind: ProfileKind) -> Self {
        GeometrySpec { kind, normal_orientation: Orientation::Outward, spin_structure: SpinStructure::Antiperiodic }
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(ProfileKind::Sphere { radius })
    }

    pub fn spheroid(equatorial_radius: f64, polar_radius: f64) -> Self {
        Self::new(ProfileKind::Spheroid { equatorial_radius, polar_radius })
    }

    pub fn torus(major_radius: f64, minor_radius: f64) -> Self {
        Self::new(ProfileKind::Torus { major_radius, minor_radius })
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.normal_orientation = o;
        self
    }

    pub fn with_spin_structure(mut self, s: SpinStructure) -> Self {
        self.spin_structure = s;
        self
    }
}

/// Default number of panels in the arclength table.
pub const DEFAULT_NODES: usize = 2048;

/// Local data of the unit-speed profile at arclength u. Curvatures and their
/// u-derivatives already carry the orientation sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub u: f64,
    pub rho: f64,
    pub z: f64,
    pub drho: f64,
    pub dz: f64,
    pub kappa_mu: f64,
    pub kappa_pi: f64,
    pub dkappa_mu: f64,
    pub dkappa_pi: f64,
}

/// Unit-speed reparametrization of a profile curve.
#[derive(Clone, Debug)]
pub struct ProfileCurve {
    spec: GeometrySpec,
    topology: Topology,
    raw: RawCurve,
    length: f64,
    /// Arclength at the table nodes (uniform in the raw parameter).
    nodes: Vec<f64>,
    params: Vec<f64>,
    slopes: Vec<f64>,
}

/// Builds the unit-speed profile with an arclength table of `n_nodes` panels.
pub fn build_profile(spec: &GeometrySpec, n_nodes: usize) -> Result<ProfileCurve> {
    if n_nodes < 8 {
        return Err(Error::Geometry(format!("need at least 8 arclength nodes, got {n_nodes}")));
    }
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::Geometry(format!("{name} must be positive and finite, got {v}")))
        }
    };
    let (raw, topology) = match spec.kind {
        ProfileKind::Sphere { radius } => {
            positive("radius", radius)?;
            (RawCurve::Ellipse { a: radius, c: radius }, Topology::IntervalWithPoles)
        }
        ProfileKind::Spheroid { equatorial_radius, polar_radius } => {
            positive("equatorial_radius", equatorial_radius)?;
            positive("polar_radius", polar_radius)?;
            (RawCurve::Ellipse { a: equatorial_radius, c: polar_radius }, Topology::IntervalWithPoles)
        }
        ProfileKind::Torus { major_radius, minor_radius } => {
            positive("minor_radius", minor_radius)?;
            if !(major_radius > minor_radius) || !major_radius.is_finite() {
                return Err(Error::Geometry(format!(
                    "torus needs major_radius > minor_radius, got {major_radius} and {minor_radius}"
                )));
            }
            (RawCurve::Torus { big: major_radius, small: minor_radius }, Topology::Circle)
        }
        ProfileKind::Custom { ref points } => custom_curve(points)?,
    };
    if topology == Topology::IntervalWithPoles && spec.spin_structure == SpinStructure::Periodic {
        return Err(Error::Geometry("a surface with poles only carries the antiperiodic spin structure".into()));
    }

    let (t0, t1) = raw.range();
    let dt = (t1 - t0) / n_nodes as f64;
    let params: Vec<f64> = (0..=n_nodes).map(|k| t0 + k as f64 * dt).collect();
    let mut nodes = Vec::with_capacity(n_nodes + 1);
    nodes.push(0.0);
    let speed = |t: f64| raw.speed(t);
    for w in params.windows(2) {
        let piece = adaptive_simpson(&speed, w[0], w[1], 1e-15, 40);
        nodes.push(nodes.last().unwrap() + piece);
    }
    let length = nodes[n_nodes];
    let slopes = pchip_slopes(&nodes, &params);
    let curve = ProfileCurve { spec: spec.clone(), topology, raw, length, nodes, params, slopes };
    if let ProfileKind::Custom { .. } = spec.kind {
        curve.check_interior_radius()?;
    }
    Ok(curve)
}

fn custom_curve(points: &[[f64; 2]]) -> Result<(RawCurve, Topology)> {
    if points.len() < 4 {
        return Err(Error::Geometry("custom profile needs at least 4 points".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Geometry("custom profile has non-finite coordinates".into()));
    }
    let first = points[0];
    let last = points[points.len() - 1];
    let closed = (first[0] - last[0]).abs() < 1e-12 && (first[1] - last[1]).abs() < 1e-12;
    let on_axis = first[0].abs() < 1e-12 && last[0].abs() < 1e-12;
    let (ends, topology) = if closed {
        (SplineEnds::Periodic, Topology::Circle)
    } else if on_axis {
        (SplineEnds::Axis, Topology::IntervalWithPoles)
    } else {
        return Err(Error::Geometry(
            "custom profile must either close up or start and end on the axis".into(),
        ));
    };
    let inner = if closed { &points[..points.len() - 1] } else { &points[1..points.len() - 1] };
    if inner.iter().any(|p| p[0] <= 0.0) {
        return Err(Error::Geometry("custom profile has non-positive rho in the interior".into()));
    }
    if self_intersects(points, closed) {
        return Err(Error::Geometry("custom profile is self-intersecting".into()));
    }
    let mut pts = points.to_vec();
    if on_axis && !closed {
        pts[0][0] = 0.0;
        let n = pts.len();
        pts[n - 1][0] = 0.0;
    }
    Ok((RawCurve::Spline(curve::Spline2::new(&pts, ends)?), topology))
}

fn self_intersects(p: &[[f64; 2]], closed: bool) -> bool {
    let segs = p.len() - 1;
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    for i in 0..segs {
        for j in i + 2..segs {
            if closed && i == 0 && j == segs - 1 {
                continue;
            }
            let (a, b, c, d) = (p[i], p[i + 1], p[j], p[j + 1]);
            let d1 = cross(a, b, c);
            let d2 = cross(a, b, d);
            let d3 = cross(c, d, a);
            let d4 = cross(c, d, b);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return true;
            }
        }
    }
    false
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// Fritsch-Carlson slopes for a monotone cubic through (x, y).
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if del[i - 1] * del[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    d[0] = del[0];
    d[n - 1] = del[n - 2];
    d
}

const GAUSS10: [(f64, f64); 5] = [
    (0.148_874_338_981_631_2, 0.295_524_224_714_752_9),
    (0.433_395_394_129_247_2, 0.269_266_719_309_996_4),
    (0.679_409_568_299_024_4, 0.219_086_362_515_982),
    (0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (0.973_906_528_517_171_7, 0.066_671_344_308_688_14),
];

impl ProfileCurve {
    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.spec.kind
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn orientation(&self) -> Orientation {
        self.spec.normal_orientation
    }

    pub fn spin_structure(&self) -> SpinStructure {
        self.spec.spin_structure
    }

    /// Total length L of the profile.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Arclength values at which the reparametrization is tabulated.
    pub fn arclength_nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn arc_between(&self, t0: f64, t1: f64) -> f64 {
        let c = 0.5 * (t0 + t1);
        let r = 0.5 * (t1 - t0);
        GAUSS10
            .iter()
            .map(|&(x, w)| w * (self.raw.speed(c - r * x) + self.raw.speed(c + r * x)))
            .sum::<f64>()
            * r
    }

    /// Raw parameter t with arclength u.
    fn param_at(&self, u: f64) -> f64 {
        let n = self.nodes.len() - 1;
        let k = self.nodes.partition_point(|&s| s <= u).clamp(1, n) - 1;
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let (y0, y1) = (self.params[k], self.params[k + 1]);
        let h = x1 - x0;
        let s = (u - x0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut t = h00 * y0 + h10 * h * self.slopes[k] + h01 * y1 + h11 * h * self.slopes[k + 1];
        for _ in 0..8 {
            let step = (x0 + self.arc_between(y0, t) - u) / self.raw.speed(t);
            t -= step;
            if step.abs() <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }

    /// Unit-speed data at arclength u in [0, L].
    pub fn point(&self, u: f64) -> Result<ProfilePoint> {
        let slack = 1e-12 * self.length;
        if !(u >= -slack && u <= self.length + slack) {
            return Err(Error::Domain { u, length: self.length });
        }
        let u = u.clamp(0.0, self.length);
        let t = if u == 0.0 {
            self.params[0]
        } else if u == self.length {
            *self.params.last().unwrap()
        } else {
            self.param_at(u)
        };
        let (r, z) = self.raw.jet(t);
        let sign = self.spec.normal_orientation.sign();
        let v = r[1].hypot(z[1]);
        let vt = (r[1] * r[2] + z[1] * z[2]) / v;
        let c = r[1] * z[2] - z[1] * r[2];
        let ct = r[1] * z[3] - z[1] * r[3];
        let kappa_mu = c / v.powi(3);
        let dkappa_mu = (ct / v.powi(3) - 3.0 * c * vt / v.powi(4)) / v;
        let at_pole = self.topology == Topology::IntervalWithPoles && (u == 0.0 || u == self.length);
        let (rho, kappa_pi, dkappa_pi) = if at_pole {
            // Regular limit on the axis: the surface is umbilic and both
            // curvatures are even in the distance to the pole.
            (0.0, kappa_mu, 0.0)
        } else {
            let k = z[1] / (v * r[0]);
            // (rho kappa_pi)' = kappa_mu rho'
            (r[0], k, (kappa_mu - k) * r[1] / (v * r[0]))
        };
        let (kappa_mu, kappa_pi, dkappa_mu, dkappa_pi) = match self.raw {
            RawCurve::Ellipse { a, c } if a == c => (-1.0 / a, -1.0 / a, 0.0, 0.0),
            _ => (kappa_mu, kappa_pi, dkappa_mu, dkappa_pi),
        };
        Ok(ProfilePoint {
            u,
            rho,
            z: z[0],
            drho: r[1] / v,
            dz: z[1] / v,
            kappa_mu: sign * kappa_mu,
            kappa_pi: sign * kappa_pi,
            dkappa_mu: sign * dkappa_mu,
            dkappa_pi: sign * dkappa_pi,
        })
    }

    fn check_interior_radius(&self) -> Result<()> {
        let n = self.nodes.len() - 1;
        let range = match self.topology {
            Topology::Circle => 0..=n,
            Topology::IntervalWithPoles => 1..=n - 1,
        };
        for k in range {
            let (r, _) = self.raw.jet(self.params[k]);
            if r[0] <= 0.0 {
                return Err(Error::Geometry("profile reaches the axis away from its ends".into()));
            }
        }
        Ok(())
    }
}

/// Point and adapted orthonormal frame of an offset surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FermiPoint {
    pub position: [f64; 3],
    pub e_u: [f64; 3],
    pub e_phi: [f64; 3],
    pub normal: [f64; 3],
}

/// Offset-surface geometry over a fixed profile.
#[derive(Clone, Debug)]
pub struct OffsetGeometry {
    profile: ProfileCurve,
    focal_bound: f64,
}

impl OffsetGeometry {
    pub fn new(profile: ProfileCurve) -> Result<Self> {
        let mut bound = f64::INFINITY;
        for &u in profile.arclength_nodes() {
            let p = profile.point(u)?;
            let k = p.kappa_mu.abs().max(p.kappa_pi.abs());
            if k > 0.0 {
                bound = bound.min(1.0 / k);
            }
        }
        Ok(OffsetGeometry { profile, focal_bound: bound })
    }

    /// Builds profile and offset geometry in one go with the default table size.
    pub fn from_spec(spec: &GeometrySpec) -> Result<Self> {
        Self::new(build_profile(spec, DEFAULT_NODES)?)
    }

    pub fn profile(&self) -> &ProfileCurve {
        &self.profile
    }

    pub fn length(&self) -> f64 {
        self.profile.length
    }

    /// Smallest radius of curvature over the profile; offsets must stay within
    /// 0.9 of it.
    pub fn focal_bound(&self) -> f64 {
        self.focal_bound
    }

    pub fn check_offset(&self, s: f64) -> Result<()> {
        let limit = 0.9 * self.focal_bound;
        if s.is_finite() && s.abs() <= limit * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::Focal { offset: s.abs(), bound: self.focal_bound })
        }
    }

    pub fn point(&self, u: f64) -> Result<ProfilePoint> {
        self.profile.point(u)
    }

    /// (kappa_mu, kappa_pi) at arclength u.
    pub fn principal_curvatures(&self, u: f64) -> Result<(f64, f64)> {
        let p = self.profile.point(u)?;
        Ok((p.kappa_mu, p.kappa_pi))
    }

    /// Coefficients (a, r) of the offset metric a^2 du^2 + r^2 dphi^2.
    pub fn metric(&self, u: f64, s: f64) -> Result<(f64, f64)> {
        self.check_offset(s)?;
        let p = self.profile.point(u)?;
        Ok(OffsetSample::new(&p, s).metric())
    }

    /// Volume ratio Lambda = rho / (a r) between the surface and its offset.
    pub fn lambda(&self, u: f64, s: f64) -> Result<f64> {
        self.check_offset(s)?;
        Ok(OffsetSample::new(&self.profile.point(u)?, s).lambda())
    }

    /// Trace of the second fundamental form of the offset surface at s.
    pub fn trace_ii(&self, u: f64, s: f64) -> Result<f64> {
        self.check_offset(s)?;
        Ok(OffsetSample::new(&self.profile.point(u)?, s).trace_ii())
    }

    /// u-derivative of log Lambda at (u, s).
    pub fn dlog_lambda_du(&self, u: f64, s: f64) -> Result<f64> {
        self.check_offset(s)?;
        Ok(OffsetSample::new(&self.profile.point(u)?, s).dlog_lambda_du())
    }

    /// Position and orthonormal frame (e_u, e_phi, nu) at (u, phi, s). The frame
    /// is right-handed for the outward orientation and does not depend on s.
    pub fn fermi_chart(&self, u: f64, phi: f64, s: f64) -> Result<FermiPoint> {
        self.check_offset(s)?;
        let p = self.profile.point(u)?;
        let sign = self.profile.orientation().sign();
        let (sp, cp) = phi.sin_cos();
        let nr = -sign * p.dz;
        let nz = sign * p.drho;
        let rho_s = p.rho + s * nr;
        Ok(FermiPoint {
            position: [rho_s * cp, rho_s * sp, p.z + s * nz],
            e_u: [p.drho * cp, p.drho * sp, p.dz],
            e_phi: [-sp, cp, 0.0],
            normal: [nr * cp, nr * sp, nz],
        })
    }
}

/// Offset quantities at one (u, s), computed from a profile point. Operator
/// assembly evaluates the profile once per node and reuses it for every s.
#[derive(Clone, Copy, Debug)]
pub struct OffsetSample {
    pub rho: f64,
    pub kappa_mu: f64,
    pub kappa_pi: f64,
    pub dkappa_mu: f64,
    pub dkappa_pi: f64,
    pub s: f64,
}

impl OffsetSample {
    pub fn new(p: &ProfilePoint, s: f64) -> Self {
        OffsetSample {
            rho: p.rho,
            kappa_mu: p.kappa_mu,
            kappa_pi: p.kappa_pi,
            dkappa_mu: p.dkappa_mu,
            dkappa_pi: p.dkappa_pi,
            s,
        }
    }

    pub fn metric(&self) -> (f64, f64) {
        (1.0 - self.s * self.kappa_mu, self.rho * (1.0 - self.s * self.kappa_pi))
    }

    pub fn lambda(&self) -> f64 {
        1.0 / ((1.0 - self.s * self.kappa_mu) * (1.0 - self.s * self.kappa_pi))
    }

    pub fn trace_ii(&self) -> f64 {
        self.kappa_mu / (1.0 - self.s * self.kappa_mu) + self.kappa_pi / (1.0 - self.s * self.kappa_pi)
    }

    pub fn dlog_lambda_du(&self) -> f64 {
        self.s * self.dkappa_mu / (1.0 - self.s * self.kappa_mu) + self.s * self.dkappa_pi / (1.0 - self.s * self.kappa_pi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_is_unit_speed_reparametrized() {
        let g = OffsetGeometry::from_spec(&GeometrySpec::sphere(1.0)).unwrap();
        assert!((g.length() - PI).abs() < 1e-13);
        for k in 0..=40 {
            let u = PI * k as f64 / 40.0;
            let p = g.point(u).unwrap();
            assert!((p.rho - u.sin()).abs() < 1e-12, "u={u}");
            assert!((p.z - u.cos()).abs() < 1e-12);
            assert!((p.kappa_mu + 1.0).abs() < 1e-12);
            assert!((p.kappa_pi + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn torus_curvatures_at_outer_equator() {
        let g = OffsetGeometry::from_spec(&GeometrySpec::torus(2.0, 0.5)).unwrap();
        let (km, kp) = g.principal_curvatures(0.0).unwrap();
        assert!((km + 2.0).abs() < 1e-12);
        assert!((kp + 0.4).abs() < 1e-12);
        assert!((g.focal_bound() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_u_is_an_error() {
        let g = OffsetGeometry::from_spec(&GeometrySpec::sphere(1.0)).unwrap();
        assert!(matches!(g.point(4.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn focal_violation_is_reported() {
        let g = OffsetGeometry::from_spec(&GeometrySpec::sphere(1.0)).unwrap();
        assert!(g.lambda(1.0, 0.89).is_ok());
        assert!(matches!(g.lambda(1.0, 0.95), Err(Error::Focal { .. })));
    }

    #[test]
    fn torus_rejects_fat_tube() {
        assert!(build_profile(&GeometrySpec::torus(1.0, 1.0), 64).is_err());
    }

    #[test]
    fn poles_reject_periodic_spin() {
        let spec = GeometrySpec::sphere(1.0).with_spin_structure(SpinStructure::Periodic);
        assert!(build_profile(&spec, 64).is_err());
    }

    #[test]
    fn custom_open_profile_must_touch_axis() {
        let pts = vec![[0.1, 1.0], [0.5, 0.5], [0.5, -0.5], [0.1, -1.0]];
        let spec = GeometrySpec::new(ProfileKind::Custom { points: pts });
        assert!(build_profile(&spec, 64).is_err());
    }

    #[test]
    fn custom_self_intersection_is_rejected() {
        let pts = vec![[1.0, 0.0], [2.0, 1.0], [2.0, 0.0], [1.0, 1.0], [1.0, 0.0]];
        let spec = GeometrySpec::new(ProfileKind::Custom { points: pts });
        assert!(build_profile(&spec, 64).is_err());
    }

    #[test]
    fn custom_sphere_samples_approximate_the_sphere() {
        let n = 400;
        let pts: Vec<[f64; 2]> = (0..=n).map(|k| {
            let t = PI * k as f64 / n as f64;
            [t.sin(), t.cos()]
        }).collect();
        let g = OffsetGeometry::from_spec(&GeometrySpec::new(ProfileKind::Custom { points: pts })).unwrap();
        assert!((g.length() - PI).abs() < 1e-4);
        let (km, kp) = g.principal_curvatures(1.0).unwrap();
        assert!((km + 1.0).abs() < 1e-3 && (kp + 1.0).abs() < 1e-3);
    }

    #[test]
    fn orientation_round_trips_through_toml() {
        let spec: GeometrySpec = toml::from_str("kind = \"torus\"\nmajor_radius = 2\nminor_radius = 0.5\nnormal_orientation = -1\nspin_structure = \"periodic\"\n").unwrap();
        assert_eq!(spec.normal_orientation, Orientation::Inward);
        assert_eq!(spec.spin_structure, SpinStructure::Periodic);
        assert_eq!(spec.kind, ProfileKind::Torus { major_radius: 2.0, minor_radius: 0.5 });
    }
}
