//! Closed-form bang arcs of the reduced Ermakov system
//!
//! ```text
//! x1' = x2,    x2' = -u x1 + 1 / x1^3,    u in {-u1, u2}
//! ```
//!
//! `x1` is the dimensionless scale factor `b` and `x2` the scaled velocity
//! `b' / w0`, with time measured in units of `1 / w0`. Every bang arc has a
//! first integral, and along any arc the squared scale `z = x1^2` obeys the
//! linear equation `z'' = -4 u z + 2 c`. That makes every propagation in this
//! module closed-form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase-plane state of the reduced system. Valid states have `x1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    /// Initial condition `b(0) = 1, b'(0) = 0`.
    pub const START: Point = Point { x1: 1.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Point { x1, x2 }
    }

    /// The rest point `(gamma, 0)` every transfer ends at.
    pub const fn target(gamma: f64) -> Self {
        Point { x1: gamma, x2: 0.0 }
    }

    /// Slope `x2 / x1` of the ray through the origin.
    pub fn slope(&self) -> f64 {
        self.x2 / self.x1
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    pub(crate) fn check_domain(&self) -> Result<()> {
        if self.x1 > 0.0 && self.x1.is_finite() && self.x2.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x1: self.x1 })
        }
    }
}

/// Admissible control interval `[-u1, u2]`, with `u1, u2 >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct ControlBounds {
    u1: f64,
    u2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBounds {
    u1: f64,
    u2: f64,
}

impl TryFrom<RawBounds> for ControlBounds {
    type Error = Error;

    fn try_from(raw: RawBounds) -> Result<Self> {
        ControlBounds::new(raw.u1, raw.u2)
    }
}

impl From<ControlBounds> for RawBounds {
    fn from(b: ControlBounds) -> Self {
        RawBounds { u1: b.u1, u2: b.u2 }
    }
}

impl ControlBounds {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        if u1.is_finite() && u2.is_finite() && u1 >= 1.0 && u2 >= 1.0 {
            Ok(ControlBounds { u1, u2 })
        } else {
            Err(Error::InvalidBounds { u1, u2 })
        }
    }

    /// Magnitude of the lower (expulsive) bang.
    pub fn u1(&self) -> f64 {
        self.u1
    }

    /// Upper (confining) bang.
    pub fn u2(&self) -> f64 {
        self.u2
    }

    /// Upper end `(u2 - 1)^2 / 4` of the admissible turn-ratio interval.
    pub fn s_plus(&self) -> f64 {
        let d = self.u2 - 1.0;
        d * d / 4.0
    }

    /// Whether the turn-ratio interval `(u1, s_plus]` is nonempty.
    pub fn spiral_feasible(&self) -> bool {
        self.s_plus() > self.u1
    }
}

/// One of the two bang values. `X` applies `-u1`, `Y` applies `u2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Control {
    X,
    Y,
}

impl Control {
    pub fn value(self, bounds: &ControlBounds) -> f64 {
        match self {
            Control::X => -bounds.u1,
            Control::Y => bounds.u2,
        }
    }

    pub fn other(self) -> Control {
        match self {
            Control::X => Control::Y,
            Control::Y => Control::X,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Control::X => "X",
            Control::Y => "Y",
        }
    }
}

/// Conserved quantity of one bang arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentInvariant {
    pub c: f64,
}

/// `x2^2 - u1 x1^2 + 1/x1^2` on X-arcs, `x2^2 + u2 x1^2 + 1/x1^2` on Y-arcs.
pub fn first_integral(p: Point, ctrl: Control, bounds: &ControlBounds) -> SegmentInvariant {
    let z = p.x1 * p.x1;
    let c = match ctrl {
        Control::X => p.x2 * p.x2 - bounds.u1 * z + 1.0 / z,
        Control::Y => p.x2 * p.x2 + bounds.u2 * z + 1.0 / z,
    };
    SegmentInvariant { c }
}

fn finite_point(x1: f64, x2: f64, t: f64) -> Result<Point> {
    if x1.is_finite() && x2.is_finite() {
        Ok(Point { x1, x2 })
    } else {
        Err(Error::Overflow { t })
    }
}

/// X-trajectory through the axis point `(alpha, 0)`, evaluated `t` time units later.
pub fn evolve_x_from_axis(alpha: f64, t: f64, bounds: &ControlBounds) -> Result<Point> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfDomain { x1: alpha });
    }
    let u1 = bounds.u1;
    let a2 = alpha * alpha;
    let inv = 1.0 / (u1 * a2);
    let w = 2.0 * u1.sqrt();
    let (ch, sh) = ((w * t).cosh(), (w * t).sinh());
    let x1 = (0.5 * (a2 - inv) + 0.5 * (a2 + inv) * ch).sqrt();
    // d/dt of the radicand is w (a2 + inv) sinh / 2
    let x2 = 0.25 * w * (a2 + inv) * sh / x1;
    finite_point(x1, x2, t)
}

/// Result of [`evolve_y_from_axis`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisEvolution {
    pub point: Point,
    /// `u2 beta^4 = 1`: the start is the Y fixed point and never moves.
    pub equilibrium: bool,
}

/// Y-trajectory through the axis point `(beta, 0)`, evaluated `t` time units later.
///
/// The orbit is closed with period `pi / sqrt(u2)`. When `u2 beta^2 > 1/beta^2`
/// the first half period runs through the lower quadrant.
pub fn evolve_y_from_axis(beta: f64, t: f64, bounds: &ControlBounds) -> Result<AxisEvolution> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::OutOfDomain { x1: beta });
    }
    let u2 = bounds.u2;
    let b2 = beta * beta;
    if (u2 * b2 * b2 - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(AxisEvolution {
            point: Point::new(beta, 0.0),
            equilibrium: true,
        });
    }
    let inv = 1.0 / (u2 * b2);
    let w = 2.0 * u2.sqrt();
    let (sn, cs) = (w * t).sin_cos();
    let x1 = (0.5 * (b2 + inv) + 0.5 * (b2 - inv) * cs).sqrt();
    let x2 = -0.25 * w * (b2 - inv) * sn / x1;
    Ok(AxisEvolution {
        point: finite_point(x1, x2, t)?,
        equilibrium: false,
    })
}

/// Propagates `p` along the `ctrl` bang for a signed time `t`.
pub fn flow(p: Point, ctrl: Control, t: f64, bounds: &ControlBounds) -> Result<Point> {
    p.check_domain()?;
    if t == 0.0 {
        return Ok(p);
    }
    let c = first_integral(p, ctrl, bounds).c;
    let z0 = p.x1 * p.x1;
    let zd0 = 2.0 * p.x1 * p.x2;
    let (z, zd) = match ctrl {
        Control::Y => {
            let u2 = bounds.u2;
            let w = 2.0 * u2.sqrt();
            let zc = c / (2.0 * u2);
            let (sn, cs) = (w * t).sin_cos();
            let a = z0 - zc;
            (zc + a * cs + zd0 / w * sn, -a * w * sn + zd0 * cs)
        }
        Control::X => {
            let u1 = bounds.u1;
            let w = 2.0 * u1.sqrt();
            let zc = -c / (2.0 * u1);
            let (ch, sh) = ((w * t).cosh(), (w * t).sinh());
            let a = z0 - zc;
            (zc + a * ch + zd0 / w * sh, a * w * sh + zd0 * ch)
        }
    };
    if !(z.is_finite() && zd.is_finite()) {
        return Err(Error::Overflow { t });
    }
    if z <= 0.0 {
        return Err(Error::DomainLimit { t });
    }
    let x1 = z.sqrt();
    finite_point(x1, zd / (2.0 * x1), t)
}

/// Axis crossing `alpha` of the X-orbit through `p`.
///
/// Every X-orbit has exactly one point on the axis, its minimum of `x1`.
pub fn x_axis_crossing(p: Point, bounds: &ControlBounds) -> f64 {
    let u1 = bounds.u1;
    let c = first_integral(p, Control::X, bounds).c;
    let r = (c * c + 4.0 * u1).sqrt();
    // roots of u1 y^2 + c y - 1 = 0, written without cancellation
    let a2 = if c >= 0.0 { 2.0 / (c + r) } else { (r - c) / (2.0 * u1) };
    a2.sqrt()
}

/// Outer axis crossing `beta` (largest `x1`) of the Y-orbit through `p`.
pub fn y_apex(p: Point, bounds: &ControlBounds) -> f64 {
    let u2 = bounds.u2;
    let c = first_integral(p, Control::Y, bounds).c;
    let disc = (c * c - 4.0 * u2).max(0.0);
    ((c + disc.sqrt()) / (2.0 * u2)).sqrt()
}

/// `count` points evenly spaced in time along an arc, both ends included.
pub fn sample_arc(
    start: Point,
    ctrl: Control,
    duration: f64,
    count: usize,
    bounds: &ControlBounds,
) -> Result<Vec<Point>> {
    match count {
        0 => Ok(Vec::new()),
        1 => Ok(vec![start]),
        _ => (0..count)
            .map(|i| {
                let t = duration * i as f64 / (count - 1) as f64;
                flow(start, ctrl, t, bounds)
            })
            .collect(),
    }
}
