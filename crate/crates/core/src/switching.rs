//! Switching points, conjugate inter-switching times and switching curves.
//!
//! Along a normal extremal, every switch lies on one of two rays through the
//! origin, `x2 = +sqrt(s) x1` (XY junctions) or `x2 = -sqrt(s) x1` (YX
//! junctions). The time to the next switch is fixed by the conjugate-point
//! condition and depends only on the slope.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{sample_arc, Control, ControlBounds, Point};
use crate::error::{Error, Result};
use crate::synthesis::{optimal_regimes, time_n_turns, time_one_switch};

/// Cap on the X-arc conjugate time. The time diverges as `s -> u1`.
pub const DEFAULT_TAU_MAX: f64 = 50.0;

/// Radicands within this distance of zero are clamped to zero.
const RADICAND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JunctionKind {
    /// X followed by Y, in the upper half plane.
    XY,
    /// Y followed by X, in the lower half plane.
    YX,
}

impl JunctionKind {
    /// Bang applied after the junction.
    pub fn next_control(self) -> Control {
        match self {
            JunctionKind::XY => Control::Y,
            JunctionKind::YX => Control::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchPoint {
    pub point: Point,
    pub kind: JunctionKind,
    /// `(x2 / x1)^2`, shared by every switch of one extremal.
    pub ratio_s: f64,
}

impl SwitchPoint {
    /// Checks the sign convention: XY junctions need `x2 >= 0`, YX `x2 <= 0`.
    pub fn new(point: Point, kind: JunctionKind) -> Result<Self> {
        point.check_domain()?;
        let ok = match kind {
            JunctionKind::XY => point.x2 >= 0.0,
            JunctionKind::YX => point.x2 <= 0.0,
        };
        if !ok {
            return Err(Error::Precondition(format!(
                "{kind:?} junction at ({}, {}) has the wrong sign of x2",
                point.x1, point.x2
            )));
        }
        let r = point.slope();
        Ok(SwitchPoint {
            point,
            kind,
            ratio_s: r * r,
        })
    }
}

/// `(sin, cos)` of `2 sqrt(u2) tau` for the Y-arc leaving an XY junction.
pub fn conjugate_phase_y(p: &SwitchPoint, bounds: &ControlBounds) -> (f64, f64) {
    let (x1, x2) = (p.point.x1, p.point.x2);
    let u2 = bounds.u2();
    let den = x2 * x2 + u2 * x1 * x1;
    (
        -2.0 * u2.sqrt() * x1 * x2 / den,
        (x2 * x2 - u2 * x1 * x1) / den,
    )
}

/// `(sinh, cosh)` of `2 sqrt(u1) tau` for the X-arc leaving a YX junction.
pub fn conjugate_phase_x(p: &SwitchPoint, bounds: &ControlBounds) -> (f64, f64) {
    let (x1, x2) = (p.point.x1, p.point.x2);
    let u1 = bounds.u1();
    let den = x2 * x2 - u1 * x1 * x1;
    (
        -2.0 * u1.sqrt() * x1 * x2 / den,
        (x2 * x2 + u1 * x1 * x1) / den,
    )
}

/// Time along the Y-arc from an XY junction to the next (YX) switch.
///
/// Lies in `(pi / (2 sqrt(u2)), pi / sqrt(u2))`; the trivial roots `0` and
/// the full period are excluded.
pub fn inter_switch_time_y(p: &SwitchPoint, bounds: &ControlBounds) -> Result<f64> {
    if p.kind != JunctionKind::XY || !(p.point.x2 > 0.0) {
        return Err(Error::Precondition(
            "Y inter-switch time needs an XY junction with x2 > 0".into(),
        ));
    }
    let (sn, cs) = conjugate_phase_y(p, bounds);
    let mut angle = sn.atan2(cs);
    if angle <= 0.0 {
        angle += 2.0 * PI;
    }
    Ok(angle / (2.0 * bounds.u2().sqrt()))
}

/// Time along the X-arc from a YX junction to the next (XY) switch, capped at
/// [`DEFAULT_TAU_MAX`].
pub fn inter_switch_time_x(p: &SwitchPoint, bounds: &ControlBounds) -> Result<f64> {
    inter_switch_time_x_capped(p, bounds, DEFAULT_TAU_MAX)
}

pub fn inter_switch_time_x_capped(
    p: &SwitchPoint,
    bounds: &ControlBounds,
    tau_max: f64,
) -> Result<f64> {
    if p.kind != JunctionKind::YX || !(p.point.x2 < 0.0) {
        return Err(Error::Precondition(
            "X inter-switch time needs a YX junction with x2 < 0".into(),
        ));
    }
    let u1 = bounds.u1();
    let (x1, x2) = (p.point.x1, p.point.x2);
    if x2 * x2 <= u1 * x1 * x1 {
        return Err(Error::NoConjugateTime { s: p.ratio_s, u1 });
    }
    // acosh((s+u1)/(s-u1)) = ln((r+q)/(r-q)) with r = |x2|/x1, q = sqrt(u1)
    let r = -x2 / x1;
    let q = u1.sqrt();
    let tau = ((r + q) / (r - q)).ln() / (2.0 * q);
    if !(tau <= tau_max) {
        return Err(Error::ConjugateTimeTooLarge { tau, cap: tau_max });
    }
    Ok(tau)
}

fn clamp_radicand(v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v > -RADICAND_SLACK {
        Ok(0.0)
    } else {
        Err(Error::Infeasible(format!("{what} radicand is negative ({v})")))
    }
}

/// Next switch after an XY junction at abscissa `kappa` whose incoming X-arc
/// crossed the axis at `(alpha, 0)`.
///
/// The returned YX junction `(zeta, xi)` satisfies `xi / zeta = -mu / kappa`.
pub fn next_switch_on_y(kappa: f64, alpha: f64, bounds: &ControlBounds) -> Result<SwitchPoint> {
    if !(kappa > 0.0 && alpha > 0.0) {
        return Err(Error::Precondition("kappa and alpha must be positive".into()));
    }
    let (u1, u2) = (bounds.u1(), bounds.u2());
    let (a2, k2) = (alpha * alpha, kappa * kappa);
    // (kappa^2 - alpha^2)(u1 alpha^2 kappa^2 + 1), i.e. mu^2 alpha^2 kappa^2
    let p = clamp_radicand(
        (kappa - alpha) * (kappa + alpha) * (u1 * a2 * k2 + 1.0),
        "kappa^2 - alpha^2",
    )?;
    // (u1+u2) a^2 k^4 + (1 - u1 a^4) k^2 - a^2, regrouped as a sum of nonnegative terms
    let d = u2 * a2 * k2 * k2 + p;
    if !(d > 0.0) {
        return Err(Error::Infeasible("Y-arc switch denominator vanishes".into()));
    }
    let sd = d.sqrt();
    SwitchPoint::new(
        Point::new(alpha * kappa / sd, -p.sqrt() / (kappa * sd)),
        JunctionKind::YX,
    )
}

/// Next switch after a YX junction at abscissa `zeta` whose incoming Y-arc
/// passed the axis at its apex `(beta, 0)`.
///
/// The returned XY junction `(lambda, nu)` satisfies `nu / lambda = -xi / zeta`.
pub fn next_switch_on_x(zeta: f64, beta: f64, bounds: &ControlBounds) -> Result<SwitchPoint> {
    if !(zeta > 0.0 && beta > 0.0) {
        return Err(Error::Precondition("zeta and beta must be positive".into()));
    }
    let (u1, u2) = (bounds.u1(), bounds.u2());
    let (b2, z2) = (beta * beta, zeta * zeta);
    if u2 * b2 * b2 <= 1.0 {
        return Err(Error::Precondition(
            "incoming Y-arc must satisfy u2 beta^2 > 1/beta^2".into(),
        ));
    }
    // (beta^2 - zeta^2)(u2 beta^2 zeta^2 - 1), i.e. xi^2 beta^2 zeta^2
    let p = clamp_radicand(
        (beta - zeta) * (beta + zeta) * (u2 * b2 * z2 - 1.0),
        "(beta^2 - zeta^2)(u2 beta^2 zeta^2 - 1)",
    )?;
    // -(u1+u2) b^2 z^4 + (1 + u2 b^4) z^2 - b^2 = beta^2 zeta^4 (s - u1)
    let d = p - u1 * b2 * z2 * z2;
    if !(d > 0.0) {
        return Err(Error::Infeasible(format!(
            "X-arc switch needs s > u1 (denominator radicand {d})"
        )));
    }
    let sd = d.sqrt();
    SwitchPoint::new(
        Point::new(beta * zeta / sd, p.sqrt() / (zeta * sd)),
        JunctionKind::XY,
    )
}

/// Next switch along the extremal through `p`, using the first integral of the
/// arc that leaves `p` to recover its axis crossing.
pub fn next_switch(p: &SwitchPoint, bounds: &ControlBounds) -> Result<SwitchPoint> {
    match p.kind {
        JunctionKind::XY => {
            next_switch_on_y(p.point.x1, crate::dynamics::x_axis_crossing(p.point, bounds), bounds)
        }
        JunctionKind::YX => {
            next_switch_on_x(p.point.x1, crate::dynamics::y_apex(p.point, bounds), bounds)
        }
    }
}

/// One family of switching points, ordered along the curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub label: String,
    /// Turn count of the optimal strategy whose switches form this curve.
    pub turns: u32,
    /// 1-based switch index along the trajectory; `None` for the initial X-arc.
    pub switch_index: Option<usize>,
    pub points: Vec<Point>,
}

/// Switching curves of the optimal synthesis over a sweep of targets.
///
/// The grid is classified into runs of equal optimal turn count. A run with
/// zero turns contributes the initial X-arc from `(1, 0)` up to its last
/// switch point. A run with `n` turns contributes `2n` curves, one per switch
/// index, each sampled at `resolution` targets spread evenly over the run.
pub fn switching_curves(
    bounds: &ControlBounds,
    gamma_grid: &[f64],
    resolution: usize,
) -> Result<Vec<Polyline>> {
    if let Some(&g) = gamma_grid.iter().find(|g| !(**g > 1.0 && g.is_finite())) {
        return Err(Error::InvalidTarget(g));
    }
    if gamma_grid.is_empty() || resolution == 0 {
        return Ok(Vec::new());
    }
    let mut grid = gamma_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let regimes = optimal_regimes(bounds, &grid)?;

    let mut curves = Vec::new();
    for regime in regimes {
        let gammas: Vec<f64> = match resolution {
            1 => vec![regime.gamma_lo],
            _ => (0..resolution)
                .map(|i| {
                    let f = i as f64 / (resolution - 1) as f64;
                    regime.gamma_lo + f * (regime.gamma_hi - regime.gamma_lo)
                })
                .collect(),
        };
        if regime.turns == 0 {
            let last = time_one_switch(regime.gamma_hi, bounds)?;
            curves.push(Polyline {
                label: format!("zero_turn_x_arc_{}", curves.len()),
                turns: 0,
                switch_index: None,
                points: sample_arc(Point::START, Control::X, last.x_duration, resolution, bounds)?,
            });
            continue;
        }
        let n = regime.turns;
        let solutions = gammas
            .par_iter()
            .map(|&g| time_n_turns(g, bounds, n))
            .collect::<Result<Vec<_>>>()?;
        for j in 0..(2 * n as usize) {
            curves.push(Polyline {
                label: format!("n{}_switch{}_{}", n, j + 1, curves.len()),
                turns: n,
                switch_index: Some(j + 1),
                points: solutions.iter().map(|s| s.switch_points[j].point).collect(),
            });
        }
    }
    Ok(curves)
}
