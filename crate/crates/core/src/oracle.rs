//! Independent numerical checks of a schedule.
//!
//! Nothing here uses the closed forms from [`crate::dynamics`] or
//! [`crate::synthesis`]. State, costate and variational equations are
//! integrated by fixed-step classical RK4, and each arc boundary is hit
//! exactly by shortening the last step of the arc.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Control, ControlBounds, Point};
use crate::error::{Error, Result};
use crate::schedule::ControlSchedule;

pub const DEFAULT_STEP: f64 = 1e-5;

/// Integration aborts once `x1` drops to this value.
pub const X1_MIN: f64 = 1e-6;

/// `|lambda2|` below this is treated as zero in the sign test of `Phi = -lambda2`.
pub const PHI_DEADBAND: f64 = 1e-7;

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStep(step))
    }
}

fn rk4<const N: usize>(y: &[f64; N], h: f64, f: &impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], k: &[f64; N], c: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += c * k[i];
        }
        out
    };
    let k1 = f(y);
    let k2 = f(&add(y, &k1, 0.5 * h));
    let k3 = f(&add(y, &k2, 0.5 * h));
    let k4 = f(&add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates `y' = f(y)` over a signed `duration`, calling `visit(t, y)`
/// after every step. The first component must be `x1`.
fn march<const N: usize>(
    y0: [f64; N],
    t0: f64,
    duration: f64,
    step: f64,
    f: impl Fn(&[f64; N]) -> [f64; N],
    mut visit: impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N]> {
    let full = (duration.abs() / step).floor();
    let mut n = full as usize;
    let rest = duration.abs() - full * step;
    if rest > 1e-9 * step {
        n += 1;
    }
    let h = step.copysign(duration);
    let mut y = y0;
    for k in 1..=n {
        let t_prev = t0 + (k - 1) as f64 * h;
        let t_next = if k == n { t0 + duration } else { t0 + k as f64 * h };
        y = rk4(&y, t_next - t_prev, &f);
        if !(y[0] > X1_MIN) {
            return Err(Error::DomainProximity { t: t_next, x1: y[0] });
        }
        visit(t_next, &y);
    }
    Ok(y)
}

fn state_rhs(u: f64) -> impl Fn(&[f64; 2]) -> [f64; 2] {
    move |y| [y[1], -u * y[0] + 1.0 / (y[0] * y[0] * y[0])]
}

/// State and costate: `lambda' = -lambda A`, with `A` the state Jacobian.
fn costate_rhs(u: f64) -> impl Fn(&[f64; 4]) -> [f64; 4] {
    move |y| {
        let x1 = y[0];
        let x1_2 = x1 * x1;
        [
            y[1],
            -u * x1 + 1.0 / (x1_2 * x1),
            y[3] * (u + 3.0 / (x1_2 * x1_2)),
            -y[2],
        ]
    }
}

/// State and tangent vector: `w' = A w`.
fn variational_rhs(u: f64) -> impl Fn(&[f64; 4]) -> [f64; 4] {
    move |y| {
        let x1 = y[0];
        let x1_2 = x1 * x1;
        [
            y[1],
            -u * x1 + 1.0 / (x1_2 * x1),
            y[3],
            -(u + 3.0 / (x1_2 * x1_2)) * y[2],
        ]
    }
}

/// RK4 flow of one constant-control arc; `duration` may be negative.
pub fn integrate_arc(start: Point, ctrl: Control, duration: f64, step: f64, bounds: &ControlBounds) -> Result<Point> {
    check_step(step)?;
    start.check_domain()?;
    let y = march([start.x1, start.x2], 0.0, duration, step, state_rhs(ctrl.value(bounds)), |_, _| {})?;
    Ok(Point::new(y[0], y[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub t: f64,
    pub point: Point,
    /// Index of the arc the sample belongs to; arc ends carry the arc's own index.
    pub arc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTrajectory {
    pub samples: Vec<StateSample>,
    pub endpoint: Point,
    /// State at the end of each arc.
    pub arc_ends: Vec<Point>,
}

/// Integrates the schedule from `(1, 0)`, restarting at every switch time.
pub fn integrate_state(schedule: &ControlSchedule, step: f64) -> Result<StateTrajectory> {
    check_step(step)?;
    let bounds = schedule.bounds();
    let mut samples = vec![StateSample {
        t: 0.0,
        point: Point::START,
        arc: 0,
    }];
    let mut arc_ends = Vec::with_capacity(schedule.arcs().len());
    let mut y = [1.0, 0.0];
    let mut t0 = 0.0;
    for (i, arc) in schedule.arcs().iter().enumerate() {
        y = march(y, t0, arc.duration, step, state_rhs(arc.ctrl.value(bounds)), |t, y| {
            samples.push(StateSample {
                t,
                point: Point::new(y[0], y[1]),
                arc: i,
            })
        })?;
        t0 += arc.duration;
        arc_ends.push(Point::new(y[0], y[1]));
    }
    Ok(StateTrajectory {
        samples,
        endpoint: Point::new(y[0], y[1]),
        arc_ends,
    })
}

/// Costate row vector `(lambda1, lambda2)` of a normal extremal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjointState {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl AdjointState {
    pub fn norm(&self) -> f64 {
        self.lambda1.hypot(self.lambda2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjointSample {
    pub t: f64,
    pub point: Point,
    pub costate: AdjointState,
    pub arc: usize,
}

impl AdjointSample {
    /// `H = -1 + lambda1 x2 + lambda2 (1/x1^3 - x1 u)`.
    pub fn hamiltonian(&self, u: f64) -> f64 {
        let Point { x1, x2 } = self.point;
        -1.0 + self.costate.lambda1 * x2 + self.costate.lambda2 * (1.0 / (x1 * x1 * x1) - x1 * u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointTrajectory {
    pub anchor_time: f64,
    /// Samples in increasing time.
    pub samples: Vec<AdjointSample>,
    /// State and costate at each switch time, in order.
    pub at_switches: Vec<AdjointSample>,
}

/// The default anchor: `lambda2 = 0` and `lambda1 = 1 / x2` at the first switch.
pub fn default_anchor(schedule: &ControlSchedule, step: f64) -> Result<(f64, AdjointState)> {
    if schedule.switch_count() == 0 {
        return Err(Error::NotAnchorable);
    }
    let arc = &schedule.arcs()[0];
    let p = integrate_arc(Point::START, arc.ctrl, arc.duration, step, schedule.bounds())?;
    if p.x2 == 0.0 {
        return Err(Error::NotAnchorable);
    }
    Ok((
        arc.duration,
        AdjointState {
            lambda1: 1.0 / p.x2,
            lambda2: 0.0,
        },
    ))
}

/// Co-integrates state and costate forward and backward from an anchor.
///
/// With `anchor = None` the costate is anchored at the first switch, which
/// fails with [`Error::NotAnchorable`] for schedules without switches.
pub fn integrate_adjoint(
    schedule: &ControlSchedule,
    anchor: Option<(f64, AdjointState)>,
    step: f64,
) -> Result<AdjointTrajectory> {
    check_step(step)?;
    let (t_a, lam) = match anchor {
        Some(a) => a,
        None => default_anchor(schedule, step)?,
    };
    let bounds = schedule.bounds();
    let arcs = schedule.arcs();
    let total = schedule.total_time();
    if !(t_a >= 0.0 && t_a <= total) {
        return Err(Error::Precondition(format!(
            "anchor time {t_a} outside [0, {total}]"
        )));
    }

    // arc k containing the anchor, with its start time
    let mut k = 0;
    let mut t_start = 0.0;
    while k + 1 < arcs.len() && t_start + arcs[k].duration < t_a {
        t_start += arcs[k].duration;
        k += 1;
    }
    if arcs.is_empty() {
        let s = AdjointSample {
            t: 0.0,
            point: Point::START,
            costate: lam,
            arc: 0,
        };
        return Ok(AdjointTrajectory {
            anchor_time: t_a,
            samples: vec![s],
            at_switches: vec![],
        });
    }

    // state at the anchor
    let mut y = [1.0, 0.0];
    for arc in &arcs[..k] {
        y = march(y, 0.0, arc.duration, step, state_rhs(arc.ctrl.value(bounds)), |_, _| {})?;
    }
    y = march(y, 0.0, t_a - t_start, step, state_rhs(arcs[k].ctrl.value(bounds)), |_, _| {})?;
    let anchor_y = [y[0], y[1], lam.lambda1, lam.lambda2];

    let sample = |t: f64, y: &[f64; 4], arc: usize| AdjointSample {
        t,
        point: Point::new(y[0], y[1]),
        costate: AdjointState {
            lambda1: y[2],
            lambda2: y[3],
        },
        arc,
    };

    // backward: rest of arc k, then arcs k-1 .. 0
    let mut back = Vec::new();
    let mut switch_back = Vec::new();
    let mut z = march(anchor_y, t_a, t_start - t_a, step, costate_rhs(arcs[k].ctrl.value(bounds)), |t, y| {
        back.push(sample(t, y, k))
    })?;
    let mut t_end = t_start;
    for j in (0..k).rev() {
        // state at t_end is the end of arc j
        switch_back.push(sample(t_end, &z, j));
        let d = arcs[j].duration;
        z = march(z, t_end, -d, step, costate_rhs(arcs[j].ctrl.value(bounds)), |t, y| {
            back.push(sample(t, y, j))
        })?;
        t_end -= d;
    }

    // forward: rest of arc k, then arcs k+1 ..
    let mut fwd = vec![sample(t_a, &anchor_y, k)];
    let mut switch_fwd = Vec::new();
    let t_k_end = t_start + arcs[k].duration;
    let mut z = march(anchor_y, t_a, t_k_end - t_a, step, costate_rhs(arcs[k].ctrl.value(bounds)), |t, y| {
        fwd.push(sample(t, y, k))
    })?;
    let mut t0 = t_k_end;
    for (j, arc) in arcs.iter().enumerate().skip(k + 1) {
        switch_fwd.push(sample(t0, &z, j - 1));
        z = march(z, t0, arc.duration, step, costate_rhs(arc.ctrl.value(bounds)), |t, y| {
            fwd.push(sample(t, y, j))
        })?;
        t0 += arc.duration;
    }

    back.reverse();
    back.extend(fwd);
    switch_back.reverse();
    switch_back.extend(switch_fwd);
    Ok(AdjointTrajectory {
        anchor_time: t_a,
        samples: back,
        at_switches: switch_back,
    })
}

/// Pass thresholds for [`pmp_check_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub endpoint: f64,
    pub hamiltonian: f64,
    pub lambda2: f64,
    pub lambda1_x2: f64,
    pub alignment: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            endpoint: 1e-6,
            hamiltonian: 1e-6,
            lambda2: 1e-7,
            lambda1_x2: 1e-6,
            alignment: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub endpoint: Point,
    pub endpoint_error: f64,
    #[serde(rename = "max_abs_H")]
    pub max_abs_h: f64,
    /// Per switch, `|t_zero(Phi) - t_switch|` from one Newton step on
    /// `lambda2`, i.e. `|lambda2 / lambda1|`.
    pub switch_alignment: Vec<f64>,
    pub lambda2_at_switches: Vec<f64>,
    pub lambda1_x2_at_switches: Vec<f64>,
    pub phi_sign_violations: usize,
    pub min_costate_norm: f64,
    pub tolerances: Tolerances,
    pub passed: bool,
}

impl VerificationReport {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        let all = |v: &[f64], f: &dyn Fn(f64) -> bool| v.iter().all(|&x| f(x));
        self.endpoint_error <= tol.endpoint
            && self.max_abs_h <= tol.hamiltonian
            && all(&self.lambda2_at_switches, &|x| x.abs() <= tol.lambda2)
            && all(&self.lambda1_x2_at_switches, &|x| (x - 1.0).abs() <= tol.lambda1_x2)
            && all(&self.switch_alignment, &|x| x <= tol.alignment)
            && self.phi_sign_violations == 0
            && self.min_costate_norm > 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.endpoint_error.is_finite()
            && self.max_abs_h.is_finite()
            && self.min_costate_norm.is_finite()
            && self
                .switch_alignment
                .iter()
                .chain(&self.lambda2_at_switches)
                .chain(&self.lambda1_x2_at_switches)
                .all(|x| x.is_finite())
    }
}

pub fn pmp_check(schedule: &ControlSchedule, step: f64) -> Result<VerificationReport> {
    pmp_check_with(schedule, None, step, &Tolerances::default())
}

/// Checks the maximum-principle conditions along the schedule.
pub fn pmp_check_with(
    schedule: &ControlSchedule,
    anchor: Option<(f64, AdjointState)>,
    step: f64,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let state = integrate_state(schedule, step)?;
    let adj = integrate_adjoint(schedule, anchor, step)?;
    let bounds = schedule.bounds();
    let arcs = schedule.arcs();

    let mut max_abs_h: f64 = 0.0;
    let mut violations = 0;
    let mut min_norm = f64::INFINITY;
    for s in &adj.samples {
        let ctrl = arcs.get(s.arc).map_or(Control::X, |a| a.ctrl);
        max_abs_h = max_abs_h.max(s.hamiltonian(ctrl.value(bounds)).abs());
        min_norm = min_norm.min(s.costate.norm());
        let l2 = s.costate.lambda2;
        let wrong = match ctrl {
            Control::X => l2 < -PHI_DEADBAND,
            Control::Y => l2 > PHI_DEADBAND,
        };
        if wrong && !arcs.is_empty() {
            violations += 1;
        }
    }

    let sw = &adj.at_switches;
    let report = VerificationReport {
        endpoint: state.endpoint,
        endpoint_error: state.endpoint.distance(&Point::target(schedule.gamma())),
        max_abs_h,
        switch_alignment: sw
            .iter()
            .map(|s| (s.costate.lambda2 / s.costate.lambda1).abs())
            .collect(),
        lambda2_at_switches: sw.iter().map(|s| s.costate.lambda2).collect(),
        lambda1_x2_at_switches: sw.iter().map(|s| s.costate.lambda1 * s.point.x2).collect(),
        phi_sign_violations: violations,
        min_costate_norm: min_norm,
        tolerances: *tol,
        passed: false,
    };
    let passed = report.is_finite() && report.passes(tol);
    Ok(VerificationReport { passed, ..report })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErmakovCheck {
    pub passed: bool,
    pub endpoint: Point,
    /// `|b(T) - gamma|`.
    pub position_residual: f64,
    /// `|b'(T)|`.
    pub velocity_residual: f64,
    /// Distance from `(gamma, 0)`.
    pub residual: f64,
}

pub fn ermakov_check(schedule: &ControlSchedule, gamma: f64) -> Result<ErmakovCheck> {
    ermakov_check_with(schedule, gamma, DEFAULT_STEP, Tolerances::default().endpoint)
}

/// Checks the terminal conditions `b(T) = gamma`, `b'(T) = 0` on the integrated endpoint.
pub fn ermakov_check_with(schedule: &ControlSchedule, gamma: f64, step: f64, tol: f64) -> Result<ErmakovCheck> {
    let end = integrate_state(schedule, step)?.endpoint;
    let residual = end.distance(&Point::target(gamma));
    Ok(ErmakovCheck {
        passed: residual <= tol,
        endpoint: end,
        position_residual: (end.x1 - gamma).abs(),
        velocity_residual: end.x2.abs(),
        residual,
    })
}

/// Transports the control field `g(q) = (0, -q1)` back along an arc and
/// measures its misalignment with `g(p)`.
///
/// `q` is the RK4 endpoint of the arc from `p` with control `ctrl` and
/// duration `tau`. Returns `|w x g(p)| / (|w| |g(p)|)`, which is zero exactly
/// when `p` and `q` are conjugate in the bang-bang sense.
pub fn conjugate_residual(p: Point, ctrl: Control, tau: f64, step: f64, bounds: &ControlBounds) -> Result<f64> {
    let q = integrate_arc(p, ctrl, tau, step, bounds)?;
    let u = ctrl.value(bounds);
    let y = march([q.x1, q.x2, 0.0, -q.x1], 0.0, -tau, step, variational_rhs(u), |_, _| {})?;
    Ok(y[2].abs() / y[2].hypot(y[3]))
}

/// [`conjugate_residual`] for every arc that starts and ends at a switch.
pub fn schedule_conjugate_residuals(schedule: &ControlSchedule, step: f64) -> Result<Vec<f64>> {
    let state = integrate_state(schedule, step)?;
    let arcs = schedule.arcs();
    (1..arcs.len().saturating_sub(1))
        .map(|i| conjugate_residual(state.arc_ends[i - 1], arcs[i].ctrl, arcs[i].duration, step, schedule.bounds()))
        .collect()
}
