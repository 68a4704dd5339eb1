//! Transfer times of the candidate strategies and the optimal synthesis.
//!
//! From `(1, 0)` the optimal control is either the one-switch `XY` schedule
//! or a spiral `Y(XY)^n` with `2n` switches on the rays `x2 = -/+ sqrt(s) x1`.
//! The turn ratio `s` solves one transcendental equation in `(u1, s_plus]`.
//! The turn count is bounded, so the optimum comes from comparing finitely
//! many closed-form candidate times.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Control, ControlBounds, Point};
use crate::error::{Error, Result};
use crate::roots::bisect_secant;
use crate::schedule::{Arc, ControlSchedule};
use crate::switching::{JunctionKind, SwitchPoint};

/// Default residual tolerance for the turn-ratio equation.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Candidate times closer than this count as a tie.
pub const TIE_TOL: f64 = 1e-12;

/// Arguments of the inverse cosines in `T_I` / `T_F` this far outside `[-1, 1]` are clamped.
const ACOS_SLACK: f64 = 1e-12;

fn check_target(gamma: f64) -> Result<()> {
    if gamma > 1.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTarget(gamma))
    }
}

/// The one-switch `XY` transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSwitch {
    pub total_time: f64,
    /// `B = (kappa, mu)`, where the X-arc from `(1, 0)` meets the Y-arc into `(gamma, 0)`.
    pub switch_point: Point,
    pub x_duration: f64,
    pub y_duration: f64,
}

pub fn time_one_switch(gamma: f64, bounds: &ControlBounds) -> Result<OneSwitch> {
    check_target(gamma)?;
    let (u1, u2) = (bounds.u1(), bounds.u2());
    let g2 = gamma * gamma;
    let x_arg = u1 * (g2 - 1.0) * (u2 * g2 - 1.0) / (g2 * (u1 + u2) * (u1 + 1.0));
    let y_arg = u2 * (g2 - 1.0) * (u1 * g2 + 1.0) / ((u1 + u2) * (u2 * g2 * g2 - 1.0));
    let x_duration = x_arg.sqrt().asinh() / u1.sqrt();
    let y_duration = y_arg.min(1.0).sqrt().asin() / u2.sqrt();

    let k2 = (u2 * g2 * g2 + 1.0 + g2 * (u1 - 1.0)) / (g2 * (u1 + u2));
    let kappa = k2.sqrt();
    let mu = ((k2 - 1.0).max(0.0) * (u1 * k2 + 1.0)).sqrt() / kappa;
    Ok(OneSwitch {
        total_time: x_duration + y_duration,
        switch_point: Point::new(kappa, mu),
        x_duration,
        y_duration,
    })
}

/// First-integral constant of the first Y-arc, through `(1, 0)`.
pub fn c_first(bounds: &ControlBounds) -> f64 {
    bounds.u2() + 1.0
}

/// First-integral constant of the last Y-arc, through `(gamma, 0)`.
pub fn c_last(gamma: f64, bounds: &ControlBounds) -> f64 {
    bounds.u2() * gamma * gamma + 1.0 / (gamma * gamma)
}

/// `c + sqrt(c^2 - 4 q)`, with tiny negative radicands clamped.
fn root_sum(c: f64, q: f64) -> f64 {
    c + (c * c - 4.0 * q).max(0.0).sqrt()
}

/// Left side of the turn-ratio equation. Decreasing in `s`.
pub fn turn_ratio_lhs(s: f64, gamma: f64, bounds: &ControlBounds) -> f64 {
    let q = s + bounds.u2();
    root_sum(c_first(bounds), q) / root_sum(c_last(gamma, bounds), q)
}

/// Right side `((s - u1) / (s + u2))^n`. Increasing in `s`.
pub fn turn_ratio_rhs(s: f64, n: u32, bounds: &ControlBounds) -> f64 {
    ((s - bounds.u1()) / (s + bounds.u2())).powi(n as i32)
}

pub fn turn_ratio_residual(s: f64, gamma: f64, bounds: &ControlBounds, n: u32) -> f64 {
    turn_ratio_lhs(s, gamma, bounds) - turn_ratio_rhs(s, n, bounds)
}

/// Closed-form estimate of the turn ratio, an upper bound on the exact root.
///
/// Obtained by evaluating the left side at `s = u1`.
pub fn approx_turn_ratio(gamma: f64, bounds: &ControlBounds, n: u32) -> Result<f64> {
    check_target(gamma)?;
    if n == 0 {
        return Err(Error::Precondition("turn count must be >= 1".into()));
    }
    if !bounds.spiral_feasible() {
        return Err(Error::NoSolution { n });
    }
    let (u1, u2) = (bounds.u1(), bounds.u2());
    let cap = turn_ratio_lhs(u1, gamma, bounds);
    let root = cap.powf(1.0 / n as f64);
    if !(root < 1.0) {
        return Err(Error::Infeasible(format!("C^(1/n) = {root} is not below 1")));
    }
    Ok((u1 + u2 * root) / (1.0 - root))
}

/// Solves the turn-ratio equation for `n` turns on `(u1, s_plus]`.
///
/// The left side decreases and the right side increases, so a root is unique
/// when it exists. Bisection with secant steps runs until the bracket
/// collapses. The root is accepted when its residual is at most `tol`.
pub fn solve_turn_ratio(gamma: f64, bounds: &ControlBounds, n: u32, tol: f64) -> Result<f64> {
    check_target(gamma)?;
    if n == 0 {
        return Err(Error::Precondition("turn count must be >= 1".into()));
    }
    if !bounds.spiral_feasible() {
        return Err(Error::NoSolution { n });
    }
    let f = |s: f64| turn_ratio_residual(s, gamma, bounds, n);
    let lo = bounds.u1() * (1.0 + 1e-12);
    let mut hi = bounds.s_plus();
    let f_hi = f(hi);
    if f_hi > 0.0 {
        return Err(Error::NoSolution { n });
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if let Ok(s_hat) = approx_turn_ratio(gamma, bounds, n) {
        if s_hat > lo && s_hat < hi && f(s_hat) <= 0.0 {
            hi = s_hat;
        }
    }
    let root = bisect_secant(f, lo, hi, 4.0 * f64::EPSILON * hi, 0.0);
    if root.fx.abs() <= tol {
        Ok(root.x)
    } else {
        Err(Error::NoConvergence {
            tol,
            residual: root.fx.abs(),
        })
    }
}

/// Duration of each intermediate X-arc.
pub fn t_x(s: f64, bounds: &ControlBounds) -> f64 {
    let (rs, ru) = (s.sqrt(), bounds.u1().sqrt());
    // acosh((s + u1) / (s - u1)) in logarithmic form
    ((rs + ru) / (rs - ru)).ln() / (2.0 * ru)
}

/// Duration of each intermediate Y-arc.
pub fn t_y(s: f64, bounds: &ControlBounds) -> f64 {
    let u2 = bounds.u2();
    (2.0 * PI - ((s - u2) / (s + u2)).acos()) / (2.0 * u2.sqrt())
}

fn clamped_acos(x: f64) -> Result<f64> {
    if x.abs() <= 1.0 {
        Ok(x.acos())
    } else if x.abs() <= 1.0 + ACOS_SLACK {
        Ok(x.signum().acos())
    } else {
        Err(Error::Infeasible(format!("inverse cosine argument {x} outside [-1, 1]")))
    }
}

/// Duration of the first Y-arc, from `(1, 0)` to the first switch.
pub fn t_initial(s: f64, bounds: &ControlBounds) -> Result<f64> {
    let u2 = bounds.u2();
    let c1 = c_first(bounds);
    let q = s + u2;
    let arg = -(s * c1 + u2 * (c1 * c1 - 4.0 * q).max(0.0).sqrt())
        / (q * (c1 * c1 - 4.0 * u2).sqrt());
    Ok(clamped_acos(arg)? / (2.0 * u2.sqrt()))
}

/// Duration of the last Y-arc, from the last switch to `(gamma, 0)`.
pub fn t_final(s: f64, gamma: f64, bounds: &ControlBounds) -> Result<f64> {
    let u2 = bounds.u2();
    let cn = c_last(gamma, bounds);
    let q = s + u2;
    let arg = (-s * cn + u2 * (cn * cn - 4.0 * q).max(0.0).sqrt())
        / (q * (cn * cn - 4.0 * u2).sqrt());
    Ok(clamped_acos(arg)? / (2.0 * u2.sqrt()))
}

/// Arc durations of an `n`-turn spiral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub t_initial: f64,
    pub t_x: f64,
    pub t_y: f64,
    pub t_final: f64,
}

impl Breakdown {
    /// `T_I + n T_X + (n - 1) T_Y + T_F`.
    pub fn total(&self, n: u32) -> f64 {
        let n = n as f64;
        self.t_initial + n * self.t_x + (n - 1.0) * self.t_y + self.t_final
    }
}

/// An `n`-turn spiral from `(1, 0)` to `(gamma, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnSolution {
    pub n: u32,
    pub s: f64,
    pub total_time: f64,
    pub breakdown: Breakdown,
    /// `2n` switches in trajectory order, alternating YX (lower) and XY (upper).
    pub switch_points: Vec<SwitchPoint>,
}

pub fn time_n_turns(gamma: f64, bounds: &ControlBounds, n: u32) -> Result<TurnSolution> {
    time_n_turns_with(gamma, bounds, n, DEFAULT_TOL)
}

pub fn time_n_turns_with(gamma: f64, bounds: &ControlBounds, n: u32, tol: f64) -> Result<TurnSolution> {
    let s = solve_turn_ratio(gamma, bounds, n, tol)?;
    let breakdown = Breakdown {
        t_initial: t_initial(s, bounds)?,
        t_x: t_x(s, bounds),
        t_y: t_y(s, bounds),
        t_final: t_final(s, gamma, bounds)?,
    };
    Ok(TurnSolution {
        n,
        s,
        total_time: breakdown.total(n),
        breakdown,
        switch_points: spiral_switch_points(s, n, bounds)?,
    })
}

/// Switch points of the spiral with ratio `s`.
///
/// On the `i`-th Y-arc, with constant `c_i`, the lower switch takes the inner
/// root `x1^2 = 2 / R_i`, where `R_i = c_i + sqrt(c_i^2 - 4(s + u2))`. The
/// next Y-arc has `R_{i+1} = R_i (s + u2) / (s - u1)`, and its upper switch
/// is the outer root `x1^2 = R_{i+1} / (2 (s + u2))`.
fn spiral_switch_points(s: f64, n: u32, bounds: &ControlBounds) -> Result<Vec<SwitchPoint>> {
    let (u1, u2) = (bounds.u1(), bounds.u2());
    let q = s + u2;
    let growth = q / (s - u1);
    let slope = s.sqrt();
    let mut r = root_sum(c_first(bounds), q);
    let mut points = Vec::with_capacity(2 * n as usize);
    for _ in 0..n {
        let lower = (2.0 / r).sqrt();
        points.push(SwitchPoint::new(
            Point::new(lower, -slope * lower),
            JunctionKind::YX,
        )?);
        r *= growth;
        let upper = (r / (2.0 * q)).sqrt();
        points.push(SwitchPoint::new(
            Point::new(upper, slope * upper),
            JunctionKind::XY,
        )?);
    }
    Ok(points)
}

/// Upper bound on useful turn counts: `floor(T0 / T_X(s_plus))`, or 0 when no
/// spiral is feasible.
pub fn max_turns(gamma: f64, bounds: &ControlBounds) -> Result<u32> {
    let t0 = time_one_switch(gamma, bounds)?.total_time;
    if !bounds.spiral_feasible() {
        return Ok(0);
    }
    Ok((t0 / t_x(bounds.s_plus(), bounds)).floor() as u32)
}

/// One row of the candidate table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub n: u32,
    pub feasible: bool,
    /// Turn ratio; `None` for `n = 0` and for infeasible candidates.
    pub s: Option<f64>,
    pub total_time: Option<f64>,
    pub breakdown: Option<Breakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub gamma: f64,
    pub bounds: ControlBounds,
    pub candidates: Vec<Candidate>,
    pub optimal_n: u32,
    pub schedule: ControlSchedule,
    pub n_max: u32,
    /// Another candidate ties the optimum within [`TIE_TOL`].
    pub cut_locus_hit: bool,
}

impl SynthesisResult {
    pub fn optimal_time(&self) -> f64 {
        self.candidates[self.optimal_n as usize]
            .total_time
            .expect("optimal candidate is feasible")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Replaces the computed turn bound.
    pub n_max_override: Option<u32>,
    pub tol: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            n_max_override: None,
            tol: DEFAULT_TOL,
        }
    }
}

pub fn synthesize(gamma: f64, bounds: &ControlBounds) -> Result<SynthesisResult> {
    synthesize_with(gamma, bounds, &SynthesisOptions::default())
}

/// Evaluates every candidate in `0..=n_max` and assembles the fastest schedule.
pub fn synthesize_with(
    gamma: f64,
    bounds: &ControlBounds,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    let one = time_one_switch(gamma, bounds)?;
    let n_max = match opts.n_max_override {
        Some(n) => n,
        None => max_turns(gamma, bounds)?,
    };

    let spirals = (1..=n_max)
        .into_par_iter()
        .map(|n| match time_n_turns_with(gamma, bounds, n, opts.tol) {
            Ok(sol) => Ok(Some(sol)),
            Err(Error::NoSolution { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut candidates = vec![Candidate {
        n: 0,
        feasible: true,
        s: None,
        total_time: Some(one.total_time),
        breakdown: None,
    }];
    for (i, sol) in spirals.iter().enumerate() {
        candidates.push(match sol {
            Some(sol) => Candidate {
                n: sol.n,
                feasible: true,
                s: Some(sol.s),
                total_time: Some(sol.total_time),
                breakdown: Some(sol.breakdown),
            },
            None => Candidate {
                n: i as u32 + 1,
                feasible: false,
                s: None,
                total_time: None,
                breakdown: None,
            },
        });
    }

    // strict improvement only, so ties keep the smaller n
    let mut optimal_n = 0;
    let mut best = one.total_time;
    for c in &candidates[1..] {
        if let Some(t) = c.total_time {
            if t < best - TIE_TOL {
                best = t;
                optimal_n = c.n;
            }
        }
    }
    let cut_locus_hit = candidates.iter().any(|c| {
        c.n != optimal_n && c.total_time.is_some_and(|t| (t - best).abs() <= TIE_TOL)
    });

    let schedule = if optimal_n == 0 {
        one_switch_schedule(gamma, bounds, &one)?
    } else {
        let sol = spirals[optimal_n as usize - 1]
            .as_ref()
            .expect("optimal spiral is feasible");
        spiral_schedule(gamma, bounds, sol)?
    };

    Ok(SynthesisResult {
        gamma,
        bounds: *bounds,
        candidates,
        optimal_n,
        schedule,
        n_max,
        cut_locus_hit,
    })
}

pub fn one_switch_schedule(gamma: f64, bounds: &ControlBounds, one: &OneSwitch) -> Result<ControlSchedule> {
    let b = one.switch_point;
    ControlSchedule::new(
        vec![
            Arc::new(Control::X, one.x_duration, Point::START, b, bounds),
            Arc::new(Control::Y, one.y_duration, b, Point::target(gamma), bounds),
        ],
        gamma,
        *bounds,
    )
}

pub fn spiral_schedule(gamma: f64, bounds: &ControlBounds, sol: &TurnSolution) -> Result<ControlSchedule> {
    let bd = &sol.breakdown;
    let pts = &sol.switch_points;
    let n = sol.n as usize;
    let mut arcs = Vec::with_capacity(2 * n + 1);
    arcs.push(Arc::new(Control::Y, bd.t_initial, Point::START, pts[0].point, bounds));
    for i in 0..n {
        let lower = pts[2 * i].point;
        let upper = pts[2 * i + 1].point;
        arcs.push(Arc::new(Control::X, bd.t_x, lower, upper, bounds));
        if i + 1 < n {
            arcs.push(Arc::new(Control::Y, bd.t_y, upper, pts[2 * i + 2].point, bounds));
        } else {
            arcs.push(Arc::new(Control::Y, bd.t_final, upper, Point::target(gamma), bounds));
        }
    }
    ControlSchedule::new(arcs, gamma, *bounds)
}

/// Transfer time of the strategy with `n` turns (`n = 0` is the one-switch
/// schedule), or `None` when it is infeasible at `gamma`.
pub fn transfer_time(gamma: f64, bounds: &ControlBounds, n: u32) -> Result<Option<f64>> {
    if n == 0 {
        return Ok(Some(time_one_switch(gamma, bounds)?.total_time));
    }
    match time_n_turns(gamma, bounds, n) {
        Ok(sol) => Ok(Some(sol.total_time)),
        Err(Error::NoSolution { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// A maximal run of grid targets sharing the same optimal turn count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInterval {
    pub turns: u32,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
}

/// Classifies an ascending grid of targets by optimal turn count.
pub fn optimal_regimes(bounds: &ControlBounds, grid: &[f64]) -> Result<Vec<RegimeInterval>> {
    let turns = grid
        .par_iter()
        .map(|&g| synthesize(g, bounds).map(|r| r.optimal_n))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<RegimeInterval> = Vec::new();
    for (&g, &n) in grid.iter().zip(&turns) {
        match out.last_mut() {
            Some(last) if last.turns == n => last.gamma_hi = g,
            _ => out.push(RegimeInterval {
                turns: n,
                gamma_lo: g,
                gamma_hi: g,
            }),
        }
    }
    Ok(out)
}

/// A target reached in equal time by two strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutLocusPoint {
    pub gamma_star: f64,
    pub n: u32,
    pub m: u32,
    /// `T_n` at `gamma_star`.
    pub time: f64,
    /// `|T_n - T_m|` at `gamma_star`.
    pub residual: f64,
}

/// Bisects `T_n(gamma) = T_m(gamma)` on `[gamma_lo, gamma_hi]` until the
/// bracket is narrower than `tol` and `|T_n - T_m| <= tol`.
pub fn cut_locus(
    bounds: &ControlBounds,
    n: u32,
    m: u32,
    gamma_lo: f64,
    gamma_hi: f64,
    tol: f64,
) -> Result<CutLocusPoint> {
    check_target(gamma_lo)?;
    check_target(gamma_hi)?;
    if !(gamma_lo < gamma_hi) || !(tol > 0.0) {
        return Err(Error::Precondition(
            "cut locus needs gamma_lo < gamma_hi and tol > 0".into(),
        ));
    }
    let time = |k: u32, g: f64| -> Result<f64> {
        transfer_time(g, bounds, k)?.ok_or(Error::InfeasibleCandidate { n: k, gamma: g })
    };
    let diff = |g: f64| -> Result<f64> { Ok(time(n, g)? - time(m, g)?) };

    let (mut lo, mut hi) = (gamma_lo, gamma_hi);
    let d_lo = diff(lo)?;
    let d_hi = diff(hi)?;
    if d_lo != 0.0 && d_hi != 0.0 && (d_lo < 0.0) == (d_hi < 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let lo_negative = d_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let d = diff(mid)?;
        if d == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (d < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma_star = 0.5 * (lo + hi);
    let tn = time(n, gamma_star)?;
    let tm = time(m, gamma_star)?;
    let residual = (tn - tm).abs();
    if residual > tol {
        return Err(Error::NoConvergence { tol, residual });
    }
    Ok(CutLocusPoint {
        gamma_star,
        n,
        m,
        time: tn,
        residual,
    })
}
