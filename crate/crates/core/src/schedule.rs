use serde::{Deserialize, Serialize};

use crate::dynamics::{first_integral, Control, ControlBounds, Point, SegmentInvariant};
use crate::error::{Error, Result};

/// One bang segment of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub ctrl: Control,
    pub duration: f64,
    pub start: Point,
    pub end: Point,
    pub c: SegmentInvariant,
}

impl Arc {
    pub fn new(ctrl: Control, duration: f64, start: Point, end: Point, bounds: &ControlBounds) -> Self {
        Arc {
            ctrl,
            duration,
            start,
            end,
            c: first_integral(start, ctrl, bounds),
        }
    }
}

/// Instantaneous control jumps at the ends of the transfer. They carry no
/// duration; they only make the control match `u(0) = 1` and `u(T) = 1/gamma^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJumps {
    pub u0: f64,
    pub u_t: f64,
}

impl BoundaryJumps {
    pub fn for_target(gamma: f64) -> Self {
        BoundaryJumps {
            u0: 1.0,
            u_t: 1.0 / gamma.powi(4),
        }
    }
}

/// Switching structure of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleShape {
    Empty,
    /// `XY`: a single switch.
    OneSwitch,
    /// `Y(XY)^n` with `n >= 1`: `2n` switches.
    Spiral { turns: u32 },
    /// Any other alternating sequence, e.g. `XYX` or a truncated spiral.
    Other,
}

/// A bang-bang control with its arcs, target and bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    arcs: Vec<Arc>,
    boundary_jumps: BoundaryJumps,
    total_time: f64,
    gamma: f64,
    bounds: ControlBounds,
}

impl ControlSchedule {
    /// Builds a schedule, checking that arcs alternate and durations are
    /// finite and nonnegative. Whether the arcs actually reach `(gamma, 0)`
    /// is left to the oracle.
    pub fn new(arcs: Vec<Arc>, gamma: f64, bounds: ControlBounds) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidTarget(gamma));
        }
        for (i, arc) in arcs.iter().enumerate() {
            if !(arc.duration >= 0.0 && arc.duration.is_finite()) {
                return Err(Error::InvalidSchedule(format!(
                    "arc {i} has invalid duration {}",
                    arc.duration
                )));
            }
        }
        if let Some(i) = arcs.windows(2).position(|w| w[0].ctrl == w[1].ctrl) {
            return Err(Error::InvalidSchedule(format!(
                "arcs {i} and {} use the same control; bang-bang arcs must alternate",
                i + 1
            )));
        }
        let total_time = arcs.iter().map(|a| a.duration).sum();
        Ok(ControlSchedule {
            arcs,
            boundary_jumps: BoundaryJumps::for_target(gamma),
            total_time,
            gamma,
            bounds,
        })
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn boundary_jumps(&self) -> BoundaryJumps {
        self.boundary_jumps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn bounds(&self) -> &ControlBounds {
        &self.bounds
    }

    pub fn switch_count(&self) -> usize {
        self.arcs.len().saturating_sub(1)
    }

    /// Times at which the control switches, in increasing order.
    pub fn switch_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.switch_count());
        for arc in &self.arcs[..self.switch_count()] {
            t += arc.duration;
            out.push(t);
        }
        out
    }

    pub fn shape(&self) -> ScheduleShape {
        let ctrls: Vec<Control> = self.arcs.iter().map(|a| a.ctrl).collect();
        match ctrls.as_slice() {
            [] => ScheduleShape::Empty,
            [Control::X, Control::Y] => ScheduleShape::OneSwitch,
            [Control::Y, rest @ ..] if rest.len() >= 2 && rest.len() % 2 == 0 => {
                // alternation already guarantees the (XY)^n pattern
                ScheduleShape::Spiral {
                    turns: (rest.len() / 2) as u32,
                }
            }
            _ => ScheduleShape::Other,
        }
    }

    /// The control value in effect on arc `i`.
    pub fn control_value(&self, i: usize) -> f64 {
        self.arcs[i].ctrl.value(&self.bounds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(ctrl: Control, d: f64, b: &ControlBounds) -> Arc {
        Arc::new(ctrl, d, Point::START, Point::START, b)
    }

    #[test]
    fn rejects_repeated_controls() {
        let b = ControlBounds::new(1.0, 8.0).unwrap();
        let arcs = vec![arc(Control::X, 0.1, &b), arc(Control::X, 0.2, &b)];
        assert!(matches!(
            ControlSchedule::new(arcs, 2.0, b),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn rejects_negative_duration_and_bad_target() {
        let b = ControlBounds::new(1.0, 8.0).unwrap();
        assert!(ControlSchedule::new(vec![arc(Control::X, -0.1, &b)], 2.0, b).is_err());
        assert!(ControlSchedule::new(vec![], 1.0, b).is_err());
    }

    #[test]
    fn shapes_and_switch_times() {
        let b = ControlBounds::new(1.0, 8.0).unwrap();
        let mk = |ctrls: &[Control]| {
            let arcs = ctrls.iter().map(|&c| arc(c, 0.5, &b)).collect();
            ControlSchedule::new(arcs, 3.0, b).unwrap()
        };
        assert_eq!(mk(&[]).shape(), ScheduleShape::Empty);
        assert_eq!(mk(&[Control::X, Control::Y]).shape(), ScheduleShape::OneSwitch);
        let s = mk(&[Control::Y, Control::X, Control::Y, Control::X, Control::Y]);
        assert_eq!(s.shape(), ScheduleShape::Spiral { turns: 2 });
        assert_eq!(s.switch_times(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(s.total_time(), 2.5);
        assert_eq!(mk(&[Control::X, Control::Y, Control::X]).shape(), ScheduleShape::Other);
        assert_eq!(mk(&[Control::Y, Control::X]).shape(), ScheduleShape::Other);
        assert_eq!(s.boundary_jumps().u_t, 1.0 / 81.0);
    }
}
