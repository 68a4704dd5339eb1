//! Time-optimal bang-bang control of the Ermakov-reduced harmonic trap.
//!
//! The state `(x1, x2) = (b, b'/omega0)` obeys `x1' = x2`,
//! `x2' = -u x1 + 1/x1^3` with `u` in `[-u1, u2]`. This crate computes the
//! minimum-time bang-bang transfer from `(1, 0)` to `(gamma, 0)`, its
//! switching curves and cut loci, and checks any schedule numerically.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod roots;
pub mod schedule;
pub mod switching;
pub mod synthesis;

pub use dynamics::{flow, Control, ControlBounds, Point, SegmentInvariant};
pub use error::{Error, Result};
pub use oracle::{AdjointState, ErmakovCheck, Tolerances, VerificationReport};
pub use schedule::{Arc, BoundaryJumps, ControlSchedule, ScheduleShape};
pub use switching::{JunctionKind, Polyline, SwitchPoint};
pub use synthesis::{
    synthesize, synthesize_with, Candidate, CutLocusPoint, RegimeInterval, SynthesisOptions,
    SynthesisResult, TurnSolution,
};
