//! Shared fixtures for the benchmarks.

use bbcool::{synthesize, ControlBounds, ControlSchedule};

/// Representative targets: zero-turn, one-turn and two-turn optima.
pub const CASES: [(f64, f64, f64); 4] = [(1.0, 1.0, 2.0), (1.0, 8.0, 2.0), (1.0, 8.0, 9.0), (1.0, 50.0, 12.0)];

pub fn bounds(u1: f64, u2: f64) -> ControlBounds {
    ControlBounds::new(u1, u2).expect("fixture bounds are valid")
}

pub fn label(case: (f64, f64, f64)) -> String {
    format!("u1={}_u2={}_gamma={}", case.0, case.1, case.2)
}

pub fn schedule(case: (f64, f64, f64)) -> ControlSchedule {
    synthesize(case.2, &bounds(case.0, case.1)).expect("fixture synthesizes").schedule
}

/// An inclusive grid of `count` targets on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        for case in CASES {
            assert!(schedule(case).total_time() > 0.0);
        }
        let g = grid(1.05, 10.0, 5);
        assert_eq!((g[0], g[4]), (1.05, 10.0));
    }
}
