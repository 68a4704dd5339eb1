//! Versioned JSON documents and CSV rendering.

use std::fmt::Write as _;

use bbcool::synthesis::SynthesisResult;
use bbcool::{Arc, Candidate, Control, ControlBounds, ControlSchedule, Point};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: &str = "bbcool/1";

/// Full-precision float for CSV cells: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub u1: f64,
    pub u2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcDoc {
    pub control: Control,
    pub value: f64,
    pub duration: f64,
    pub start: Point,
    pub end: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpsDoc {
    pub u0: f64,
    #[serde(rename = "uT")]
    pub u_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateDoc {
    pub n: u32,
    pub feasible: bool,
    pub s: Option<f64>,
    #[serde(rename = "T")]
    pub total_time: Option<f64>,
}

impl From<&Candidate> for CandidateDoc {
    fn from(c: &Candidate) -> Self {
        CandidateDoc {
            n: c.n,
            feasible: c.feasible,
            s: c.s,
            total_time: c.total_time,
        }
    }
}

/// The schedule document written by `synthesize` and read by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub schema: String,
    pub bounds: BoundsDoc,
    pub gamma: f64,
    #[serde(default)]
    pub optimal_n: Option<u32>,
    #[serde(default)]
    pub total_time: Option<f64>,
    pub arcs: Vec<ArcDoc>,
    #[serde(default)]
    pub boundary_jumps: Option<JumpsDoc>,
    #[serde(default)]
    pub n_max: Option<u32>,
    #[serde(default)]
    pub cut_locus_hit: Option<bool>,
    #[serde(default)]
    pub candidates: Vec<CandidateDoc>,
}

fn arc_docs(schedule: &ControlSchedule) -> Vec<ArcDoc> {
    schedule
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| ArcDoc {
            control: a.ctrl,
            value: schedule.control_value(i),
            duration: a.duration,
            start: a.start,
            end: a.end,
        })
        .collect()
}

impl ScheduleDoc {
    pub fn from_result(r: &SynthesisResult) -> Self {
        let jumps = r.schedule.boundary_jumps();
        ScheduleDoc {
            schema: SCHEMA.into(),
            bounds: BoundsDoc {
                u1: r.bounds.u1(),
                u2: r.bounds.u2(),
            },
            gamma: r.gamma,
            optimal_n: Some(r.optimal_n),
            total_time: Some(r.schedule.total_time()),
            arcs: arc_docs(&r.schedule),
            boundary_jumps: Some(JumpsDoc {
                u0: jumps.u0,
                u_t: jumps.u_t,
            }),
            n_max: Some(r.n_max),
            cut_locus_hit: Some(r.cut_locus_hit),
            candidates: r.candidates.iter().map(CandidateDoc::from).collect(),
        }
    }

    /// Rebuilds the schedule, rejecting structurally invalid documents.
    pub fn to_schedule(&self) -> Result<ControlSchedule, CliError> {
        if self.schema != SCHEMA {
            return Err(CliError::Usage(format!(
                "unsupported schema `{}`, expected `{SCHEMA}`",
                self.schema
            )));
        }
        let bounds = ControlBounds::new(self.bounds.u1, self.bounds.u2)?;
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (i, a) in self.arcs.iter().enumerate() {
            let expected = a.control.value(&bounds);
            if a.value != expected {
                return Err(CliError::Usage(format!(
                    "arc {i}: value {} does not match control {} ({expected})",
                    a.value,
                    a.control.label()
                )));
            }
            arcs.push(Arc::new(a.control, a.duration, a.start, a.end, &bounds));
        }
        Ok(ControlSchedule::new(arcs, self.gamma, bounds)?)
    }
}

pub fn schedule_csv(schedule: &ControlSchedule) -> String {
    let mut out = String::from("index,control,value,duration,start_x1,start_x2,end_x1,end_x2\n");
    for (i, a) in arc_docs(schedule).iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{}",
            a.control.label(),
            num(a.value),
            num(a.duration),
            num(a.start.x1),
            num(a.start.x2),
            num(a.end.x1),
            num(a.end.x2)
        );
    }
    out
}

/// One `(gamma, n)` row of the transfer-time table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub gamma: f64,
    pub n: u32,
    pub feasible: bool,
    pub s: Option<f64>,
    #[serde(rename = "T")]
    pub total_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimesDoc {
    pub schema: String,
    pub bounds: BoundsDoc,
    pub rows: Vec<TimeRow>,
}

pub fn times_csv(rows: &[TimeRow]) -> String {
    let mut out = String::from("gamma,n,feasible,s,T\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.gamma),
            r.n,
            r.feasible,
            opt_num(r.s),
            opt_num(r.total_time)
        );
    }
    out
}

pub fn points_csv(points: &[Point]) -> String {
    let mut out = String::from("x1,x2\n");
    for p in points {
        let _ = writeln!(out, "{},{}", num(p.x1), num(p.x2));
    }
    out
}

/// `(t, x1, x2, control)` samples of a trajectory.
pub fn trajectory_csv(samples: &[(f64, Point, Control)]) -> String {
    let mut out = String::from("t,x1,x2,control\n");
    for (t, p, c) in samples {
        let _ = writeln!(out, "{},{},{},{}", num(*t), num(p.x1), num(p.x2), c.label());
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use bbcool::synthesize;

    #[test]
    fn csv_cells_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 6.02e23, -2.5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn schedule_round_trips_through_json() {
        let b = ControlBounds::new(1.0, 8.0).unwrap();
        for g in [2.0, 9.0, 1.37] {
            let r = synthesize(g, &b).unwrap();
            let text = to_json(&ScheduleDoc::from_result(&r));
            let doc: ScheduleDoc = serde_json::from_str(&text).unwrap();
            assert_eq!(doc.to_schedule().unwrap(), r.schedule);
        }
    }

    #[test]
    fn document_fields() {
        let r = synthesize(9.0, &ControlBounds::new(1.0, 8.0).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&to_json(&ScheduleDoc::from_result(&r))).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["optimal_n"], 1);
        assert_eq!(v["boundary_jumps"]["uT"].as_f64().unwrap(), 1.0 / 6561.0);
        assert_eq!(v["arcs"].as_array().unwrap().len(), 3);
        assert_eq!(v["arcs"][0]["control"], "Y");
        assert_eq!(v["arcs"][1]["value"].as_f64().unwrap(), -1.0);
        assert!(v["candidates"][1]["T"].is_number());
    }

    #[test]
    fn structural_errors_are_usage_errors() {
        let r = synthesize(9.0, &ControlBounds::new(1.0, 8.0).unwrap()).unwrap();
        let base = ScheduleDoc::from_result(&r);

        let mut doc = base.clone();
        doc.arcs[1].control = Control::Y;
        assert!(matches!(doc.to_schedule(), Err(CliError::Usage(_))));

        let mut doc = base.clone();
        doc.arcs[1].value = 8.0;
        assert!(matches!(doc.to_schedule(), Err(CliError::Usage(_))));

        let mut doc = base.clone();
        doc.schema = "bbcool/0".into();
        assert!(matches!(doc.to_schedule(), Err(CliError::Usage(_))));

        let mut doc = base;
        doc.bounds.u1 = 0.5;
        assert!(matches!(doc.to_schedule(), Err(CliError::Usage(_))));
    }
}
