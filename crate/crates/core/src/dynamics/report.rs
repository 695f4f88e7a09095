use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Heal,
    Infect,
    Death,
    Birth,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Heal => "heal",
            EventKind::Infect => "infect",
            EventKind::Death => "death",
            EventKind::Birth => "birth",
        }
    }
}

/// One state change. For infections and births `aux` is the source vertex;
/// for heals and deaths it is unused (`u32::MAX`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    pub vertex: u32,
    pub aux: u32,
}

pub const NO_AUX: u32 = u32::MAX;

/// Writes `time,event_type,vertex,aux`.
pub fn write_trace_csv<W: Write>(events: &[TraceEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "event_type", "vertex", "aux"])?;
    for e in events {
        let aux = if e.aux == NO_AUX { String::new() } else { e.aux.to_string() };
        w.write_record([format!("{:.12}", e.time), e.kind.as_str().to_string(), e.vertex.to_string(), aux])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub heals: u64,
    pub infections: u64,
    /// Infection attempts on already infected targets (CP only).
    pub blocked: u64,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    /// Extinction time, or the horizon when censored.
    pub t_ext: f64,
    pub censored: bool,
    /// Infection reached the depth cap of a lazy tree.
    pub escaped: bool,
    /// BRW only: the particle cap was hit, survival to the horizon is certified.
    pub certified: bool,
    /// Last healing time per vertex, `None` if never infected or still infected at the end.
    pub local_ext: Vec<Option<f64>>,
    /// Per watched star: maximal time intervals during which it was infested.
    pub infestation_intervals: Vec<Vec<(f64, f64)>>,
    pub events: EventCounts,
}

impl SurvivalReport {
    pub fn survived(&self) -> bool {
        self.censored || self.escaped || self.certified
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
