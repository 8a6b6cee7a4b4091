use std::fmt;
use std::io::{self, Write};

use super::{Event, Phase};

/// One line of the per-cycle log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: u64,
    /// Controller phase at the end of the cycle.
    pub phase: Phase,
    pub layer: usize,
    /// FMA units that took a MAC step this cycle.
    pub active_fma: usize,
    pub events: Vec<Event>,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cycle={} phase={} layer={} active_fma={} events=",
            self.cycle, self.phase, self.layer, self.active_fma
        )?;
        if self.events.is_empty() {
            return f.write_str("-");
        }
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

pub fn write_trace<W: Write>(out: &mut W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}
