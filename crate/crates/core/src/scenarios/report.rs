//! Scenario outputs: one CSV row per scan point, histogram bin or run, and
//! a JSON summary carrying [`SCHEMA_VERSION`].

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Version of the JSON summaries written next to scenario outputs.
pub const SCHEMA_VERSION: u32 = 1;

/// Writes `rows` as CSV with a header taken from the row's field names.
pub fn write_csv<W: Write, R: Serialize>(w: W, rows: &[R]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<T> {
    pub schema_version: u32,
    pub scenario: String,
    pub master_seed: u64,
    /// Pulses per run (per point for scans); zero when nothing is simulated.
    pub pulses: usize,
    pub result: T,
}

impl<T: Serialize> Summary<T> {
    pub fn new(scenario: impl Into<String>, master_seed: u64, pulses: usize, result: T) -> Self {
        Summary {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            master_seed,
            pulses,
            result,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::ScanPoint;

    #[test]
    fn scan_points_as_csv() {
        let p = ScanPoint {
            index: 0,
            coordinate: -1.5,
            overlap_weight: 0.25,
            g2: 2.0,
            std_error: 0.01,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[p]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,coordinate,overlap_weight,g2,std_error\n0,-1.5,0.25,2.0,0.01\n"
        );
    }

    #[test]
    fn summary_carries_schema_version() {
        let mut buf = Vec::new();
        Summary::new("hbt", 7, 10, 1.5).write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["master_seed"], 7);
    }
}
