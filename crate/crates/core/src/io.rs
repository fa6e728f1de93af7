//! Pulse-record serialization.
//!
//! Binary: consecutive little-endian `f64` pairs `(s1, s2)`, no header.
//! CSV: header `pulse_index,s1_nvs,s2_nvs`, one row per pulse.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::chain::PulseRecord;
use crate::error::{Error, Result};

pub fn write_records_binary<W: Write>(mut w: W, records: &[PulseRecord]) -> Result<()> {
    let mut buf = Vec::with_capacity(records.len() * 16);
    for r in records {
        buf.extend_from_slice(&r.s1.to_le_bytes());
        buf.extend_from_slice(&r.s2.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_records_binary<R: Read>(mut r: R) -> Result<Vec<PulseRecord>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() % 16 != 0 {
        return Err(Error::param(format!(
            "binary record stream length {} is not a multiple of 16 bytes",
            buf.len()
        )));
    }
    Ok(buf
        .chunks_exact(16)
        .map(|c| PulseRecord {
            s1: f64::from_le_bytes(c[..8].try_into().unwrap()),
            s2: f64::from_le_bytes(c[8..].try_into().unwrap()),
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    pulse_index: u64,
    s1_nvs: f64,
    s2_nvs: f64,
}

pub fn write_records_csv<W: Write>(w: W, records: &[PulseRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for (i, r) in records.iter().enumerate() {
        wtr.serialize(CsvRow {
            pulse_index: i as u64,
            s1_nvs: r.s1,
            s2_nvs: r.s2,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads records back; rows must be in pulse order starting at 0.
pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<PulseRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row?;
        if row.pulse_index != i as u64 {
            return Err(Error::param(format!(
                "pulse_index {} out of order at row {i}",
                row.pulse_index
            )));
        }
        out.push(PulseRecord {
            s1: row.s1_nvs,
            s2: row.s2_nvs,
        });
    }
    Ok(out)
}
