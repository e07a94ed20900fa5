//! CSV serialization shared by every report type.
//!
//! Reals go through the shortest round-trip representation, so a value read
//! back from a report is bit-identical to the one written.

use std::io::Write;

use serde::Serialize;

/// Writes `rows` as CSV with a header row derived from the field names.
pub fn write_csv<R: Serialize, W: Write>(rows: &[R], writer: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// CSV body as a string.
pub fn csv_string<R: Serialize>(rows: &[R]) -> Result<String, csv::Error> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits utf-8"))
}
