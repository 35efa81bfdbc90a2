//! Shared output formatting.
//!
//! Every number written to a CSV or report goes through [`fmt_num`], which
//! prints 12 significant digits in scientific notation so that outputs are
//! byte-identical across runs and platforms.

use std::io::Write;

use crate::error::Result;

pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.11e}", v)
    }
}

/// Write a header plus rows of pre-formatted cells as CSV.
pub fn write_rows<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// FNV-1a over the bit patterns of a slice of floats. Stable across builds.
pub fn hash_values(values: impl IntoIterator<Item = f64>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{:016x}", h)
}
