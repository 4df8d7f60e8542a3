//! CSV tables for decay curves, bound curves and non-CP scans.
//!
//! Floats are written in Rust's shortest round-trip form, so a table parses
//! back to the exact values that produced it.

use std::io::Write;

use crate::bounds::BoundRow;
use crate::error::Result;
use crate::rb::DecayRecord;
use crate::tomography::ScanRow;

pub const DECAY_HEADER: [&str; 5] = ["k", "mean", "stderr", "n_sequences", "shots"];
pub const BOUND_HEADER: [&str; 6] = ["chi_ab", "ours_lo", "ours_hi", "mgj_lo", "mgj_hi", "mgj_valid"];
pub const SCAN_HEADER: [&str; 3] = ["trial", "min_choi_eigenvalue", "noncp"];

fn write_table<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_decay_csv<W: Write>(out: W, records: &[DecayRecord]) -> Result<()> {
    write_table(
        out,
        &DECAY_HEADER,
        records.iter().map(|r| {
            vec![
                r.k.to_string(),
                r.mean.to_string(),
                r.stderr.to_string(),
                r.n_sequences.to_string(),
                r.shots.to_string(),
            ]
        }),
    )
}

/// Invalid intervals are written as `NaN` endpoints.
pub fn write_bound_curves_csv<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    write_table(
        out,
        &BOUND_HEADER,
        rows.iter().map(|r| {
            vec![
                r.chi_ab.to_string(),
                r.ours.lo.to_string(),
                r.ours.hi.to_string(),
                r.mgj.lo.to_string(),
                r.mgj.hi.to_string(),
                r.mgj.valid.to_string(),
            ]
        }),
    )
}

pub fn write_scan_csv<W: Write>(out: W, rows: &[ScanRow]) -> Result<()> {
    write_table(
        out,
        &SCAN_HEADER,
        rows.iter().map(|r| {
            vec![
                r.trial.to_string(),
                r.min_choi_eigenvalue.to_string(),
                r.noncp.to_string(),
            ]
        }),
    )
}

/// Reads a table back as a header and rows of raw fields.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| Ok(rec?.iter().map(str::to_owned).collect()))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bound_curves;

    #[test]
    fn decay_round_trip() {
        let recs = [DecayRecord {
            k: 3,
            mean: 0.1 + 0.2,
            stderr: 1e-17,
            n_sequences: 10,
            shots: 2,
        }];
        let mut buf = Vec::new();
        write_decay_csv(&mut buf, &recs).unwrap();
        let (h, rows) = read_csv(buf.as_slice()).unwrap();
        assert_eq!(h, DECAY_HEADER);
        assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(rows[0][2].parse::<f64>().unwrap(), 1e-17);
    }

    #[test]
    fn bound_table() {
        let rows = bound_curves(0.995, 11, 2).unwrap();
        let mut buf = Vec::new();
        write_bound_curves_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("chi_ab,ours_lo,ours_hi,mgj_lo,mgj_hi,mgj_valid\n"));
        assert_eq!(text.lines().count(), 12);
    }
}
