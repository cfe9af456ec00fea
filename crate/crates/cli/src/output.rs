//! CSV, gnuplot `.dat` and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use gmud::BerCurve;

pub const CSV_HEADER: &str = "scheme,modulation,feedback_bits,snr_db,ber,bits,errors";

/// One row per point, curves in the given order.
pub fn curves_to_csv(curves: &[BerCurve]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.scheme, c.modulation, c.feedback, p.snr_db, p.ber, p.bits, p.errors
            );
        }
    }
    out
}

/// Gnuplot data: one indexable block per curve.
pub fn curves_to_dat(curves: &[BerCurve]) -> String {
    let mut out = String::new();
    for (i, c) in curves.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# {} {} feedback={}", c.scheme, c.modulation, c.feedback);
        let _ = writeln!(out, "# snr_db ber std_err");
        for p in &c.points {
            let _ = writeln!(out, "{} {} {}", p.snr_db, p.ber, p.std_err);
        }
    }
    out
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
