//! File writers. Every file goes to a temporary sibling first and is renamed
//! into place, so readers never see a partial file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qmaction::{Boundary, DiagnosticsRecord, Wavefunction};

use crate::error::CliError;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn diagnostics_csv(rows: &[DiagnosticsRecord]) -> String {
    let mut out = DiagnosticsRecord::COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.step.to_string());
        for v in r.values() {
            out.push(',');
            out.push_str(&num(v));
        }
        out.push('\n');
    }
    out
}

/// Two-column `name,value` table.
pub fn summary_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{}", num(*v));
    }
    out
}

/// `iteration,energy` history.
pub fn history_csv(history: &[f64]) -> String {
    let mut out = String::from("iteration,energy\n");
    for (k, e) in history.iter().enumerate() {
        let _ = writeln!(out, "{k},{}", num(*e));
    }
    out
}

/// Snapshot file: `#` metadata lines, then `re,im` per node.
pub fn snapshot_csv(psi: &Wavefunction, step: usize) -> String {
    let g = psi.grid();
    let boundary = match g.boundary() {
        Boundary::Dirichlet => "dirichlet",
        Boundary::Periodic => "periodic",
    };
    let mut out = String::new();
    let _ = writeln!(out, "# step={step}");
    let _ = writeln!(out, "# time={}", num(psi.time()));
    let _ = writeln!(out, "# x_min={}", num(g.x_min()));
    let _ = writeln!(out, "# x_max={}", num(g.x_max()));
    let _ = writeln!(out, "# n_points={}", g.len());
    let _ = writeln!(out, "# dx={}", num(g.dx()));
    let _ = writeln!(out, "# boundary={boundary}");
    out.push_str("re,im\n");
    for a in psi.amplitudes() {
        let _ = writeln!(out, "{},{}", num(a.re), num(a.im));
    }
    out
}

pub fn snapshot_name(step: usize) -> String {
    format!("step_{step:08}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_bitwise() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/a.csv");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn diagnostics_header_order_is_fixed() {
        let csv = diagnostics_csv(&[]);
        assert_eq!(
            csv,
            "step,time,norm,energy,continuity_sup,continuity_l2,action_simple_running,action_standard_running,hamilton_r1\n"
        );
    }
}
