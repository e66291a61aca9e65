//! Bit-stable file formats: trace CSV, depth-curve CSV, field snapshots, and
//! flat key=value reports.  Every writer has a matching reader so files
//! round-trip exactly; floats are printed with Rust's shortest round-trip
//! formatting, which makes identical runs byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;

use fracwell_core::evolve::TraceRecord;
use fracwell_core::grid::{Domain1D, Field};

fn bad_data(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Trace CSV column order.
pub const TRACE_HEADER: &str = "t,J,I,l2h,lp1,ut_l2h,diss,F,drift";

pub fn write_trace(path: &Path, records: &[TraceRecord]) -> io::Result<()> {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t, r.j, r.i, r.l2h, r.lp1, r.ut_l2h, r.diss, r.f, r.drift
        );
    }
    fs::write(path, out)
}

pub fn read_trace(path: &Path) -> io::Result<Vec<TraceRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => return Err(bad_data(format!("bad trace header: {other:?}"))),
    }
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| bad_data(format!("row {}: {e}", k + 2))))
            .collect::<io::Result<_>>()?;
        if v.len() != 9 {
            return Err(bad_data(format!("row {}: expected 9 fields, got {}", k + 2, v.len())));
        }
        records.push(TraceRecord {
            t: v[0],
            j: v[1],
            i: v[2],
            l2h: v[3],
            lp1: v[4],
            ut_l2h: v[5],
            diss: v[6],
            f: v[7],
            drift: v[8],
        });
    }
    Ok(records)
}

pub fn write_d_curve(path: &Path, curve: &[(f64, f64)]) -> io::Result<()> {
    let mut out = String::from("delta,d_of_delta\n");
    for (d, v) in curve {
        let _ = writeln!(out, "{d},{v}");
    }
    fs::write(path, out)
}

#[allow(dead_code)] // reader half of the format; exercised in tests
pub fn read_d_curve(path: &Path) -> io::Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("delta,d_of_delta") => {}
        other => return Err(bad_data(format!("bad depth-curve header: {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (a, b) = l.split_once(',').ok_or_else(|| bad_data(format!("bad row: {l}")))?;
            Ok((
                a.parse().map_err(|e| bad_data(format!("{e}")))?,
                b.parse().map_err(|e| bad_data(format!("{e}")))?,
            ))
        })
        .collect()
}

/// Snapshot format: `# fracwell snapshot`, `# domain a b m pad`, optional
/// further `#` metadata, then one `x re im` line per interior node.
pub fn write_snapshot(path: &Path, u: &Field, extra: &[(&str, String)]) -> io::Result<()> {
    let d = u.domain;
    let mut out = String::from("# fracwell snapshot\n");
    let _ = writeln!(out, "# domain {} {} {} {}", d.a, d.b, d.m, d.pad);
    for (k, v) in extra {
        let _ = writeln!(out, "# {k} {v}");
    }
    for (x, v) in d.interior_coords().iter().zip(&u.values) {
        let _ = writeln!(out, "{x} {} {}", v.re, v.im);
    }
    fs::write(path, out)
}

pub fn read_snapshot(path: &Path) -> io::Result<Field> {
    let text = fs::read_to_string(path)?;
    let mut domain: Option<Domain1D> = None;
    let mut values = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.first() == Some(&"domain") && parts.len() == 5 {
                let a: f64 = parts[1].parse().map_err(|e| bad_data(format!("{e}")))?;
                let b: f64 = parts[2].parse().map_err(|e| bad_data(format!("{e}")))?;
                let m: usize = parts[3].parse().map_err(|e| bad_data(format!("{e}")))?;
                let pad: usize = parts[4].parse().map_err(|e| bad_data(format!("{e}")))?;
                domain =
                    Some(Domain1D::new(a, b, m, pad).map_err(|e| bad_data(e.to_string()))?);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad_data(format!("expected `x re im`, got `{line}`")));
        }
        let re: f64 = parts[1].parse().map_err(|e| bad_data(format!("{e}")))?;
        let im: f64 = parts[2].parse().map_err(|e| bad_data(format!("{e}")))?;
        values.push(Complex64::new(re, im));
    }
    let domain = domain.ok_or_else(|| bad_data("snapshot is missing the domain header".into()))?;
    Field::from_values(domain, values).map_err(|e| bad_data(e.to_string()))
}

/// Flat key=value report writer (one pair per line, stable order).
pub fn write_report(path: &Path, pairs: &[(String, String)]) -> io::Result<()> {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}={v}");
    }
    fs::write(path, out)
}

#[allow(dead_code)] // reader half of the format; exercised in tests
pub fn read_report(path: &Path) -> io::Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| bad_data(format!("bad report line: {l}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trips_exactly() {
        let records = vec![
            TraceRecord {
                t: 0.1,
                j: -1.5e-3,
                i: 2.0,
                l2h: 0.333333333333333314829616256247390992939472198486328125,
                lp1: 1e-300,
                ut_l2h: 7.25,
                diss: 0.0,
                f: 9.9,
                drift: 1e-16,
            },
        ];
        let dir = std::env::temp_dir().join("fracwell-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("trace.csv");
        write_trace(&p, &records).unwrap();
        let back = read_trace(&p).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].t.to_bits(), records[0].t.to_bits());
        assert_eq!(back[0].l2h.to_bits(), records[0].l2h.to_bits());
        assert_eq!(back[0].lp1.to_bits(), records[0].lp1.to_bits());
    }

    #[test]
    fn snapshot_round_trips() {
        let domain = Domain1D::new(-1.0, 1.0, 5, 5).unwrap();
        let u = Field::from_fn(domain, |x| Complex64::new(x, -x * x));
        let dir = std::env::temp_dir().join("fracwell-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("u.snap");
        write_snapshot(&p, &u, &[("note", "test".into())]).unwrap();
        let back = read_snapshot(&p).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn d_curve_and_report_round_trip() {
        let dir = std::env::temp_dir().join("fracwell-io-test");
        fs::create_dir_all(&dir).unwrap();
        let c = vec![(0.5, 0.25), (1.0, 0.125)];
        let p = dir.join("d.csv");
        write_d_curve(&p, &c).unwrap();
        assert_eq!(read_d_curve(&p).unwrap(), c);
        let r = vec![("status".to_string(), "completed".to_string())];
        let p = dir.join("r.txt");
        write_report(&p, &r).unwrap();
        assert_eq!(read_report(&p).unwrap(), r);
    }
}
