//! Results files: one CSV table and optional per-`f` plot series.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::sweep::ResultRow;

pub const CSV_HEADER: [&str; 6] = ["f", "m", "mean_offline_error", "std_error", "runs", "wall_time_s"];

/// Formats `x` with six significant digits in the style of C's `%g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.f.to_string(),
            r.m.to_string(),
            sig6(r.mean_offline_error),
            sig6(r.std_error),
            r.runs.to_string(),
            sig6(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| HarnessError::Results(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Results(format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .map(|record| {
            let record = record.map_err(|e| HarnessError::Results(e.to_string()))?;
            let field = |i: usize| record.get(i).unwrap_or_default();
            let bad = |i: usize| HarnessError::Results(format!("bad {} value {:?}", CSV_HEADER[i], field(i)));
            Ok(ResultRow {
                f: field(0).parse().map_err(|_| bad(0))?,
                m: field(1).parse().map_err(|_| bad(1))?,
                mean_offline_error: field(2).parse().map_err(|_| bad(2))?,
                std_error: field(3).parse().map_err(|_| bad(3))?,
                runs: field(4).parse().map_err(|_| bad(4))?,
                wall_time_s: field(5).parse().map_err(|_| bad(5))?,
            })
        })
        .collect()
}

pub fn write_csv_file(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::Results(format!("{other:?}")),
    })
}

/// Writes one `m mean_OE std_error` series per change frequency into `dir`, named
/// `oe_f<f>.dat`. Returns the paths written, in order of first appearance of `f`.
pub fn write_plot_series(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut frequencies: Vec<u64> = Vec::new();
    for r in rows {
        if !frequencies.contains(&r.f) {
            frequencies.push(r.f);
        }
    }
    let mut paths = Vec::new();
    for f in frequencies {
        let path = dir.join(format!("oe_f{f}.dat"));
        let mut text = String::from("# m mean_OE std_error\n");
        for r in rows.iter().filter(|r| r.f == f) {
            text.push_str(&format!("{} {} {}\n", r.m, sig6(r.mean_offline_error), sig6(r.std_error)));
        }
        std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}
