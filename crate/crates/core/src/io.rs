//! CSV and JSON serialization of paths, sequences, curves and profiles.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::partitions::StoppingSequence;
use crate::paths::SampledPath;
use crate::truncvar::CrossingProfile;

/// Shortest representation that round-trips, which never needs more than 17
/// significant digits.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,x` rows.
pub fn write_path_csv<W: Write>(out: W, path: &SampledPath) -> Result<()> {
    write_two_columns(out, path, "x")
}

/// Any curve as two columns `t,<name>` (`t,qv` for QV curves, `t,value` for integrals).
pub fn write_two_columns<W: Write>(out: W, path: &SampledPath, name: &str) -> Result<()> {
    let rows = path.times().iter().zip(path.values()).map(|(t, x)| vec![num(*t), num(*x)]);
    write_rows(out, &["t", name], rows)
}

pub fn read_path_csv<R: Read>(input: R) -> Result<SampledPath> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    ensure!(
        headers.len() == 2 && &headers[0] == "t",
        InvalidPath,
        "expected a two-column CSV with header t,<value>"
    );
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| crate::Error::InvalidPath(format!("bad number {s:?}: {e}")))
        };
        times.push(parse(&rec[0])?);
        values.push(parse(&rec[1])?);
    }
    SampledPath::new(times, values)
}

/// `n,tau,value` rows.
pub fn write_sequence_csv<W: Write>(out: W, seq: &StoppingSequence) -> Result<()> {
    let rows = seq
        .times()
        .iter()
        .zip(seq.values())
        .enumerate()
        .map(|(n, (t, v))| vec![n.to_string(), num(*t), num(*v)]);
    write_rows(out, &["n", "tau", "value"], rows)
}

/// `z_lo,z_hi,count` rows.
pub fn write_profile_csv<W: Write>(out: W, profile: &CrossingProfile) -> Result<()> {
    let rows = profile.rows().map(|(a, b, n)| vec![num(a), num(b), n.to_string()]);
    write_rows(out, &["z_lo", "z_hi", "count"], rows)
}

/// A JSON document tagged with [`crate::SCHEMA_VERSION`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Versioned { schema_version: crate::SCHEMA_VERSION, body }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Opens `path` for buffered writing.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
