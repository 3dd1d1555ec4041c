//! File formats: catalog and popularity CSV, acceptance tables, and traces
//! (plain or gzip, one id per line or `id,timestamp`).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::catalog::{Catalog, Popularity};
use crate::error::{Error, Result};
use crate::sim::Trace;

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Opens a file for reading, decompressing when it starts with the gzip magic.
pub fn open_maybe_gz(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = BufReader::new(File::open(path)?);
    let magic = file.fill_buf()?;
    if magic.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(file))
    }
}

/// Creates a file for writing, gzip-compressed when the name ends in `.gz`.
pub fn create_maybe_gz(path: &Path) -> Result<Box<dyn Write>> {
    let file = BufWriter::new(File::create(path)?);
    if is_gz(path) {
        Ok(Box::new(GzEncoder::new(file, Compression::default())))
    } else {
        Ok(Box::new(file))
    }
}

fn parse<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{}`", field.trim()),
    })
}

// Rows of a headered-or-not numeric CSV whose first column is a dense id.
fn read_id_rows(reader: impl Read) -> Result<Vec<Vec<f64>>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, record) in csv.records().enumerate() {
        let record = record?;
        let line = k + 1;
        let first = record.get(0).unwrap_or("");
        if k == 0 && first.parse::<usize>().is_err() {
            continue; // header
        }
        let id: usize = parse(first, line, "id")?;
        let values = record
            .iter()
            .skip(1)
            .map(|f| parse::<f64>(f, line, "value"))
            .collect::<Result<Vec<_>>>()?;
        rows.push((id, values));
    }
    rows.sort_by_key(|r| r.0);
    for (expect, (id, _)) in rows.iter().enumerate() {
        if *id != expect {
            return Err(Error::Parse {
                line: 0,
                message: format!("ids must be 0..N without gaps; missing or repeated id near {expect}"),
            });
        }
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

pub fn read_catalog_csv(path: &Path) -> Result<Catalog> {
    Catalog::new(read_id_rows(open_maybe_gz(path)?)?)
}

pub fn write_catalog_csv(path: &Path, catalog: &Catalog) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_maybe_gz(path)?);
    let mut header = vec!["id".to_string()];
    header.extend((0..catalog.dim()).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for (id, x) in catalog.embeddings().enumerate() {
        let mut row = vec![id.to_string()];
        row.extend(x.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_popularity_csv(path: &Path) -> Result<Popularity> {
    let rows = read_id_rows(open_maybe_gz(path)?)?;
    let weights = rows
        .into_iter()
        .enumerate()
        .map(|(id, r)| match r.as_slice() {
            [w] => Ok(*w),
            _ => Err(Error::Parse {
                line: id + 1,
                message: "expected `id,weight`".into(),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Popularity::from_weights(weights)
}

pub fn write_popularity_csv(path: &Path, popularity: &Popularity) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_maybe_gz(path)?);
    w.write_record(["id", "weight"])?;
    for (id, x) in popularity.weights().iter().enumerate() {
        w.write_record([id.to_string(), x.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `server,requester,q` rows.
pub fn read_acceptance_table(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(open_maybe_gz(path)?);
    let mut out = Vec::new();
    for (k, record) in csv.records().enumerate() {
        let record = record?;
        let line = k + 1;
        if k == 0 && record.get(0).is_some_and(|f| f.parse::<usize>().is_err()) {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                message: "expected `server,requester,q`".into(),
            });
        }
        out.push((
            parse(&record[0], line, "server id")?,
            parse(&record[1], line, "requester id")?,
            parse(&record[2], line, "probability")?,
        ));
    }
    Ok(out)
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    let reader = open_maybe_gz(path)?;
    let mut requests = Vec::new();
    let mut timestamps: Option<Vec<f64>> = None;
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut fields = text.split(',');
        let id = fields.next().unwrap_or("");
        if requests.is_empty() && id.trim().parse::<usize>().is_err() && timestamps.is_none() {
            continue; // header
        }
        requests.push(parse(id, k + 1, "item id")?);
        match (fields.next(), &mut timestamps) {
            (Some(ts), Some(v)) => v.push(parse(ts, k + 1, "timestamp")?),
            (Some(ts), None) if requests.len() == 1 => timestamps = Some(vec![parse(ts, k + 1, "timestamp")?]),
            (None, None) => {}
            _ => {
                return Err(Error::Parse {
                    line: k + 1,
                    message: "timestamps must be given on every line or none".into(),
                })
            }
        }
    }
    if requests.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Trace::new(requests, timestamps)
}

pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let mut w = create_maybe_gz(path)?;
    match trace.timestamps() {
        Some(ts) => {
            for (id, t) in trace.requests().iter().zip(ts) {
                writeln!(w, "{id},{t}")?;
            }
        }
        None => {
            for id in trace.requests() {
                writeln!(w, "{id}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
