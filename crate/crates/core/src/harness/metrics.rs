use std::path::Path;

use crate::error::{Error, Result};

/// One line of a metrics file. `accuracy` is empty for embedding runs.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub epoch: usize,
    pub step: usize,
    pub loss: f64,
    pub accuracy: Option<f64>,
}

pub const METRICS_HEADER: [&str; 4] = ["epoch", "step", "loss", "accuracy"];

/// Writes `rows` as CSV. Floats use the shortest representation that reads
/// back to the same value, so equal runs give byte-identical files.
pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(METRICS_HEADER).map_err(csv_error)?;
    for r in rows {
        let acc = r.accuracy.map(|a| format!("{a:?}")).unwrap_or_default();
        w.write_record([r.epoch.to_string(), r.step.to_string(), format!("{:?}", r.loss), acc])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file produced by [`write_metrics`].
pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    if r.headers().map_err(csv_error)? != METRICS_HEADER.as_slice() {
        return Err(Error::Data(format!("{} is not a metrics file", path.display())));
    }
    let field = |rec: &csv::StringRecord, i: usize| rec.get(i).unwrap_or("").to_string();
    let bad = |what: &str| Error::Data(format!("bad {what} in {}", path.display()));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let acc = field(&rec, 3);
        rows.push(MetricRow {
            epoch: field(&rec, 0).parse().map_err(|_| bad("epoch"))?,
            step: field(&rec, 1).parse().map_err(|_| bad("step"))?,
            loss: field(&rec, 2).parse().map_err(|_| bad("loss"))?,
            accuracy: if acc.is_empty() { None } else { Some(acc.parse().map_err(|_| bad("accuracy"))?) },
        });
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Data(format!("{other:?}")),
        }
    } else {
        Error::Data(e.to_string())
    }
}
