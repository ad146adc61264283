//! CSV import and export of datasets.
//!
//! Files carry a header row. By default the columns named `x0, x1, …`,
//! `y0, …` and `z0, …` form the three blocks; explicit column lists override
//! that. Row numbers in error messages count data rows from 1, excluding the
//! header.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};

/// Which header names make up `x`, `y` and `z`. An empty list selects every
/// column named `<prefix><digits>` for that block, in index order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColumnSpec {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
}

impl ColumnSpec {
    /// Parses comma-separated lists such as `"a,b"`; `None` keeps the default.
    pub fn from_lists(x: Option<&str>, y: Option<&str>, z: Option<&str>) -> Self {
        let split = |s: Option<&str>| -> Vec<String> {
            s.map(|s| s.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect())
                .unwrap_or_default()
        };
        Self {
            x: split(x),
            y: split(y),
            z: split(z),
        }
    }

    fn resolve(&self, header: &[String]) -> Result<[Vec<usize>; 3]> {
        let mut out: [Vec<usize>; 3] = Default::default();
        for (slot, (names, prefix)) in out.iter_mut().zip([(&self.x, 'x'), (&self.y, 'y'), (&self.z, 'z')]) {
            if names.is_empty() {
                let mut found: Vec<(usize, usize)> = header
                    .iter()
                    .enumerate()
                    .filter_map(|(i, h)| {
                        let rest = h.strip_prefix(prefix)?;
                        let idx: usize = rest.parse().ok().filter(|_| rest.bytes().all(|b| b.is_ascii_digit()))?;
                        Some((idx, i))
                    })
                    .collect();
                found.sort();
                *slot = found.into_iter().map(|(_, i)| i).collect();
            } else {
                for name in names {
                    let i = header
                        .iter()
                        .position(|h| h == name)
                        .ok_or_else(|| Error::Data(format!("column {name:?} not found in header")))?;
                    slot.push(i);
                }
            }
        }
        if out[0].is_empty() || out[1].is_empty() {
            return Err(Error::Data("no x or no y columns selected".into()));
        }
        Ok(out)
    }
}

pub fn read_dataset(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    read_dataset_from(file, spec)
}

pub fn read_dataset_from(reader: impl Read, spec: &ColumnSpec) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Data(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let blocks = spec.resolve(&header)?;
    let mut columns: [Vec<f64>; 3] = Default::default();
    let mut n = 0;
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Data(format!("row {row}: malformed CSV ({e})")))?;
        for (values, idx) in columns.iter_mut().zip(&blocks) {
            for &c in idx {
                let cell = record
                    .get(c)
                    .ok_or_else(|| Error::Data(format!("row {row}, column {}: missing value", header[c])))?
                    .trim();
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!("row {row}, column {}: cannot parse {cell:?} as a number", header[c]))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("row {row}, column {}: non-finite value {cell:?}", header[c])));
                }
                values.push(v);
            }
        }
        n += 1;
    }
    let to_matrix = |values: Vec<f64>, cols: usize| Matrix::new(n, cols, values);
    let [x, y, z] = columns;
    Dataset::new(
        to_matrix(x, blocks[0].len())?,
        to_matrix(y, blocks[1].len())?,
        to_matrix(z, blocks[2].len())?,
    )
}

/// Header `x0.., y0.., z0..`; values in shortest round-trip form.
pub fn write_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_dataset_to(file, data)
}

pub fn write_dataset_to(writer: impl Write, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let (dx, dy, dz) = data.dims();
    let header: Vec<String> = (0..dx)
        .map(|i| format!("x{i}"))
        .chain((0..dy).map(|i| format!("y{i}")))
        .chain((0..dz).map(|i| format!("z{i}")))
        .collect();
    w.write_record(&header).map_err(csv_error)?;
    let mut row = Vec::with_capacity(header.len());
    for r in 0..data.n() {
        row.clear();
        for m in [&data.x, &data.y, &data.z] {
            if m.n_cols() > 0 {
                row.extend(m.row(r).iter().map(|v| v.to_string()));
            }
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Data(format!("CSV error: {other:?}")),
    }
}
