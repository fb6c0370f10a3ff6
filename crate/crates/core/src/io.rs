//! Feature file formats.
//!
//! * CSV: one row per point. An optional header row is recognised when its
//!   fields are not numeric; if the header's first field is `id`, the first
//!   column carries point ids. Headerless files get ids `0..m`.
//! * Binary: the ASCII magic `CCFS`, then `u32` m and `u32` d (little
//!   endian), followed by `m * d` little-endian `f32` values in row-major
//!   order. Ids are `0..m`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::features::{FeatureSet, PointId};
use crate::scalar::Scalar;

pub const BINARY_MAGIC: [u8; 4] = *b"CCFS";
const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFormat {
    Csv,
    Binary,
}

impl FeatureFormat {
    /// `.bin`/`.ccfs` select the binary layout; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("bin") || ext.eq_ignore_ascii_case("ccfs") => {
                FeatureFormat::Binary
            }
            _ => FeatureFormat::Csv,
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        context: format!("cannot open {}", path.display()),
        source,
    })
}

pub fn read_features<T: Scalar>(path: &Path, format: FeatureFormat) -> Result<FeatureSet<T>> {
    let file = open(path)?;
    match format {
        FeatureFormat::Csv => read_csv(BufReader::new(file)),
        FeatureFormat::Binary => read_binary(BufReader::new(file)),
    }
}

pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<FeatureSet<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut id_column = false;
    let mut width: Option<usize> = None;
    let mut ids: Vec<PointId> = Vec::new();
    let mut values: Vec<T> = Vec::new();

    for (line, record) in rdr.records().enumerate() {
        let row = line + 1;
        let record = record.map_err(|e| Error::Parse {
            location: format!("row {row}"),
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if line == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            id_column = record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("id"));
            continue;
        }
        let mut fields = record.iter();
        if id_column {
            let raw = fields.next().unwrap_or_default();
            let id = raw.parse::<PointId>().map_err(|_| Error::Parse {
                location: format!("row {row}, column 1"),
                message: format!("invalid id {raw:?}"),
            })?;
            ids.push(id);
        }
        let before = values.len();
        for (col, field) in fields.enumerate() {
            let v = field.parse::<f64>().map_err(|_| Error::Parse {
                location: format!("row {row}, column {}", col + 1 + usize::from(id_column)),
                message: format!("invalid number {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    location: format!("row {row}, column {}", col + 1 + usize::from(id_column)),
                    message: "non-finite value".into(),
                });
            }
            values.push(T::of(v));
        }
        let got = values.len() - before;
        match width {
            None => width = Some(got),
            Some(w) if w != got => {
                return Err(Error::Parse {
                    location: format!("row {row}"),
                    message: format!("expected {w} features, found {got}"),
                })
            }
            _ => {}
        }
    }

    let d = width.unwrap_or(0);
    let m = if d == 0 { 0 } else { values.len() / d };
    let points = Array2::from_shape_vec((m, d), values).map_err(|e| Error::input(e.to_string()))?;
    if id_column {
        FeatureSet::new(points, ids)
    } else {
        FeatureSet::with_sequential_ids(points)
    }
}

/// Streams the binary layout in fixed-size chunks so the only large
/// allocation is the output matrix.
pub fn read_binary<T: Scalar, R: Read>(mut reader: R) -> Result<FeatureSet<T>> {
    let mut header = [0u8; HEADER_LEN];
    read_exact_at(&mut reader, &mut header, 0)?;
    if header[..4] != BINARY_MAGIC {
        return Err(Error::Parse {
            location: "byte 0".into(),
            message: "bad magic, expected \"CCFS\"".into(),
        });
    }
    let m = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let total = m.checked_mul(d).ok_or_else(|| Error::Parse {
        location: "byte 4".into(),
        message: "m * d overflows".into(),
    })?;

    let mut values = Vec::with_capacity(total);
    let mut buf = vec![0u8; 1 << 20];
    let mut offset = HEADER_LEN;
    while values.len() < total {
        let want = ((total - values.len()) * 4).min(buf.len());
        read_exact_at(&mut reader, &mut buf[..want], offset)?;
        for (k, chunk) in buf[..want].chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::Parse {
                    location: format!("byte {}", offset + 4 * k),
                    message: "non-finite value".into(),
                });
            }
            values.push(T::of(f64::from(v)));
        }
        offset += want;
    }
    let mut probe = [0u8; 1];
    if reader.read(&mut probe).map_err(|source| Error::Io {
        context: "read error".into(),
        source,
    })? != 0
    {
        return Err(Error::Parse {
            location: format!("byte {offset}"),
            message: "trailing data after the declared m * d values".into(),
        });
    }
    let points = Array2::from_shape_vec((m, d), values).map_err(|e| Error::input(e.to_string()))?;
    FeatureSet::with_sequential_ids(points)
}

fn read_exact_at<R: Read>(reader: &mut R, buf: &mut [u8], offset: usize) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(Error::Parse {
                    location: format!("byte {}", offset + filled),
                    message: format!("truncated file, needed {} more bytes", buf.len() - filled),
                })
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(source) => {
                return Err(Error::Io {
                    context: "read error".into(),
                    source,
                })
            }
        }
    }
    Ok(())
}

/// Writes the binary layout; values are narrowed to `f32`.
pub fn write_binary<T: Scalar, W: Write>(features: &FeatureSet<T>, writer: W) -> Result<()> {
    let io = |source| Error::Io {
        context: "write error".into(),
        source,
    };
    let mut w = BufWriter::new(writer);
    let (m, d) = features.points().dim();
    w.write_all(&BINARY_MAGIC).map_err(io)?;
    w.write_all(&(m as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(d as u32).to_le_bytes()).map_err(io)?;
    for v in features.points().iter() {
        w.write_all(&(v.to_f64_lossless() as f32).to_le_bytes())
            .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes CSV with an `id` header column followed by `x0..x{d-1}`.
pub fn write_csv<T: Scalar, W: Write>(features: &FeatureSet<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::input(e.to_string());
    let mut header = vec!["id".to_string()];
    header.extend((0..features.dim()).map(|j| format!("x{j}")));
    w.write_record(&header).map_err(to_err)?;
    for (row, &id) in features.ids().iter().enumerate() {
        let mut rec = vec![id.to_string()];
        rec.extend(features.row(row).iter().map(|v| format!("{}", v.to_f64_lossless())));
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        context: "write error".into(),
        source,
    })
}
