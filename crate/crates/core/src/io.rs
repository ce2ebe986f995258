//! Matrix CSV files, cohort manifests and JSON reports.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::cohort::{CohortDataset, Label, Subject};
use crate::corr::{validate_or_shrink, CorrelationMatrix};
use crate::error::{Error, Result};

pub const MANIFEST_HEADER: [&str; 4] = ["subject_id", "matrix_path", "label", "age"];

fn parse_error(path: &Path, row: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        row,
        col,
        message: message.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => parse_error(path, row, 0, format!("{other:?}")),
    }
}

/// Square numeric CSV without a header. Rows and columns in errors are 1-based.
pub fn parse_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| parse_error(path, r + 1, c + 1, format!("`{field}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_error(
                    path,
                    r + 1,
                    row.len().min(first.len()) + 1,
                    format!("row has {} values, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_error(path, 1, 1, "file is empty"));
    }
    if rows[0].len() != n {
        return Err(parse_error(path, 1, 1, format!("matrix is {n} × {}, not square", rows[0].len())));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Reads and validates a correlation matrix, appending notes on any repair
/// (symmetrization, diagonal renormalization, shrinkage) to `warnings`.
pub fn read_matrix(path: &Path, shrink: bool, warnings: &mut Vec<String>) -> Result<CorrelationMatrix> {
    let raw = parse_matrix_csv(path)?;
    let v = validate_or_shrink(&raw, shrink)?;
    let name = path.display();
    if v.asymmetry > 0.0 {
        warnings.push(format!("{name}: symmetrized (max asymmetry {:e})", v.asymmetry));
    }
    if v.renormalized {
        warnings.push(format!("{name}: diagonal renormalized to 1"));
    }
    if v.shrinkage > 0.0 {
        warnings.push(format!("{name}: shrunk towards identity with gamma = {}", v.shrinkage));
    }
    Ok(v.matrix)
}

/// Writes `m` as CSV with 17 significant digits per value.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// One manifest row; `matrix_path` as written in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub subject_id: String,
    pub matrix_path: PathBuf,
    pub label: Option<Label>,
    pub age: Option<f64>,
}

pub fn read_manifest_rows(path: &Path) -> Result<Vec<ManifestRow>> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(MANIFEST_HEADER) {
        return Err(parse_error(
            path,
            1,
            1,
            format!("header must be `{}`", MANIFEST_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = r + 2;
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(parse_error(path, line, 1, "empty subject_id"));
        }
        let label = match &record[2] {
            "" => None,
            s => Some(s.parse::<Label>().map_err(|e| parse_error(path, line, 3, e.to_string()))?),
        };
        let age = match &record[3] {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .ok()
                    .filter(|a| a.is_finite())
                    .ok_or_else(|| parse_error(path, line, 4, format!("`{s}` is not a finite age")))?,
            ),
        };
        rows.push(ManifestRow {
            subject_id: id,
            matrix_path: PathBuf::from(&record[1]),
            label,
            age,
        });
    }
    Ok(rows)
}

/// Loads every subject of a manifest, in file order. Matrix paths resolve
/// relative to the manifest's directory.
pub fn read_manifest(path: &Path, shrink: bool, warnings: &mut Vec<String>) -> Result<CohortDataset> {
    let rows = read_manifest_rows(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = std::collections::HashSet::new();
    let mut subjects = Vec::with_capacity(rows.len());
    for row in rows {
        if !seen.insert(row.subject_id.clone()) {
            return Err(Error::DuplicateId(row.subject_id));
        }
        let matrix = read_matrix(&base.join(&row.matrix_path), shrink, warnings)
            .map_err(|e| Error::for_subject(&row.subject_id, e))?;
        if let Some(first) = subjects.first().map(|s: &Subject| s.matrix.dim()) {
            if matrix.dim() != first {
                return Err(Error::for_subject(&row.subject_id, Error::dims(first, matrix.dim())));
            }
        }
        subjects.push(Subject {
            id: row.subject_id,
            matrix,
            label: row.label,
            age: row.age,
        });
    }
    CohortDataset::new(subjects)
}

/// Writes `manifest.csv` and one `matrices/<id>.csv` per subject into `dir`.
pub fn write_cohort(dir: &Path, cohort: &CohortDataset) -> Result<PathBuf> {
    let matrices = dir.join("matrices");
    fs::create_dir_all(&matrices)?;
    let manifest = dir.join("manifest.csv");
    let mut w = csv::Writer::from_path(&manifest).map_err(|e| csv_error(&manifest, e))?;
    w.write_record(MANIFEST_HEADER).map_err(|e| csv_error(&manifest, e))?;
    for s in cohort.subjects() {
        let rel = format!("matrices/{}.csv", s.id);
        write_matrix(&dir.join(&rel), s.matrix.as_matrix())?;
        let label = s.label.map(|l| l.to_string()).unwrap_or_default();
        let age = s.age.map(|a| format!("{a:.16e}")).unwrap_or_default();
        w.write_record([s.id.as_str(), rel.as_str(), label.as_str(), age.as_str()])
            .map_err(|e| csv_error(&manifest, e))?;
    }
    w.flush()?;
    Ok(manifest)
}

/// Pretty JSON where every float carries 17 significant digits and
/// non-finite floats become `null`.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Envelope shared by every command's JSON output.
#[derive(Debug, Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a C,
    pub result: R,
    pub warnings: Vec<String>,
}

impl<'a, C: Serialize, R: Serialize> Report<'a, C, R> {
    pub fn new(command: &'a str, config: &'a C, result: R, warnings: Vec<String>) -> Self {
        Report {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            result,
            warnings,
        }
    }

    /// Writes to `path`, or to stdout when `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let text = to_json(self)?;
        match path {
            Some(p) => fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}
