//! Loading and validating multi-country input-output tables.
//!
//! A table is described by a JSON manifest that points at three or four CSV
//! files (intermediate demand `Z`, final demand `FD`, value added `VA`, and
//! optionally total output `T`). Every CSV is UTF-8, comma separated, with
//! labels in the first row and first column. Node labels are
//! `<country>_<sector>` in country-major order, so node `k` is
//! `(k / n_s, k % n_s)`.
//!
//! Final-demand columns are matched to demand countries either by an exact
//! country code or by a `<country>_` prefix (e.g. `DEU_CONS_h`); all columns
//! of one country are summed into a single column.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NodeLabel;

pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// One year of world input-output accounts.
#[derive(Clone, Debug, PartialEq)]
pub struct IoTable {
    pub year: i32,
    pub countries: Vec<String>,
    pub sectors: Vec<String>,
    /// Intermediate demand, n x n.
    pub z: DMatrix<f64>,
    /// Final demand, n x n_c (one column per demand country).
    pub fd: DMatrix<f64>,
    pub va: Vec<f64>,
    pub t: Vec<f64>,
}

impl IoTable {
    /// Assembles a table from in-memory parts, checking dimensions only.
    pub fn new(
        year: i32,
        countries: Vec<String>,
        sectors: Vec<String>,
        z: DMatrix<f64>,
        fd: DMatrix<f64>,
        va: Vec<f64>,
        t: Vec<f64>,
    ) -> Result<Self> {
        let table = IoTable {
            year,
            countries,
            sectors,
            z,
            fd,
            va,
            t,
        };
        table.check_dimensions()?;
        Ok(table)
    }

    /// Like [`IoTable::new`] but derives total output from the row identity.
    pub fn with_derived_output(
        year: i32,
        countries: Vec<String>,
        sectors: Vec<String>,
        z: DMatrix<f64>,
        fd: DMatrix<f64>,
        va: Vec<f64>,
    ) -> Result<Self> {
        let t = (0..z.nrows())
            .map(|i| z.row(i).sum() + if i < fd.nrows() { fd.row(i).sum() } else { 0.0 })
            .collect();
        Self::new(year, countries, sectors, z, fd, va, t)
    }

    pub fn n_countries(&self) -> usize {
        self.countries.len()
    }

    pub fn n_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.countries.len() * self.sectors.len()
    }

    pub fn node_of(&self, country: usize, sector: usize) -> usize {
        country * self.n_sectors() + sector
    }

    pub fn country_of(&self, node: usize) -> usize {
        node / self.n_sectors()
    }

    pub fn sector_of(&self, node: usize) -> usize {
        node % self.n_sectors()
    }

    pub fn node_label(&self, node: usize) -> NodeLabel {
        NodeLabel::new(
            self.countries[self.country_of(node)].clone(),
            self.sectors[self.sector_of(node)].clone(),
        )
    }

    pub fn node_labels(&self) -> Vec<NodeLabel> {
        (0..self.n_nodes()).map(|k| self.node_label(k)).collect()
    }

    /// Total final demand per node, summed over demand countries.
    pub fn final_demand_totals(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.fd.row(i).sum()).collect()
    }

    /// Multiplies every monetary quantity by `factor`.
    pub fn scaled(&self, factor: f64) -> IoTable {
        IoTable {
            z: &self.z * factor,
            fd: &self.fd * factor,
            va: self.va.iter().map(|v| v * factor).collect(),
            t: self.t.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    fn check_dimensions(&self) -> Result<()> {
        let n = self.n_nodes();
        if n == 0 {
            return Err(Error::Dimension("table has no countries or no sectors".into()));
        }
        let ok = self.z.nrows() == n
            && self.z.ncols() == n
            && self.fd.nrows() == n
            && self.fd.ncols() == self.n_countries()
            && self.va.len() == n
            && self.t.len() == n;
        if !ok {
            return Err(Error::Dimension(format!(
                "expected Z {n}x{n}, FD {n}x{}, VA and T of length {n}; got Z {}x{}, FD {}x{}, VA {}, T {}",
                self.n_countries(),
                self.z.nrows(),
                self.z.ncols(),
                self.fd.nrows(),
                self.fd.ncols(),
                self.va.len(),
                self.t.len()
            )));
        }
        Ok(())
    }
}

/// Country to region label. Countries without an entry are unmapped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionMap(pub BTreeMap<String, String>);

impl RegionMap {
    pub fn get(&self, country: &str) -> Option<&str> {
        self.0.get(country).map(String::as_str)
    }

    pub fn insert(&mut self, country: impl Into<String>, region: impl Into<String>) {
        self.0.insert(country.into(), region.into());
    }

    /// Regional classification of the 43 WIOD 2016 countries.
    pub fn wiod() -> Self {
        const PACIFIC: &[&str] = &[
            "AUS", "BRA", "CAN", "CHN", "IDN", "IND", "JPN", "KOR", "MEX", "RUS", "TWN", "USA",
        ];
        const EUROPE: &[&str] = &[
            "AUT", "BEL", "BGR", "CHE", "CYP", "CZE", "DEU", "DNK", "ESP", "EST", "FIN", "FRA", "GBR", "GRC",
            "HRV", "HUN", "IRL", "ITA", "LTU", "LUX", "LVA", "MLT", "NLD", "NOR", "POL", "PRT", "ROU", "SVK",
            "SVN", "SWE", "TUR",
        ];
        let mut map = RegionMap::default();
        for c in PACIFIC {
            map.insert(*c, "Pacific Rim");
        }
        for c in EUROPE {
            map.insert(*c, "Europe");
        }
        map
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub year: i32,
    pub countries: Vec<String>,
    pub sectors: Vec<String>,
    pub z_csv: PathBuf,
    pub fd_csv: PathBuf,
    pub va_csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drop_countries: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadOptions {
    pub rel_tol: f64,
    /// Identity violations are errors when set, warnings otherwise.
    pub strict: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            rel_tol: DEFAULT_REL_TOL,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub row_residuals: Vec<f64>,
    pub column_residuals: Vec<f64>,
    pub max_row_residual: f64,
    pub max_column_residual: f64,
    pub worst_row: Option<usize>,
    pub worst_column: Option<usize>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.max_row_residual.max(self.max_column_residual)
    }

    pub fn flagged_rows(&self) -> Vec<usize> {
        flagged(&self.row_residuals, self.tolerance)
    }

    pub fn flagged_columns(&self) -> Vec<usize> {
        flagged(&self.column_residuals, self.tolerance)
    }
}

fn flagged(residuals: &[f64], tol: f64) -> Vec<usize> {
    residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > tol)
        .map(|(i, _)| i)
        .collect()
}

fn relative_residual(expected: f64, actual: f64) -> f64 {
    let diff = (expected - actual).abs();
    if diff == 0.0 {
        return 0.0;
    }
    let scale = expected.abs().max(actual.abs());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Row identity `T_i = sum_j Z_ij + sum_c FD_ic` and column identity
/// `T_j = sum_i Z_ij + VA_j`, as relative residuals.
pub fn validate_accounting(table: &IoTable, rel_tol: f64) -> ValidationReport {
    let n = table.n_nodes();
    let row_residuals: Vec<f64> = (0..n)
        .map(|i| relative_residual(table.t[i], table.z.row(i).sum() + table.fd.row(i).sum()))
        .collect();
    let column_residuals: Vec<f64> = (0..n)
        .map(|j| relative_residual(table.t[j], table.z.column(j).sum() + table.va[j]))
        .collect();
    let worst_row = argmax(&row_residuals);
    let worst_column = argmax(&column_residuals);
    let max_row_residual = worst_row.map_or(0.0, |i| row_residuals[i]);
    let max_column_residual = worst_column.map_or(0.0, |j| column_residuals[j]);
    ValidationReport {
        tolerance: rel_tol,
        passed: max_row_residual <= rel_tol && max_column_residual <= rel_tol,
        row_residuals,
        column_residuals,
        max_row_residual,
        max_column_residual,
        worst_row,
        worst_column,
    }
}

fn enforce(table: &IoTable, report: &ValidationReport, strict: bool) -> Result<()> {
    if report.passed {
        return Ok(());
    }
    let (kind, index, residual) = if report.max_row_residual >= report.max_column_residual {
        ("row", report.worst_row.unwrap_or(0), report.max_row_residual)
    } else {
        (
            "column",
            report.worst_column.unwrap_or(0),
            report.max_column_residual,
        )
    };
    let err = Error::Identity {
        kind,
        index,
        label: table.node_label(index).to_string(),
        residual,
        tolerance: report.tolerance,
    };
    if strict {
        Err(err)
    } else {
        log::warn!("year {}: {err}", table.year);
        Ok(())
    }
}

/// Reads and validates the table described by `manifest_path`. Relative CSV
/// paths resolve against the manifest's directory. Countries listed in the
/// manifest's `drop_countries` are removed after validation.
pub fn load_io_table(manifest_path: &Path, options: &LoadOptions) -> Result<IoTable> {
    if options.rel_tol.is_nan() || options.rel_tol <= 0.0 {
        return Err(Error::InvalidArgument("rel_tol must be positive".into()));
    }
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    if manifest.countries.is_empty() || manifest.sectors.is_empty() {
        return Err(Error::Manifest {
            path: manifest_path.to_path_buf(),
            message: "countries and sectors must be non-empty".into(),
        });
    }
    let labels: Vec<String> = manifest
        .countries
        .iter()
        .flat_map(|c| manifest.sectors.iter().map(move |s| format!("{c}_{s}")))
        .collect();

    let z_path = resolve(&manifest.z_csv);
    let z = read_labelled_matrix(&z_path)?;
    z.expect_rows(&labels, &z_path)?;
    z.expect_columns(&labels, &z_path)?;

    let fd_path = resolve(&manifest.fd_csv);
    let fd_raw = read_labelled_matrix(&fd_path)?;
    fd_raw.expect_rows(&labels, &fd_path)?;
    let fd = collapse_final_demand(&fd_raw, &manifest.countries, &fd_path)?;

    let va_path = resolve(&manifest.va_csv);
    let va = read_labelled_vector(&va_path, &labels)?;

    let derived_t = manifest.t_csv.is_none();
    let t = match &manifest.t_csv {
        Some(p) => read_labelled_vector(&resolve(p), &labels)?,
        None => (0..labels.len())
            .map(|i| z.values.row(i).sum() + fd.row(i).sum())
            .collect(),
    };

    let table = IoTable::new(
        manifest.year,
        manifest.countries.clone(),
        manifest.sectors.clone(),
        z.values,
        fd,
        va,
        t,
    )?;
    let report = validate_accounting(&table, options.rel_tol);
    if derived_t {
        log::debug!(
            "year {}: total output derived from row sums; max column residual {:.3e}",
            table.year,
            report.max_column_residual
        );
    }
    enforce(&table, &report, options.strict)?;

    if manifest.drop_countries.is_empty() {
        Ok(table)
    } else {
        let codes: BTreeSet<String> = manifest.drop_countries.iter().cloned().collect();
        drop_regions(&table, &codes)
    }
}

/// Removes every row, column and final-demand column of the given countries.
/// The accounting identities no longer hold afterwards; residuals are only
/// logged.
pub fn drop_regions(table: &IoTable, codes: &BTreeSet<String>) -> Result<IoTable> {
    if let Some(unknown) = codes.iter().find(|c| !table.countries.contains(c)) {
        return Err(Error::UnknownCountry(unknown.clone()));
    }
    if codes.is_empty() {
        return Ok(table.clone());
    }
    let kept_countries: Vec<usize> = (0..table.n_countries())
        .filter(|&c| !codes.contains(&table.countries[c]))
        .collect();
    let kept_nodes: Vec<usize> = (0..table.n_nodes())
        .filter(|&k| !codes.contains(&table.countries[table.country_of(k)]))
        .collect();

    let n = kept_nodes.len();
    let z = DMatrix::from_fn(n, n, |a, b| table.z[(kept_nodes[a], kept_nodes[b])]);
    let fd = DMatrix::from_fn(n, kept_countries.len(), |a, c| {
        table.fd[(kept_nodes[a], kept_countries[c])]
    });
    let va = kept_nodes.iter().map(|&k| table.va[k]).collect();
    let t = kept_nodes.iter().map(|&k| table.t[k]).collect();

    let reduced = IoTable::new(
        table.year,
        kept_countries
            .iter()
            .map(|&c| table.countries[c].clone())
            .collect(),
        table.sectors.clone(),
        z,
        fd,
        va,
        t,
    )?;
    let report = validate_accounting(&reduced, DEFAULT_REL_TOL);
    if !report.passed {
        log::warn!(
            "year {}: after dropping {:?} max residual is {:.3e} (expected: global balance no longer holds)",
            table.year,
            codes,
            report.max_residual()
        );
    }
    Ok(reduced)
}

/// Writes the table as a manifest plus CSV files into `dir` and returns the
/// manifest path. Values are printed in shortest round-trip form so that a
/// subsequent load reproduces them bit for bit.
pub fn write_io_table(table: &IoTable, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let labels: Vec<String> = table.node_labels().iter().map(ToString::to_string).collect();

    write_matrix_csv(&dir.join("z.csv"), &labels, &labels, &table.z)?;
    write_matrix_csv(&dir.join("fd.csv"), &labels, &table.countries, &table.fd)?;
    write_vector_csv(&dir.join("va.csv"), "va", &labels, &table.va)?;
    write_vector_csv(&dir.join("t.csv"), "t", &labels, &table.t)?;

    let manifest = Manifest {
        year: table.year,
        countries: table.countries.clone(),
        sectors: table.sectors.clone(),
        z_csv: "z.csv".into(),
        fd_csv: "fd.csv".into(),
        va_csv: "va.csv".into(),
        t_csv: Some("t.csv".into()),
        drop_countries: Vec::new(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

struct LabelledMatrix {
    row_labels: Vec<String>,
    column_labels: Vec<String>,
    values: DMatrix<f64>,
}

impl LabelledMatrix {
    fn expect_rows(&self, labels: &[String], path: &Path) -> Result<()> {
        expect_labels("row", &self.row_labels, labels, path)
    }

    fn expect_columns(&self, labels: &[String], path: &Path) -> Result<()> {
        expect_labels("column", &self.column_labels, labels, path)
    }
}

fn expect_labels(what: &str, found: &[String], expected: &[String], path: &Path) -> Result<()> {
    if found.len() != expected.len() {
        return Err(Error::Dimension(format!(
            "{}: {} {what} labels, expected {}",
            path.display(),
            found.len(),
            expected.len()
        )));
    }
    if let Some((i, (f, e))) = found.iter().zip(expected).enumerate().find(|(_, (f, e))| f != e) {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            message: format!("{what} label {i} is {f:?}, expected {e:?}"),
        });
    }
    Ok(())
}

fn read_records(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::io(path, std::io::Error::new(io.kind(), io.to_string())),
        _ => Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
    }
}

fn parse_cell(path: &Path, row: usize, column: usize, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumeric {
            path: path.to_path_buf(),
            row,
            column,
            value: cell.to_string(),
        }),
    }
}

fn read_labelled_matrix(path: &Path) -> Result<LabelledMatrix> {
    let rows = read_records(path)?;
    let (header, body) = rows.split_first().ok_or_else(|| Error::Csv {
        path: path.to_path_buf(),
        message: "empty file".into(),
    })?;
    let column_labels: Vec<String> = header.iter().skip(1).cloned().collect();
    let ncols = column_labels.len();
    let mut row_labels = Vec::with_capacity(body.len());
    let mut values = DMatrix::zeros(body.len(), ncols);
    for (r, row) in body.iter().enumerate() {
        if row.len() != ncols + 1 {
            return Err(Error::Dimension(format!(
                "{}: row {} has {} cells, expected {}",
                path.display(),
                r + 1,
                row.len(),
                ncols + 1
            )));
        }
        row_labels.push(row[0].clone());
        for (c, cell) in row[1..].iter().enumerate() {
            values[(r, c)] = parse_cell(path, r + 1, c + 1, cell)?;
        }
    }
    Ok(LabelledMatrix {
        row_labels,
        column_labels,
        values,
    })
}

/// Accepts either a column layout (`label,value` per line after a header)
/// or a row layout (one header row of labels, one row of values).
fn read_labelled_vector(path: &Path, labels: &[String]) -> Result<Vec<f64>> {
    let m = read_labelled_matrix(path)?;
    if m.values.ncols() == 1 && m.values.nrows() == labels.len() {
        m.expect_rows(labels, path)?;
        Ok(m.values.column(0).iter().copied().collect())
    } else if m.values.nrows() == 1 && m.values.ncols() == labels.len() {
        m.expect_columns(labels, path)?;
        Ok(m.values.row(0).iter().copied().collect())
    } else {
        Err(Error::Dimension(format!(
            "{}: vector of {} entries expected, found a {}x{} block",
            path.display(),
            labels.len(),
            m.values.nrows(),
            m.values.ncols()
        )))
    }
}

fn collapse_final_demand(raw: &LabelledMatrix, countries: &[String], path: &Path) -> Result<DMatrix<f64>> {
    let mut owner = Vec::with_capacity(raw.column_labels.len());
    for label in &raw.column_labels {
        let c = countries
            .iter()
            .position(|c| {
                label == c
                    || label
                        .strip_prefix(c.as_str())
                        .is_some_and(|rest| rest.starts_with('_'))
            })
            .ok_or_else(|| Error::Csv {
                path: path.to_path_buf(),
                message: format!("final-demand column {label:?} does not belong to any listed country"),
            })?;
        owner.push(c);
    }
    if let Some(missing) = (0..countries.len()).find(|c| !owner.contains(c)) {
        return Err(Error::Dimension(format!(
            "{}: no final-demand column for country {}",
            path.display(),
            countries[missing]
        )));
    }
    let mut fd = DMatrix::zeros(raw.values.nrows(), countries.len());
    for (col, &c) in owner.iter().enumerate() {
        for r in 0..raw.values.nrows() {
            fd[(r, c)] += raw.values[(r, col)];
        }
    }
    Ok(fd)
}

fn write_matrix_csv(path: &Path, rows: &[String], cols: &[String], values: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec![String::new()];
    header.extend(cols.iter().cloned());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (r, label) in rows.iter().enumerate() {
        let mut record = vec![label.clone()];
        record.extend((0..cols.len()).map(|c| values[(r, c)].to_string()));
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_vector_csv(path: &Path, name: &str, labels: &[String], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["", name]).map_err(|e| csv_error(path, e))?;
    for (label, v) in labels.iter().zip(values) {
        w.write_record([label.clone(), v.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
