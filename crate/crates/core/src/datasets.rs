//! Synthetic benchmark functions, train/test splitting, and CSV ingestion.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::data::{DataError, DesignMatrix};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("parse error at row {row}, column {col}: `{value}` is not a number")]
    ParseError {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("no data rows")]
    Empty,
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl From<io::Error> for DatasetError {
    fn from(e: io::Error) -> Self {
        DatasetError::Io(e.to_string())
    }
}

/// The benchmark targets. `Sinc` and `TwistedSigmoid` take one input; the
/// four surfaces take two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionId {
    Sinc,
    TwistedSigmoid,
    F1,
    F2,
    F3,
    F4,
}

impl FunctionId {
    pub const ALL: [FunctionId; 6] = [
        FunctionId::Sinc,
        FunctionId::TwistedSigmoid,
        FunctionId::F1,
        FunctionId::F2,
        FunctionId::F3,
        FunctionId::F4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Sinc => "sinc",
            FunctionId::TwistedSigmoid => "twisted_sigmoid",
            FunctionId::F1 => "f1",
            FunctionId::F2 => "f2",
            FunctionId::F3 => "f3",
            FunctionId::F4 => "f4",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            FunctionId::Sinc | FunctionId::TwistedSigmoid => 1,
            _ => 2,
        }
    }

    /// Per-coordinate sampling interval.
    pub fn domain(self) -> (f64, f64) {
        match self {
            FunctionId::Sinc => (-1.5, 1.5),
            _ => (-3.0, 3.0),
        }
    }

    /// Conventional noise level: 0.025 for the curves, 0.05 for surfaces.
    pub fn default_noise(self) -> f64 {
        if self.dim() == 1 {
            0.025
        } else {
            0.05
        }
    }

    /// Noiseless function value.
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            FunctionId::Sinc => {
                let u = 5.0 * std::f64::consts::PI * x[0];
                if u == 0.0 {
                    -1.0
                } else {
                    -u.sin() / u
                }
            }
            FunctionId::TwistedSigmoid => 2.0 / (1.0 + (-3.0 * x[0]).exp()) - 0.8 * x[0],
            FunctionId::F1 => {
                let (a, b) = (x[0], x[1]);
                0.5 * a.powi(3) - 2.0 * a * b * b
                    + 3.0 * (4.0 * a).sin() * (2.0 * b).cos()
                    + 0.1 * (-(a * a + b * b)).exp()
            }
            FunctionId::F2 => {
                let (a, b) = (x[0], x[1]);
                (3.0 * a).sin() + (2.0 * b).cos() + 0.5 * (5.0 * a).sin() * (4.0 * b).cos()
            }
            FunctionId::F3 => {
                let (a, b) = (x[0], x[1]);
                let r = (a * a + b * b).sqrt() + 1e-6;
                (a * a - b * b) / (0.5 + r * r) + r.sin() * (-r).exp()
            }
            FunctionId::F4 => {
                let (a, b) = (x[0], x[1]);
                2.0 * (-((a - 1.0).powi(2) + (b - 1.0).powi(2)) / 0.5).exp()
                    - 3.0 * (-((a + 1.0).powi(2) + (b + 1.5).powi(2)) / 0.3).exp()
                    + 0.5 * a
            }
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        FunctionId::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| {
                format!("unknown function `{s}` (expected sinc, twisted_sigmoid, f1, f2, f3 or f4)")
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub function: FunctionId,
    pub n_samples: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(function: FunctionId, n_samples: usize, noise_sigma: f64, seed: u64) -> Self {
        SyntheticSpec {
            function,
            n_samples,
            noise_sigma,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.n_samples < 1 {
            return Err(DatasetError::InvalidSpec(
                "n_samples must be at least 1".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(DatasetError::InvalidSpec(
                "noise sigma must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Samples inputs uniformly over the function's box and adds i.i.d.
/// Gaussian noise to the exact values.
pub fn generate(spec: &SyntheticSpec) -> Result<DesignMatrix, DatasetError> {
    spec.validate()?;
    let f = spec.function;
    let d = f.dim();
    let (lo, hi) = f.domain();
    let mut rng = seed::rng(spec.seed);
    let noise =
        Normal::new(0.0, spec.noise_sigma).map_err(|e| DatasetError::InvalidSpec(e.to_string()))?;
    let mut m = DesignMatrix::with_capacity(d, spec.n_samples);
    let mut x = vec![0.0; d];
    for _ in 0..spec.n_samples {
        for xi in x.iter_mut() {
            *xi = lo + (hi - lo) * rng.random::<f64>();
        }
        let mut y = f.eval(&x);
        if spec.noise_sigma > 0.0 {
            y += noise.sample(&mut rng);
        }
        m.push(&x, y)?;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

/// Seeded shuffle, then the first `⌊fraction·N⌋` rows train and the rest test.
pub fn split(
    data: &DesignMatrix,
    spec: &SplitSpec,
) -> Result<(DesignMatrix, DesignMatrix), DatasetError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(DatasetError::InvalidSpec(format!(
            "train fraction {} is outside (0, 1)",
            spec.train_fraction
        )));
    }
    if data.len() < 2 {
        return Err(DatasetError::InvalidSpec(
            "splitting needs at least 2 rows".into(),
        ));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut seed::rng(spec.seed));
    let n_train = (spec.train_fraction * data.len() as f64).floor() as usize;
    Ok((
        data.subset(&order[..n_train]),
        data.subset(&order[n_train..]),
    ))
}

/// Which CSV column holds the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl FromStr for TargetColumn {
    type Err = std::convert::Infallible;

    /// A bare number is read as a zero-based index unless a header column
    /// carries that exact name; see [`CsvTable::resolve`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(TargetColumn::Name(s.to_string()))
    }
}

impl fmt::Display for TargetColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetColumn::Name(n) => f.write_str(n),
            TargetColumn::Index(i) => write!(f, "{i}"),
        }
    }
}

/// A rectangular numeric CSV document.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub names: Option<Vec<String>>,
    pub n_cols: usize,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    /// Parses comma-separated, `.`-decimal text. Cells are trimmed and blank
    /// lines skipped; row numbers in errors are 1-based file lines.
    pub fn parse(text: &str, header: bool) -> Result<CsvTable, DatasetError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(header)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let names = if header {
            let h = reader.headers().map_err(csv_error)?;
            (!h.is_empty()).then(|| h.iter().map(str::to_string).collect::<Vec<_>>())
        } else {
            None
        };
        let mut n_cols = names.as_ref().map(Vec::len);
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if n_cols.is_none() {
                n_cols = Some(record.len());
            }
            let row = record
                .iter()
                .enumerate()
                .map(|(c, cell)| match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(DatasetError::ParseError {
                        row: line,
                        col: c + 1,
                        value: cell.to_string(),
                    }),
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(CsvTable {
            names,
            n_cols: n_cols.unwrap_or(0),
            rows,
        })
    }

    /// Column index of the target: an exact header name first, then a
    /// zero-based index.
    pub fn resolve(&self, target: &TargetColumn) -> Result<usize, DatasetError> {
        let missing = || DatasetError::MissingTarget(target.to_string());
        match target {
            TargetColumn::Index(i) if *i < self.n_cols => Ok(*i),
            TargetColumn::Index(_) => Err(missing()),
            TargetColumn::Name(name) => {
                if let Some(pos) = self
                    .names
                    .as_ref()
                    .and_then(|ns| ns.iter().position(|n| n == name))
                {
                    return Ok(pos);
                }
                match name.parse::<usize>() {
                    Ok(i) if i < self.n_cols => Ok(i),
                    _ => Err(missing()),
                }
            }
        }
    }

    /// Features in column order excluding the target column.
    pub fn into_design(self, target: &TargetColumn) -> Result<DesignMatrix, DatasetError> {
        let t = self.resolve(target)?;
        if self.rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut m = DesignMatrix::with_capacity(self.n_cols - 1, self.rows.len());
        let mut x = Vec::with_capacity(self.n_cols - 1);
        for row in &self.rows {
            x.clear();
            x.extend(
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != t)
                    .map(|(_, v)| *v),
            );
            m.push(&x, row[t])?;
        }
        Ok(m)
    }

    /// All columns except an optional one to drop, as features with zero
    /// targets.
    pub fn into_features(self, drop: Option<&TargetColumn>) -> Result<DesignMatrix, DatasetError> {
        let skip = drop.map(|t| self.resolve(t)).transpose()?;
        if self.rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        let d = self.n_cols - usize::from(skip.is_some());
        let mut m = DesignMatrix::with_capacity(d, self.rows.len());
        let mut x = Vec::with_capacity(d);
        for row in &self.rows {
            x.clear();
            x.extend(
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| Some(*c) != skip)
                    .map(|(_, v)| *v),
            );
            m.push(&x, 0.0)?;
        }
        Ok(m)
    }
}

fn csv_error(e: csv::Error) -> DatasetError {
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            pos,
            expected_len,
            len,
        } => DatasetError::RaggedRows {
            row: pos.as_ref().map_or(0, |p| p.line() as usize),
            expected: *expected_len as usize,
            found: *len as usize,
        },
        csv::ErrorKind::Io(err) => DatasetError::Io(err.to_string()),
        _ => DatasetError::Io(e.to_string()),
    }
}

/// Reads a CSV file into features + target.
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &TargetColumn,
    header: bool,
) -> Result<DesignMatrix, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    CsvTable::parse(&text, header)?.into_design(target)
}

/// Writes `x1,…,xd,y` with a header line. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(data: &DesignMatrix, mut out: W) -> io::Result<()> {
    let mut header: Vec<String> = (1..=data.dim()).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    writeln!(out, "{}", header.join(","))?;
    for (j, y) in data.targets().iter().enumerate() {
        for v in data.features(j) {
            write!(out, "{v},")?;
        }
        writeln!(out, "{y}")?;
    }
    Ok(())
}
