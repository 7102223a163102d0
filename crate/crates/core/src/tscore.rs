//! Time-series containers, CSV ingestion, transforms, descriptive statistics
//! and correlation tests.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// A named series observed on strictly increasing integer periods (years).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    index: Vec<i64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, index: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if index.len() != values.len() {
            return Err(Error::Length(format!(
                "series {name}: index has {} periods but {} values",
                index.len(),
                values.len()
            )));
        }
        check_index(&index)?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos + 1,
                col: 0,
                msg: format!("series {name}: non-finite value at period {}", index[pos]),
            });
        }
        Ok(TimeSeries {
            name,
            index,
            values,
        })
    }

    /// Series indexed 1..=n.
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let index = (1..=values.len() as i64).collect();
        Self::new(name, index, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> &[i64] {
        &self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same index, new values (length must match).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.index.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

fn check_index(index: &[i64]) -> Result<()> {
    for w in index.windows(2) {
        if w[1] == w[0] {
            return Err(Error::Index(format!("duplicate period {}", w[0])));
        }
        if w[1] < w[0] {
            return Err(Error::Index(format!(
                "periods not increasing: {} follows {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// Ordered collection of series sharing one index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    columns: Vec<TimeSeries>,
}

impl Dataset {
    pub fn new(columns: Vec<TimeSeries>) -> Result<Self> {
        let first = columns
            .first()
            .ok_or_else(|| Error::Length("dataset has no columns".into()))?;
        if first.len() < 2 {
            return Err(Error::Length(format!(
                "dataset needs at least 2 observations, got {}",
                first.len()
            )));
        }
        for c in &columns[1..] {
            if c.index != first.index {
                return Err(Error::Index(format!(
                    "column {} does not share the index of column {}",
                    c.name, first.name
                )));
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::Config(format!("duplicate column name {}", c.name)));
            }
        }
        Ok(Dataset { columns })
    }

    /// Build from a T×K matrix with the given column names, indexed from `start`.
    pub fn from_matrix(names: &[String], data: &Mat, start: i64) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::Length(format!(
                "{} names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        let index: Vec<i64> = (0..data.nrows() as i64).map(|i| start + i).collect();
        let cols = names
            .iter()
            .enumerate()
            .map(|(j, n)| TimeSeries::new(n.clone(), index.clone(), data.column(j).iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(cols)
    }

    pub fn columns(&self) -> &[TimeSeries] {
        &self.columns
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index(&self) -> &[i64] {
        &self.columns[0].index
    }

    /// Number of observations T.
    pub fn nobs(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, name: &str) -> Result<&TimeSeries> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Config(format!("no column named {name}")))
    }

    /// T×k matrix of the named columns, in the order given.
    pub fn matrix(&self, names: &[String]) -> Result<Mat> {
        let cols = names
            .iter()
            .map(|n| self.column(n).map(|c| c.values()))
            .collect::<Result<Vec<_>>>()?;
        Ok(crate::linalg::from_columns(&cols))
    }

    /// T×K matrix of every column.
    pub fn to_matrix(&self) -> Mat {
        let cols: Vec<&[f64]> = self.columns.iter().map(|c| c.values()).collect();
        crate::linalg::from_columns(&cols)
    }

    pub fn select(&self, names: &[String]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| self.column(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(cols)
    }

    /// Write the dataset as CSV with the given index column name.
    pub fn to_csv(&self, index_col: &str) -> String {
        let mut out = String::new();
        out.push_str(index_col);
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for (i, year) in self.index().iter().enumerate() {
            out.push_str(&year.to_string());
            for c in &self.columns {
                out.push(',');
                out.push_str(&format!("{:.17e}", c.values[i]));
            }
            out.push('\n');
        }
        out
    }
}

const MISSING_MARKERS: [&str; 5] = ["", "NA", "NaN", "nan", "."];

/// Load a dataset from a CSV file with a header row and an integer index column.
pub fn load_csv(path: impl AsRef<Path>, index_col: &str) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, index_col)
}

/// Parse CSV text from any reader. Rows and columns in errors are 1-based, the
/// header being row 1.
pub fn read_csv(reader: impl Read, index_col: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let idx_pos = headers
        .iter()
        .position(|h| h == index_col)
        .ok_or_else(|| Error::Parse {
            row: 1,
            col: 0,
            msg: format!("index column {index_col} not in header"),
        })?;
    let mut index = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = r + 2;
        for (c, cell) in rec.iter().enumerate() {
            if c == idx_pos {
                let year = cell.parse::<i64>().map_err(|_| Error::Parse {
                    row,
                    col: c + 1,
                    msg: format!("index value {cell:?} is not an integer"),
                })?;
                index.push(year);
            } else if MISSING_MARKERS.contains(&cell) {
                return Err(Error::Parse {
                    row,
                    col: c + 1,
                    msg: format!("missing value in column {}", headers[c]),
                });
            } else {
                let v = cell.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    col: c + 1,
                    msg: format!("non-numeric cell {cell:?} in column {}", headers[c]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        col: c + 1,
                        msg: format!("non-finite cell {cell:?}"),
                    });
                }
                cols[c].push(v);
            }
        }
    }
    check_index(&index)?;
    let series = headers
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != idx_pos)
        .map(|(c, h)| TimeSeries::new(h.clone(), index.clone(), std::mem::take(&mut cols[c])))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(series)
}

fn csv_err(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            row,
            col: *len as usize,
            msg: format!("ragged row: expected {expected_len} fields, found {len}"),
        },
        _ => Error::Parse {
            row,
            col: 0,
            msg: e.to_string(),
        },
    }
}

/// `order`-th difference; the first `order` periods are dropped.
pub fn difference(s: &TimeSeries, order: usize) -> Result<TimeSeries> {
    if order == 0 {
        return Err(Error::Domain("difference order must be positive".into()));
    }
    if order >= s.len() {
        return Err(Error::Length(format!(
            "difference order {order} needs more than {} observations",
            s.len()
        )));
    }
    let mut v = s.values.clone();
    for _ in 0..order {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    TimeSeries::new(s.name.clone(), s.index[order..].to_vec(), v)
}

/// Descriptive statistics in the layout of a standard summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub nobs: usize,
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
    pub skewness: f64,
    /// Non-excess kurtosis (3 for a normal distribution).
    pub kurtosis: f64,
    pub jarque_bera: f64,
    pub jb_pvalue: f64,
}

/// Jarque-Bera statistic and its chi-square(2) p-value.
pub fn jarque_bera(nobs: usize, skewness: f64, kurtosis: f64) -> (f64, f64) {
    let jb = nobs as f64 / 6.0 * (skewness * skewness + (kurtosis - 3.0).powi(2) / 4.0);
    (jb, dist::chi2_sf(jb, 2.0))
}

/// Moments use the divide-by-T convention for skewness and kurtosis; the
/// standard deviation is the usual T−1 sample value.
pub fn describe(s: &TimeSeries) -> Result<StatsSummary> {
    let n = s.len();
    if n < 4 {
        return Err(Error::Length(format!("describe needs at least 4 observations, got {n}")));
    }
    let nf = n as f64;
    let mean = s.values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in &s.values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= f64::EPSILON * mean.abs().max(1.0) * 1e-8 || m2 == 0.0 {
        return Err(Error::Degenerate(format!("series {} has zero variance", s.name)));
    }
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    let (jarque_bera, jb_pvalue) = jarque_bera(n, skewness, kurtosis);
    Ok(StatsSummary {
        nobs: n,
        mean,
        median: median(&s.values),
        stddev: (m2 * nf / (nf - 1.0)).sqrt(),
        skewness,
        kurtosis,
        jarque_bera,
        jb_pvalue,
    })
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrTest {
    pub r: f64,
    pub pvalue: f64,
    pub nobs: usize,
}

/// Two-sided p-value of a Pearson correlation `r` over `nobs` observations,
/// using the t statistic with `nobs − 2` degrees of freedom.
pub fn corr_pvalue(r: f64, nobs: usize) -> f64 {
    let df = nobs as f64 - 2.0;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    dist::t_two_sided(t, df)
}

pub fn pearson_corr_test(x: &TimeSeries, y: &TimeSeries) -> Result<CorrTest> {
    if x.index != y.index {
        return Err(Error::Index(format!(
            "series {} and {} do not share an index",
            x.name, y.name
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Length(format!("correlation needs at least 3 observations, got {n}")));
    }
    let r = pearson(x.values(), y.values())
        .ok_or_else(|| Error::Degenerate(format!("{} or {} is constant", x.name, y.name)))?;
    Ok(CorrTest {
        r,
        pvalue: corr_pvalue(r, n),
        nobs: n,
    })
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise correlation tests for every column pair of a dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub names: Vec<String>,
    /// Row-major K×K; diagonal entries are r = 1, p = 0.
    pub cells: Vec<Vec<CorrTest>>,
    /// Sample covariances (T−1 denominator).
    pub covariance: Vec<Vec<f64>>,
}

pub fn correlation_table(ds: &Dataset) -> Result<CorrelationTable> {
    let k = ds.columns.len();
    let n = ds.nobs();
    let mut cells = vec![
        vec![
            CorrTest {
                r: 1.0,
                pvalue: 0.0,
                nobs: n
            };
            k
        ];
        k
    ];
    for i in 0..k {
        for j in 0..i {
            let c = pearson_corr_test(&ds.columns[i], &ds.columns[j])?;
            cells[i][j] = c;
            cells[j][i] = c;
        }
    }
    let means: Vec<f64> = ds
        .columns
        .iter()
        .map(|c| c.values.iter().sum::<f64>() / n as f64)
        .collect();
    let covariance = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    ds.columns[i]
                        .values
                        .iter()
                        .zip(&ds.columns[j].values)
                        .map(|(a, b)| (a - means[i]) * (b - means[j]))
                        .sum::<f64>()
                        / (n as f64 - 1.0)
                })
                .collect()
        })
        .collect();
    Ok(CorrelationTable {
        names: ds.names(),
        cells,
        covariance,
    })
}

impl CorrelationTable {
    /// Lower triangle "r (p)", upper triangle covariances, matching the usual
    /// correlation/covariance appendix layout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, n) in self.names.iter().enumerate() {
            out.push_str(n);
            for j in 0..self.names.len() {
                out.push(',');
                if i == j {
                    out.push('1');
                } else if j < i {
                    let c = self.cells[i][j];
                    out.push_str(&format!("{:.4} ({:.4})", c.r, c.pvalue));
                } else {
                    out.push_str(&format!("{:.6}", self.covariance[i][j]));
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn stats_table_csv(rows: &[(String, StatsSummary)]) -> String {
    let mut out = String::from("statistic");
    for (n, _) in rows {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    let fields: [(&str, fn(&StatsSummary) -> String); 7] = [
        ("Mean", |s| format!("{:.5}", s.mean)),
        ("Median", |s| format!("{:.5}", s.median)),
        ("Std. Dev.", |s| format!("{:.5}", s.stddev)),
        ("Skewness", |s| format!("{:.5}", s.skewness)),
        ("Kurtosis", |s| format!("{:.5}", s.kurtosis)),
        ("Jarque-Bera (Probability)", |s| {
            format!("{:.5} ({:.5})", s.jarque_bera, s.jb_pvalue)
        }),
        ("Observations", |s| s.nobs.to_string()),
    ];
    for (label, f) in fields {
        out.push_str(label);
        for (_, s) in rows {
            out.push(',');
            out.push_str(&f(s));
        }
        out.push('\n');
    }
    out
}
