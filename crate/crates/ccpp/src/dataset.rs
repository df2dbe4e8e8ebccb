//! Loading, validation, summary statistics, splitting, and outlier cleaning
//! for the plant measurement table.
//!
//! A [`Dataset`] is immutable once built: splitting and cleaning return new
//! values instead of mutating, so shared references are always safe to read.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

/// How a column participates in modelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Input,
    Target,
    Unused,
}

/// Name, role, and physical unit of one column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: Role,
    pub unit: String,
}

impl ColumnSpec {
    pub fn new(name: &str, role: Role, unit: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            role,
            unit: unit.to_string(),
        }
    }
}

/// Which subset a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Training,
    Selection,
    Testing,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitTag::Training => write!(f, "training"),
            SplitTag::Selection => write!(f, "selection"),
            SplitTag::Testing => write!(f, "testing"),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("empty file")]
    EmptyFile,
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("missing value at row {row}, column {col}")]
    MissingValue { row: usize, col: String },
    #[error("cannot parse {value:?} at row {row}, column {col}")]
    ParseError { row: usize, col: String, value: String },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("split ratios must be positive and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("cleaning parameter must lie in [1, 10], got {0}")]
    BadCleaningParameter(f64),
    #[error("column {0:?} has zero deviation but non-constant values")]
    ZeroDeviation(String),
    #[error("bin count must be at least 1")]
    BadBinCount,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Minimum, maximum, mean, and population standard deviation of a column.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ColumnStats {
    pub minimum: f64,
    pub maximum: f64,
    pub mean: f64,
    pub deviation: f64,
}

/// Equal-width frequency histogram; frequencies are percentages of row count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_centers: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub bin_count: usize,
}

/// Column-labelled numeric table with a per-row split assignment.
///
/// Rows are stored row-major in one flat buffer.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<ColumnSpec>,
    values: Vec<f64>,
    split: Vec<SplitTag>,
}

impl Dataset {
    /// Builds a dataset from row-major values; every row starts as training.
    pub fn from_rows(columns: Vec<ColumnSpec>, rows: Vec<Vec<f64>>) -> Self {
        let ncols = columns.len();
        let mut values = Vec::with_capacity(rows.len() * ncols);
        for row in &rows {
            assert_eq!(row.len(), ncols, "row width must match column count");
            values.extend_from_slice(row);
        }
        let split = vec![SplitTag::Training; rows.len()];
        Dataset { columns, values, split }
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.split.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.columns.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.columns.len();
        &self.values[row * w..(row + 1) * w]
    }

    pub fn split_tags(&self) -> &[SplitTag] {
        &self.split
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DatasetError> {
        self.columns
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| DatasetError::UnknownColumn(name.to_string()))
    }

    pub fn column_values(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.value(r, col)).collect()
    }

    /// Indices of input columns, in schema order.
    pub fn input_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == Role::Input)
            .map(|(i, _)| i)
            .collect()
    }

    /// Index of the target column, if exactly one is declared.
    pub fn target_index(&self) -> Option<usize> {
        let mut targets = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == Role::Target);
        match (targets.next(), targets.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// Row indices carrying the given split tag.
    pub fn rows_in(&self, tag: SplitTag) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.split[r] == tag).collect()
    }

    /// (inputs, target) pairs for the rows with the given split tag.
    pub fn samples_in(&self, tag: SplitTag) -> Vec<(Vec<f64>, f64)> {
        let inputs = self.input_indices();
        let target = self.target_index().expect("dataset has no target column");
        self.rows_in(tag)
            .into_iter()
            .map(|r| {
                let x = inputs.iter().map(|&c| self.value(r, c)).collect();
                (x, self.value(r, target))
            })
            .collect()
    }

    /// Per-input (min, max) over training rows, used as the default search box.
    pub fn training_ranges(&self) -> Vec<(f64, f64)> {
        let inputs = self.input_indices();
        let rows = self.rows_in(SplitTag::Training);
        inputs
            .iter()
            .map(|&c| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &r in &rows {
                    let v = self.value(r, c);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (lo, hi)
            })
            .collect()
    }
}

/// Reads a comma-separated file against the given schema.
///
/// The header must match the schema names case-insensitively and in order.
/// Every cell must parse as a finite number; all rows are tagged training.
pub fn load_csv(path: &Path, schema: &[ColumnSpec]) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true) // width errors surface as MissingValue, not csv errors
        .from_path(path)?;

    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(DatasetError::EmptyFile);
    }
    let expected: Vec<String> = schema.iter().map(|c| c.name.clone()).collect();
    let matches = header.len() == expected.len()
        && header
            .iter()
            .zip(&expected)
            .all(|(h, e)| h.eq_ignore_ascii_case(e));
    if !matches {
        return Err(DatasetError::HeaderMismatch { expected, found: header });
    }

    let ncols = schema.len();
    let mut values = Vec::new();
    let mut n_rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1; // 1-based data row, header excluded
        if record.len() != ncols {
            let col = schema
                .get(record.len().min(ncols.saturating_sub(1)))
                .map(|c| c.name.clone())
                .unwrap_or_default();
            return Err(DatasetError::MissingValue { row, col });
        }
        for (j, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(DatasetError::MissingValue { row, col: schema[j].name.clone() });
            }
            let v: f64 = cell.parse().map_err(|_| DatasetError::ParseError {
                row,
                col: schema[j].name.clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DatasetError::ParseError {
                    row,
                    col: schema[j].name.clone(),
                    value: cell.to_string(),
                });
            }
            values.push(v);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(DatasetError::EmptyFile);
    }
    let split = vec![SplitTag::Training; n_rows];
    Ok(Dataset { columns: schema.to_vec(), values, split })
}

/// Writes the table back out; numbers use the shortest representation that
/// round-trips, so reload reproduces every cell bit-exactly.
pub fn save_csv(ds: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(ds.columns.iter().map(|c| c.name.as_str()))?;
    for r in 0..ds.n_rows() {
        let fields: Vec<String> = ds.row(r).iter().map(|v| format!("{v}")).collect();
        writer.write_record(&fields)?;
    }
    writer.flush()?;
    Ok(())
}

/// Minimum, maximum, mean, and population deviation over all rows.
pub fn compute_stats(ds: &Dataset, column: &str) -> Result<ColumnStats, DatasetError> {
    let col = ds.column_index(column)?;
    Ok(stats_of(&ds.column_values(col)))
}

pub(crate) fn stats_of(values: &[f64]) -> ColumnStats {
    let n = values.len() as f64;
    let mut minimum = f64::INFINITY;
    let mut maximum = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        minimum = minimum.min(v);
        maximum = maximum.max(v);
        sum += v;
    }
    let mean = sum / n;
    let ss: f64 = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    ColumnStats { minimum, maximum, mean, deviation: (ss / n).sqrt() }
}

/// Median of a column; the default operating-point baseline is built from these.
pub fn column_median(ds: &Dataset, column: &str) -> Result<f64, DatasetError> {
    let col = ds.column_index(column)?;
    let mut v = ds.column_values(col);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Randomly partitions rows into training/selection/testing.
///
/// Selection and testing get `floor(n * ratio)` rows each; the remainder goes
/// to training. Identical seeds produce identical assignments.
pub fn split_random(
    ds: &Dataset,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<Dataset, DatasetError> {
    let (tr, sel, te) = ratios;
    let bad = [tr, sel, te];
    if tr <= 0.0 || sel <= 0.0 || te <= 0.0 || (tr + sel + te - 1.0).abs() > 1e-9 {
        return Err(DatasetError::BadRatios(bad));
    }
    let n = ds.n_rows();
    let n_sel = (n as f64 * sel).floor() as usize;
    let n_te = (n as f64 * te).floor() as usize;
    let n_tr = n - n_sel - n_te;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut order);

    let mut split = vec![SplitTag::Training; n];
    for &row in order.iter().skip(n_tr).take(n_sel) {
        split[row] = SplitTag::Selection;
    }
    for &row in order.iter().skip(n_tr + n_sel) {
        split[row] = SplitTag::Testing;
    }
    Ok(Dataset { columns: ds.columns.clone(), values: ds.values.clone(), split })
}

/// Removes rows whose z-score exceeds the cleaning parameter in any input or
/// target column. Statistics are computed once over the full dataset before
/// any removal; removed indices come back in ascending order.
pub fn clean_outliers(
    ds: &Dataset,
    cleaning_parameter: f64,
) -> Result<(Dataset, Vec<usize>), DatasetError> {
    if !(1.0..=10.0).contains(&cleaning_parameter) {
        return Err(DatasetError::BadCleaningParameter(cleaning_parameter));
    }
    let checked: Vec<usize> = ds
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.role != Role::Unused)
        .map(|(i, _)| i)
        .collect();
    let stats: Vec<ColumnStats> = checked
        .iter()
        .map(|&c| stats_of(&ds.column_values(c)))
        .collect();
    for (&c, s) in checked.iter().zip(&stats) {
        if s.deviation == 0.0 {
            // constant column: every z is defined as 0, nothing to flag,
            // unless the values somehow disagree with the mean
            let col = &ds.columns[c];
            if ds.column_values(c).iter().any(|&v| v != s.mean) {
                return Err(DatasetError::ZeroDeviation(col.name.clone()));
            }
        }
    }

    let mut removed = Vec::new();
    let mut kept_rows = Vec::new();
    for r in 0..ds.n_rows() {
        let outlier = checked.iter().zip(&stats).any(|(&c, s)| {
            if s.deviation == 0.0 {
                false
            } else {
                ((ds.value(r, c) - s.mean) / s.deviation).abs() > cleaning_parameter
            }
        });
        if outlier {
            removed.push(r);
        } else {
            kept_rows.push(r);
        }
    }

    let w = ds.n_cols();
    let mut values = Vec::with_capacity(kept_rows.len() * w);
    let mut split = Vec::with_capacity(kept_rows.len());
    for &r in &kept_rows {
        values.extend_from_slice(ds.row(r));
        split.push(ds.split[r]);
    }
    Ok((Dataset { columns: ds.columns.clone(), values, split }, removed))
}

/// Equal-width histogram over [min, max]; a value equal to the maximum falls
/// in the last bin. A constant column collapses to a single bin at 100%.
pub fn histogram(ds: &Dataset, column: &str, bin_count: usize) -> Result<Histogram, DatasetError> {
    if bin_count < 1 {
        return Err(DatasetError::BadBinCount);
    }
    let col = ds.column_index(column)?;
    let values = ds.column_values(col);
    let s = stats_of(&values);
    if s.minimum == s.maximum {
        return Ok(Histogram {
            bin_centers: vec![s.minimum],
            frequencies: vec![100.0],
            bin_count: 1,
        });
    }
    let width = (s.maximum - s.minimum) / bin_count as f64;
    let mut counts = vec![0usize; bin_count];
    for &v in &values {
        let mut idx = ((v - s.minimum) / width) as usize;
        if idx >= bin_count {
            idx = bin_count - 1;
        }
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    Ok(Histogram {
        bin_centers: (0..bin_count)
            .map(|i| s.minimum + (i as f64 + 0.5) * width)
            .collect(),
        frequencies: counts.iter().map(|&c| 100.0 * c as f64 / n).collect(),
        bin_count,
    })
}

/// Schema of the reference file: four ambient inputs and the energy target.
pub fn ccpp_schema() -> Vec<ColumnSpec> {
    vec![
        ColumnSpec::new("AT", Role::Input, "°C"),
        ColumnSpec::new("V", Role::Input, "cm Hg"),
        ColumnSpec::new("AP", Role::Input, "mbar"),
        ColumnSpec::new("RH", Role::Input, "%"),
        ColumnSpec::new("PE", Role::Target, "MW"),
    ]
}

/// Long display names for the reference schema, in column order.
pub const CCPP_LABELS: [&str; 5] = [
    "Temperature",
    "Exhaust Vacuum",
    "Ambient Pressure",
    "Relative Humidity",
    "Energy Output",
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write;

    fn toy(cols: &[&str], rows: Vec<Vec<f64>>) -> Dataset {
        let columns = cols
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let role = if i + 1 == cols.len() { Role::Target } else { Role::Input };
                ColumnSpec::new(n, role, "")
            })
            .collect();
        Dataset::from_rows(columns, rows)
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_smallest_valid_table() {
        let f = write_csv("AT,V,AP,RH,PE\n1,2,3,4,5\n");
        let ds = load_csv(f.path(), &ccpp_schema()).unwrap();
        assert_eq!(ds.n_rows(), 1);
        assert_eq!(ds.n_cols(), 5);
        assert_eq!(ds.value(0, 4), 5.0);
        assert!(ds.split_tags().iter().all(|&t| t == SplitTag::Training));
    }

    #[test]
    fn load_rejects_empty_cell() {
        let f = write_csv("AT,V,AP,RH,PE\n1,,3,4,5\n");
        match load_csv(f.path(), &ccpp_schema()) {
            Err(DatasetError::MissingValue { row: 1, col }) => assert_eq!(col, "V"),
            other => panic!("expected MissingValue, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_short_row() {
        let f = write_csv("AT,V,AP,RH,PE\n1,2,3,4\n");
        assert!(matches!(
            load_csv(f.path(), &ccpp_schema()),
            Err(DatasetError::MissingValue { row: 1, .. })
        ));
    }

    #[test]
    fn load_rejects_bad_number_and_nonfinite() {
        let f = write_csv("AT,V,AP,RH,PE\n1,x,3,4,5\n");
        assert!(matches!(
            load_csv(f.path(), &ccpp_schema()),
            Err(DatasetError::ParseError { row: 1, .. })
        ));
        let f = write_csv("AT,V,AP,RH,PE\n1,inf,3,4,5\n");
        assert!(matches!(
            load_csv(f.path(), &ccpp_schema()),
            Err(DatasetError::ParseError { .. })
        ));
    }

    #[test]
    fn load_rejects_header_mismatch_and_empty_file() {
        let f = write_csv("AT,V,AP,XX,PE\n1,2,3,4,5\n");
        assert!(matches!(
            load_csv(f.path(), &ccpp_schema()),
            Err(DatasetError::HeaderMismatch { .. })
        ));
        let f = write_csv("AT,V,AP,RH,PE\n");
        assert!(matches!(load_csv(f.path(), &ccpp_schema()), Err(DatasetError::EmptyFile)));
    }

    #[test]
    fn header_match_is_case_insensitive() {
        let f = write_csv("at,v,ap,rh,pe\n1,2,3,4,5\n");
        assert!(load_csv(f.path(), &ccpp_schema()).is_ok());
    }

    #[test]
    fn stats_constant_and_simple_columns() {
        let ds = toy(&["a", "b"], vec![vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]]);
        let s = compute_stats(&ds, "a").unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.deviation, 0.0);
        let s = compute_stats(&ds, "b").unwrap();
        assert_eq!(s.mean, 2.0);
        // population deviation of [1,2,3] is sqrt(2/3)
        assert_abs_diff_eq!(s.deviation, (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert!(matches!(compute_stats(&ds, "zzz"), Err(DatasetError::UnknownColumn(_))));
    }

    #[test]
    fn stats_idempotent_bitwise() {
        let ds = toy(&["a", "b"], vec![vec![0.1, 3.7], vec![2.9, -1.2], vec![7.3, 0.0]]);
        let s1 = compute_stats(&ds, "a").unwrap();
        let s2 = compute_stats(&ds, "a").unwrap();
        assert_eq!(s1.mean.to_bits(), s2.mean.to_bits());
        assert_eq!(s1.deviation.to_bits(), s2.deviation.to_bits());
    }

    #[test]
    fn split_counts_use_floor_with_remainder_to_training() {
        let rows: Vec<Vec<f64>> = (0..9568).map(|i| vec![i as f64, 0.5]).collect();
        let ds = toy(&["a", "b"], rows);
        let ds = split_random(&ds, (0.6, 0.2, 0.2), 1).unwrap();
        assert_eq!(ds.rows_in(SplitTag::Training).len(), 5742);
        assert_eq!(ds.rows_in(SplitTag::Selection).len(), 1913);
        assert_eq!(ds.rows_in(SplitTag::Testing).len(), 1913);
    }

    #[test]
    fn split_rejects_zero_ratio() {
        let ds = toy(&["a", "b"], (0..10).map(|i| vec![i as f64, 1.0]).collect());
        assert!(matches!(
            split_random(&ds, (1.0, 0.0, 0.0), 1),
            Err(DatasetError::BadRatios(_))
        ));
    }

    #[test]
    fn split_deterministic_per_seed() {
        let ds = toy(&["a", "b"], (0..101).map(|i| vec![i as f64, 1.0]).collect());
        let a = split_random(&ds, (0.6, 0.2, 0.2), 42).unwrap();
        let b = split_random(&ds, (0.6, 0.2, 0.2), 42).unwrap();
        assert_eq!(a.split_tags(), b.split_tags());
        let c = split_random(&ds, (0.6, 0.2, 0.2), 43).unwrap();
        assert_ne!(a.split_tags(), c.split_tags());
    }

    #[test]
    fn clean_removes_z_above_parameter() {
        // column "a": mean 0, sd 1 by construction around the flagged value
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for _ in 0..50 {
            rows.push(vec![1.0, 0.0]);
            rows.push(vec![-1.0, 0.0]);
        }
        rows.push(vec![3.2, 0.0]); // z ~ 3.16 > 3
        let ds = toy(&["a", "b"], rows);
        let (cleaned, removed) = clean_outliers(&ds, 3.0).unwrap();
        assert_eq!(removed, vec![100]);
        assert_eq!(cleaned.n_rows(), 100);
    }

    #[test]
    fn clean_keeps_rows_at_their_column_means() {
        let ds = toy(&["a", "b"], vec![vec![2.0, 7.0], vec![2.0, 7.0]]);
        let (cleaned, removed) = clean_outliers(&ds, 3.0).unwrap();
        assert!(removed.is_empty());
        assert_eq!(cleaned.n_rows(), 2);
    }

    #[test]
    fn clean_rejects_out_of_range_parameter() {
        let ds = toy(&["a", "b"], vec![vec![1.0, 2.0]]);
        assert!(matches!(clean_outliers(&ds, 0.5), Err(DatasetError::BadCleaningParameter(_))));
        assert!(matches!(clean_outliers(&ds, 11.0), Err(DatasetError::BadCleaningParameter(_))));
    }

    #[test]
    fn clean_monotone_in_parameter() {
        let mut rng = Rng::new(9);
        let rows: Vec<Vec<f64>> = (0..400)
            .map(|_| vec![rng.normal_pair().0 * 2.0, rng.normal_pair().0])
            .collect();
        let ds = toy(&["a", "b"], rows);
        let (_, r1) = clean_outliers(&ds, 1.5).unwrap();
        let (_, r2) = clean_outliers(&ds, 2.5).unwrap();
        assert!(r2.iter().all(|i| r1.contains(i)), "removed(p2) must be subset of removed(p1)");
        let mut sorted = r1.clone();
        sorted.sort_unstable();
        assert_eq!(r1, sorted);
    }

    #[test]
    fn histogram_symmetric_two_bins() {
        let ds = toy(&["a", "b"], vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]]);
        let h = histogram(&ds, "a", 2).unwrap();
        assert_eq!(h.bin_centers, vec![0.75, 2.25]);
        assert_eq!(h.frequencies, vec![50.0, 50.0]);
    }

    #[test]
    fn histogram_constant_column_single_bin() {
        let ds = toy(&["a", "b"], vec![vec![4.0, 0.0]; 7]);
        let h = histogram(&ds, "a", 12).unwrap();
        assert_eq!(h.bin_count, 1);
        assert_eq!(h.bin_centers, vec![4.0]);
        assert_eq!(h.frequencies, vec![100.0]);
    }

    #[test]
    fn histogram_max_value_falls_in_last_bin() {
        let ds = toy(&["a", "b"], vec![vec![0.0, 0.0], vec![10.0, 0.0]]);
        let h = histogram(&ds, "a", 5).unwrap();
        assert_eq!(*h.frequencies.last().unwrap(), 50.0);
        assert!(matches!(histogram(&ds, "a", 0), Err(DatasetError::BadBinCount)));
    }

    #[test]
    fn median_even_and_odd() {
        let ds = toy(&["a", "b"], vec![vec![3.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert_eq!(column_median(&ds, "a").unwrap(), 2.0);
        let ds = toy(&["a", "b"], vec![vec![4.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]]);
        assert_eq!(column_median(&ds, "a").unwrap(), 2.5);
    }

    #[test]
    fn save_load_round_trip_bit_exact() {
        let mut rng = Rng::new(31);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.normal_pair().0 * 1e3, rng.uniform() * 1e-7, rng.normal_pair().1])
            .collect();
        let ds = toy(&["a", "b", "c"], rows);
        let f = tempfile::NamedTempFile::new().unwrap();
        save_csv(&ds, f.path()).unwrap();
        let schema: Vec<ColumnSpec> = ds.columns().to_vec();
        let re = load_csv(f.path(), &schema).unwrap();
        assert_eq!(re.n_rows(), ds.n_rows());
        for r in 0..ds.n_rows() {
            for c in 0..ds.n_cols() {
                assert_eq!(re.value(r, c).to_bits(), ds.value(r, c).to_bits());
            }
        }
    }
}
