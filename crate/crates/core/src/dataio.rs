//! CSV ingestion, seeded shuffling and standardisation.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{DataPoint, Dataset, Task};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::scalar::Scalar;
use crate::verify::SyntheticStream;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    /// Defaults to the last column.
    #[serde(default)]
    pub label: Option<LabelColumn>,
    pub task: Task,
    /// Source values mapped to `-1` and `+1`, in that order. Without it the
    /// two distinct labels are sorted (numerically when possible) and the
    /// smaller one becomes `-1`.
    #[serde(default)]
    pub label_map: Option<(String, String)>,
    #[serde(default = "yes")]
    pub standardize: bool,
    /// Also standardise the target of a regression task.
    #[serde(default = "yes")]
    pub standardize_target: bool,
    /// `None` keeps the file order.
    #[serde(default)]
    pub shuffle_seed: Option<u64>,
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>, task: Task) -> Self {
        Self {
            path: path.into(),
            label: None,
            task,
            label_map: None,
            standardize: true,
            standardize_target: true,
            shuffle_seed: None,
        }
    }

    /// Verbatim load: no shuffling, no standardisation.
    pub fn raw(path: impl Into<PathBuf>, task: Task) -> Self {
        Self {
            standardize: false,
            standardize_target: false,
            ..Self::new(path, task)
        }
    }
}

/// Parsed table before any label handling.
struct Table {
    header: Option<Vec<String>>,
    rows: Vec<Vec<String>>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv {
            row: e.position().map_or(i + 1, |p| p.record() as usize + 1),
            column: 0,
            reason: e.to_string(),
        })?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    // The first row is a header when it is entirely non-numeric or has text
    // where the second row has a number. Textual labels stay data.
    let numeric = |c: &String| c.parse::<f64>().is_ok();
    let is_header = match rows.get(1) {
        Some(next) => rows[0].iter().zip(next).any(|(a, b)| !numeric(a) && numeric(b)),
        None => false,
    } || rows[0].iter().all(|c| !numeric(c));
    let header = if is_header {
        Some(rows.remove(0))
    } else {
        None
    };
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Table { header, rows })
}

fn label_index(table: &Table, label: &Option<LabelColumn>) -> Result<usize> {
    let width = table.rows[0].len();
    match label {
        None => Ok(width - 1),
        Some(LabelColumn::Index(i)) if *i < width => Ok(*i),
        Some(LabelColumn::Index(i)) => Err(Error::InvalidData(format!("label column {i} out of range"))),
        Some(LabelColumn::Name(n)) => table
            .header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == n))
            .ok_or_else(|| Error::InvalidData(format!("label column `{n}` not found"))),
    }
}

fn parse_cell<T: Scalar>(cell: &str, row: usize, column: usize) -> Result<T> {
    let v: f64 = cell.parse().map_err(|_| Error::Csv {
        row,
        column,
        reason: format!("non-numeric cell `{cell}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Csv {
            row,
            column,
            reason: format!("non-finite cell `{cell}`"),
        });
    }
    T::from_f64(v).ok_or_else(|| Error::Csv {
        row,
        column,
        reason: format!("`{cell}` does not fit the scalar type"),
    })
}

fn classification_map(labels: &[&str], map: &Option<(String, String)>) -> Result<(String, String)> {
    if let Some((neg, pos)) = map {
        return Ok((neg.clone(), pos.clone()));
    }
    let mut distinct: Vec<&str> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    // merge spellings of the same number such as `1` and `1.0`
    let numeric: Option<Vec<f64>> = distinct.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(mut vals) = numeric {
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        vals.dedup();
        if vals.len() != 2 {
            return Err(Error::InvalidData(format!(
                "classification needs exactly two label values, found {}",
                vals.len()
            )));
        }
        return Ok((vals[0].to_string(), vals[1].to_string()));
    }
    if distinct.len() != 2 {
        return Err(Error::InvalidData(format!(
            "classification needs exactly two label values, found {}",
            distinct.len()
        )));
    }
    Ok((distinct[0].to_owned(), distinct[1].to_owned()))
}

fn same_label(cell: &str, target: &str) -> bool {
    if cell == target {
        return true;
    }
    matches!((cell.parse::<f64>(), target.parse::<f64>()), (Ok(a), Ok(b)) if a == b)
}

/// Rescales every column to zero mean and unit (population) variance.
/// Constant columns are only centred.
pub fn standardize_columns<T: Scalar>(columns: &mut [Vec<T>]) {
    for col in columns.iter_mut() {
        let n = T::lit(col.len() as f64);
        let mean = col.iter().copied().sum::<T>() / n;
        col.iter_mut().for_each(|v| *v = *v - mean);
        let var = col.iter().map(|&v| v * v).sum::<T>() / n;
        if var > T::zero() {
            let sd = var.sqrt();
            col.iter_mut().for_each(|v| *v = *v / sd);
            // a second centring pass removes the rounding left by the first
            let resid = col.iter().copied().sum::<T>() / n;
            col.iter_mut().for_each(|v| *v = *v - resid);
        }
    }
}

/// Parses CSV text per the spec. Standardisation statistics use the whole
/// file; shuffling happens last.
pub fn parse_dataset<T: Scalar, R: Read>(reader: R, spec: &DatasetSpec) -> Result<Dataset<T>> {
    let table = read_table(reader)?;
    let width = table.rows[0].len();
    if width < 2 {
        return Err(Error::InvalidData("need at least one feature and a label".into()));
    }
    let li = label_index(&table, &spec.label)?;
    let offset = usize::from(table.header.is_some()) + 1;
    let mut features: Vec<Vec<T>> = vec![Vec::with_capacity(table.rows.len()); width - 1];
    let mut labels: Vec<&str> = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Csv {
                row: r + offset,
                column: row.len().min(width),
                reason: format!("expected {width} columns, found {}", row.len()),
            });
        }
        let mut f = 0;
        for (c, cell) in row.iter().enumerate() {
            if c == li {
                labels.push(cell);
            } else {
                features[f].push(parse_cell(cell, r + offset, c + 1)?);
                f += 1;
            }
        }
    }
    let mut ys: Vec<T> = match spec.task {
        Task::Classification => {
            let (neg, pos) = classification_map(&labels, &spec.label_map)?;
            labels
                .iter()
                .enumerate()
                .map(|(r, l)| {
                    if same_label(l, &neg) {
                        Ok(-T::one())
                    } else if same_label(l, &pos) {
                        Ok(T::one())
                    } else {
                        Err(Error::Csv {
                            row: r + offset,
                            column: li + 1,
                            reason: format!("label `{l}` is neither `{neg}` nor `{pos}`"),
                        })
                    }
                })
                .collect::<Result<_>>()?
        }
        Task::Regression => labels
            .iter()
            .enumerate()
            .map(|(r, l)| parse_cell(l, r + offset, li + 1))
            .collect::<Result<_>>()?,
    };
    if spec.standardize {
        standardize_columns(&mut features);
    }
    if spec.task == Task::Regression && spec.standardize_target {
        standardize_columns(std::slice::from_mut(&mut ys));
    }
    let mut points: Vec<DataPoint<T>> = (0..ys.len())
        .map(|r| DataPoint::new(features.iter().map(|c| c[r]).collect(), ys[r]))
        .collect();
    if let Some(seed) = spec.shuffle_seed {
        points.shuffle(&mut stream_rng(seed, streams::SHUFFLE));
    }
    Dataset::new(points, spec.task)
}

pub fn load_dataset<T: Scalar>(spec: &DatasetSpec) -> Result<Dataset<T>> {
    let file = std::fs::File::open(&spec.path)
        .map_err(|e| Error::Io(format!("{}: {e}", spec.path.display())))?;
    parse_dataset(std::io::BufReader::new(file), spec)
}

/// Header `feature_0,...,feature_{d-1},label`.
pub fn canonical_header(dim: usize) -> String {
    let mut cols: Vec<String> = (0..dim).map(|j| format!("feature_{j}")).collect();
    cols.push("label".into());
    cols.join(",")
}

/// Writes the canonical CSV. Values use the shortest exact representation,
/// so reading the file back reproduces the dataset bit for bit.
pub fn write_canonical_csv<T: Scalar, W: Write>(data: &Dataset<T>, mut out: W) -> Result<()> {
    writeln!(out, "{}", canonical_header(data.dim()))?;
    for z in data.iter() {
        let mut line = String::new();
        for v in &z.x {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&z.y.to_string());
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_canonical_csv<T: Scalar>(data: &Dataset<T>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_canonical_csv(data, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn synthetic_to_dataset<T: Scalar>(stream: &SyntheticStream<T>) -> Result<Dataset<T>> {
    stream.generate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, spec: &DatasetSpec) -> Result<Dataset<f64>> {
        parse_dataset(text.as_bytes(), spec)
    }

    #[test]
    fn three_row_fixture() {
        let text = "a,b,y\n1,2,0.5\n3,4,-1\n5,6.25,2\n";
        let d = parse(text, &DatasetSpec::raw("x", Task::Regression)).unwrap();
        let rows: Vec<(Vec<f64>, f64)> = d.iter().map(|z| (z.x.clone(), z.y)).collect();
        assert_eq!(
            rows,
            vec![(vec![1.0, 2.0], 0.5), (vec![3.0, 4.0], -1.0), (vec![5.0, 6.25], 2.0)]
        );
        let mut spec = DatasetSpec::raw("x", Task::Regression);
        spec.label = Some(LabelColumn::Name("a".into()));
        let d = parse(text, &spec).unwrap();
        assert_eq!(d.points()[2].x, vec![6.25, 2.0]);
        assert_eq!(d.points()[2].y, 5.0);
    }

    #[test]
    fn headerless_and_label_mapping() {
        let text = "1,0\n2,1\n3,1\n";
        let d = parse(text, &DatasetSpec::raw("x", Task::Classification)).unwrap();
        assert_eq!(d.iter().map(|z| z.y).collect::<Vec<_>>(), vec![-1.0, 1.0, 1.0]);
        let mut spec = DatasetSpec::raw("x", Task::Classification);
        spec.label_map = Some(("1".into(), "0".into()));
        let d = parse(text, &spec).unwrap();
        assert_eq!(d.points()[0].y, 1.0);
        let text = "x,type\n1,Yes\n2,No\n";
        let d = parse(text, &DatasetSpec::raw("x", Task::Classification)).unwrap();
        assert_eq!(d.iter().map(|z| z.y).collect::<Vec<_>>(), vec![1.0, -1.0]);
        assert!(parse("1,a\n2,b\n3,c\n", &DatasetSpec::raw("x", Task::Classification)).is_err());
    }

    #[test]
    fn bad_cell_reports_position() {
        let err = parse("a,b,y\n1,2,3\n4,oops,6\n", &DatasetSpec::raw("x", Task::Regression)).unwrap_err();
        assert_eq!(
            err,
            Error::Csv {
                row: 3,
                column: 2,
                reason: "non-numeric cell `oops`".into()
            }
        );
        assert!(parse("1,2\n3\n", &DatasetSpec::raw("x", Task::Regression)).is_err());
    }

    #[test]
    fn standardization() {
        let text = "1,7,10\n2,7,20\n4,7,30\n9,7,45\n";
        let d = parse(text, &DatasetSpec::new("x", Task::Regression)).unwrap();
        let n = d.len() as f64;
        for j in 0..2 {
            let mean = d.iter().map(|z| z.x[j]).sum::<f64>() / n;
            let var = d.iter().map(|z| (z.x[j] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() <= 1e-10);
            if j == 0 {
                assert!((var - 1.0).abs() <= 1e-10);
            } else {
                assert_eq!(var, 0.0);
            }
        }
        let ymean = d.iter().map(|z| z.y).sum::<f64>() / n;
        assert!(ymean.abs() < 1e-10);
    }

    #[test]
    fn shuffle_is_seeded_permutation() {
        let text: String = (0..50).map(|i| format!("{i},{}\n", i * 2)).collect();
        let mut spec = DatasetSpec::raw("x", Task::Regression);
        spec.shuffle_seed = Some(4);
        let a = parse(&text, &spec).unwrap();
        assert_eq!(a, parse(&text, &spec).unwrap());
        let mut firsts: Vec<f64> = a.iter().map(|z| z.x[0]).collect();
        assert_ne!(firsts, (0..50).map(|i| i as f64).collect::<Vec<_>>());
        firsts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(firsts, (0..50).map(|i| i as f64).collect::<Vec<_>>());
        assert!(a.iter().all(|z| z.y == 2.0 * z.x[0]));
    }

    #[test]
    fn canonical_round_trip() {
        let text = "0.1,-2.5e-7,3\n1e300,0.3333333333333333,-1\n";
        let d = parse(text, &DatasetSpec::raw("x", Task::Regression)).unwrap();
        let mut buf = Vec::new();
        write_canonical_csv(&d, &mut buf).unwrap();
        let s = String::from_utf8(buf.clone()).unwrap();
        assert!(s.starts_with("feature_0,feature_1,label\n"));
        let back: Dataset<f64> = parse_dataset(buf.as_slice(), &DatasetSpec::raw("x", Task::Regression)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(parse("", &DatasetSpec::raw("x", Task::Regression)).unwrap_err(), Error::EmptyDataset);
        assert_eq!(parse("a,b\n", &DatasetSpec::raw("x", Task::Regression)).unwrap_err(), Error::EmptyDataset);
    }
}
