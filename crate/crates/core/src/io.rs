//! File formats: typed CSV ingestion with a JSON schema sidecar, the
//! canonical CSV writer, lower-triangle matrix files and label files.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Column, DissimilarityMatrix, TypedDataset, VariableKind, VariableSchema};

/// Cell contents treated as missing; rows containing one are dropped.
pub const MISSING_TOKENS: &[&str] = &["", "NA", "N/A", "NaN", "nan", "?"];

/// `levels` in a schema file: either a count or the list of labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelSpec {
    Count(u32),
    Labels(Vec<String>),
}

/// One record of a schema sidecar file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaEntry {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelSpec>,
}

pub fn read_schema(path: &Path) -> Result<Vec<SchemaEntry>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::input(path, e.line() as u64, e.to_string()))
}

pub fn write_schema(path: &Path, entries: &[SchemaEntry]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, entries)?;
    writeln!(out)?;
    Ok(())
}

fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell.trim())
}

/// Reads a CSV with a header row, typed by the schema sidecar at `schema_path`.
///
/// Rows with any missing cell are dropped. Columns are reordered continuous,
/// unordered, ordered. Categorical labels become integer codes:
/// * explicit label list, unordered: position in sorted label order;
/// * explicit label list, ordered: position in the listed (rank) order;
/// * level count with integer labels: the integer itself, which must be
///   below the count;
/// * level count with other labels (unordered only): position in sorted
///   order of the observed labels.
pub fn ingest_csv(path: &Path, schema_path: &Path) -> Result<TypedDataset> {
    let entries = read_schema(schema_path)?;
    let file = File::open(path)?;
    ingest_reader(file, path, &entries)
}

/// Same as [`ingest_csv`] from an arbitrary reader; `origin` is used in error messages.
pub fn ingest_reader(
    reader: impl Read,
    origin: &Path,
    entries: &[SchemaEntry],
) -> Result<TypedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let mut positions = Vec::with_capacity(entries.len());
    for entry in entries {
        match headers.iter().position(|h| *h == entry.name) {
            Some(pos) => positions.push(pos),
            None => {
                return Err(Error::input(
                    origin,
                    1,
                    format!("schema column `{}` not found in header", entry.name),
                ))
            }
        }
    }
    if let Some(extra) = headers
        .iter()
        .find(|h| !entries.iter().any(|e| &e.name == *h))
    {
        return Err(Error::input(
            origin,
            1,
            format!("column `{extra}` is not described by the schema"),
        ));
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); entries.len()];
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if positions
            .iter()
            .any(|&p| record.get(p).is_none_or(is_missing))
        {
            continue;
        }
        for (slot, &p) in positions.iter().enumerate() {
            cells[slot].push(record[p].trim().to_string());
        }
        lines.push(line);
    }

    let mut schema = Vec::with_capacity(entries.len());
    let mut columns = Vec::with_capacity(entries.len());
    for (entry, values) in entries.iter().zip(cells) {
        let (var, col) = decode_column(entry, values, &lines, origin)?;
        schema.push(var);
        columns.push(col);
    }
    TypedDataset::from_columns(schema, columns)
}

fn decode_column(
    entry: &SchemaEntry,
    values: Vec<String>,
    lines: &[u64],
    origin: &Path,
) -> Result<(VariableSchema, Column)> {
    let name = entry.name.clone();
    if entry.kind == VariableKind::Continuous {
        if entry.levels.is_some() {
            return Err(Error::Schema(format!(
                "continuous variable `{name}` must not declare levels"
            )));
        }
        let parsed = values
            .iter()
            .zip(lines)
            .map(|(v, &line)| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::input(
                    origin,
                    line,
                    format!("non-numeric value `{v}` in continuous column `{name}`"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((VariableSchema::continuous(name), Column::Continuous(parsed)));
    }

    let integer_codes =
        || -> Option<Vec<u32>> { values.iter().map(|v| v.parse::<u32>().ok()).collect() };
    let (levels, labels, codes) = match &entry.levels {
        Some(LevelSpec::Labels(list)) => {
            let ordered_labels: Vec<String> = if entry.kind == VariableKind::Unordered {
                let set: BTreeSet<&String> = list.iter().collect();
                if set.len() != list.len() {
                    return Err(Error::Schema(format!("duplicate labels for `{name}`")));
                }
                set.into_iter().cloned().collect()
            } else {
                list.clone()
            };
            let index: HashMap<&str, u32> = ordered_labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i as u32))
                .collect();
            if index.len() != ordered_labels.len() {
                return Err(Error::Schema(format!("duplicate labels for `{name}`")));
            }
            let codes = values
                .iter()
                .zip(lines)
                .map(|(v, &line)| {
                    index.get(v.as_str()).copied().ok_or_else(|| {
                        Error::input(
                            origin,
                            line,
                            format!("label `{v}` is not a declared level of `{name}`"),
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (ordered_labels.len() as u32, Some(ordered_labels), codes)
        }
        Some(LevelSpec::Count(g)) => {
            if let Some(codes) = integer_codes() {
                if let Some((k, &c)) = codes.iter().enumerate().find(|(_, &c)| c >= *g) {
                    return Err(Error::input(
                        origin,
                        lines[k],
                        format!("code {c} of `{name}` is not among its {g} declared levels"),
                    ));
                }
                (*g, None, codes)
            } else if entry.kind == VariableKind::Ordered {
                return Err(Error::Schema(format!(
                    "ordered variable `{name}` needs integer labels or an explicit level list in rank order"
                )));
            } else {
                let observed: Vec<String> = values
                    .iter()
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                if observed.len() > *g as usize {
                    return Err(Error::Schema(format!(
                        "`{name}` declares {g} levels but {} distinct labels were found",
                        observed.len()
                    )));
                }
                let index: HashMap<&str, u32> = observed
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i as u32))
                    .collect();
                let codes = values.iter().map(|v| index[v.as_str()]).collect();
                (*g, None, codes)
            }
        }
        None => {
            if let Some(codes) = integer_codes() {
                let g = codes.iter().max().map_or(0, |&m| m + 1).max(2);
                (g, None, codes)
            } else {
                if entry.kind == VariableKind::Ordered {
                    return Err(Error::Schema(format!(
                        "ordered variable `{name}` needs integer labels or an explicit level list in rank order"
                    )));
                }
                let observed: Vec<String> = values
                    .iter()
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let index: HashMap<&str, u32> = observed
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i as u32))
                    .collect();
                let codes = values.iter().map(|v| index[v.as_str()]).collect();
                let g = (observed.len() as u32).max(2);
                let mut labels = observed;
                while labels.len() < g as usize {
                    labels.push(format!("<unused{}>", labels.len()));
                }
                (g, Some(labels), codes)
            }
        }
    };
    let var = VariableSchema {
        name,
        kind: entry.kind,
        levels: Some(levels),
        labels,
    };
    Ok((var, Column::Categorical(codes)))
}

/// Schema entries describing `ds` in its canonical column order.
pub fn canonical_schema(ds: &TypedDataset) -> Vec<SchemaEntry> {
    ds.schema()
        .iter()
        .map(|v| SchemaEntry {
            name: v.name.clone(),
            kind: v.kind,
            levels: match (&v.labels, v.levels) {
                (Some(labels), _) => Some(LevelSpec::Labels(labels.clone())),
                (None, Some(g)) => Some(LevelSpec::Count(g)),
                (None, None) => None,
            },
        })
        .collect()
}

/// Writes `ds` as CSV in canonical column order; categorical cells are
/// written as their labels when known, otherwise as integer codes.
/// Continuous values use the shortest representation that round-trips.
pub fn write_canonical_csv(ds: &TypedDataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ds.schema().iter().map(|v| v.name.as_str()))?;
    let schema = ds.schema();
    let mut record: Vec<String> = Vec::with_capacity(ds.p());
    for row in ds.rows() {
        record.clear();
        record.extend(row.continuous.iter().map(|x| format!("{x}")));
        let codes = row.unordered.iter().chain(row.ordered);
        for (var, &code) in schema[ds.p_c()..].iter().zip(codes) {
            record.push(match &var.labels {
                Some(labels) => labels[code as usize].clone(),
                None => code.to_string(),
            });
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<prefix>.csv` and `<prefix>.schema.json`.
pub fn write_dataset(ds: &TypedDataset, csv_path: &Path, schema_path: &Path) -> Result<()> {
    write_canonical_csv(ds, BufWriter::new(File::create(csv_path)?))?;
    write_schema(schema_path, &canonical_schema(ds))
}

/// Formats with 12 significant digits in scientific notation.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes the lower triangle of `m` as `row,col,value` lines (`row > col`),
/// preceded by `#` comment lines: `# n=<n>` and then each of `comments`.
pub fn write_matrix(
    m: &DissimilarityMatrix,
    comments: &[String],
    writer: impl Write,
) -> Result<()> {
    let mut out = BufWriter::new(writer);
    writeln!(out, "# n={}", m.n())?;
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    writeln!(out, "row,col,value")?;
    for i in 1..m.n() {
        for j in 0..i {
            writeln!(out, "{i},{j},{}", format_sig12(m.get(i, j)))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix`] (any lower- or upper-triangle
/// listing with an `# n=` line is accepted). Returns the matrix and the
/// comment lines other than `n=`.
pub fn read_matrix(path: &Path) -> Result<(DissimilarityMatrix, Vec<String>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut n: Option<usize> = None;
    let mut comments = Vec::new();
    let mut data: Vec<f64> = Vec::new();
    let mut seen: Vec<bool> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx as u64 + 1;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("n=") {
                let size: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::input(path, lineno, format!("bad size `{v}`")))?;
                n = Some(size);
                data = vec![0.0; size * size];
                seen = vec![false; size * size];
            } else {
                comments.push(comment.to_string());
            }
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with("row") {
            continue;
        }
        let size = n.ok_or_else(|| Error::input(path, lineno, "entry before `# n=` header"))?;
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::input(path, lineno, "expected `row,col,value`"));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| Error::input(path, lineno, "bad row index"))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| Error::input(path, lineno, "bad column index"))?;
        let v: f64 = parts[2]
            .parse()
            .map_err(|_| Error::input(path, lineno, "bad value"))?;
        if i >= size || j >= size || i == j {
            return Err(Error::input(
                path,
                lineno,
                format!("index ({i}, {j}) out of range for n = {size}"),
            ));
        }
        data[i * size + j] = v;
        data[j * size + i] = v;
        seen[i * size + j] = true;
        seen[j * size + i] = true;
    }
    let size = n.ok_or_else(|| Error::input(path, 1, "missing `# n=` header"))?;
    for i in 0..size {
        for j in 0..i {
            if !seen[i * size + j] {
                return Err(Error::input(path, 0, format!("entry ({i}, {j}) missing")));
            }
        }
    }
    let m = DissimilarityMatrix::from_square(size, data)
        .map_err(|e| Error::input(path, 0, e.to_string()))?;
    Ok((m, comments))
}

/// Writes one label per line under a `label` header.
pub fn write_labels(labels: &[usize], writer: impl Write) -> Result<()> {
    let mut out = BufWriter::new(writer);
    writeln!(out, "label")?;
    for l in labels {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a label file: one nonnegative integer per line, optional header.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let reader = BufReader::new(File::open(path)?);
    let mut labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let cell = line.trim();
        if cell.is_empty() || cell.starts_with('#') {
            continue;
        }
        match cell.parse::<usize>() {
            Ok(l) => labels.push(l),
            Err(_) if idx == 0 => continue,
            Err(_) => {
                return Err(Error::input(
                    path,
                    idx as u64 + 1,
                    format!("bad label `{cell}`"),
                ))
            }
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(spec: &str) -> Vec<SchemaEntry> {
        serde_json::from_str(spec).unwrap()
    }

    fn ingest(csv: &str, schema: &str) -> Result<TypedDataset> {
        ingest_reader(csv.as_bytes(), Path::new("mem.csv"), &entries(schema))
    }

    #[test]
    fn na_rows_are_dropped() {
        let ds = ingest(
            "x,g\n1.0,a\nNA,b\n2.5,b\n",
            r#"[{"name":"x","kind":"continuous"},{"name":"g","kind":"unordered","levels":["a","b"]}]"#,
        )
        .unwrap();
        assert_eq!((ds.n(), ds.p_c(), ds.p_u()), (2, 1, 1));
        assert_eq!(ds.row(1).continuous, &[2.5]);
        assert_eq!(ds.row(1).unordered, &[1]);
    }

    #[test]
    fn unknown_schema_column() {
        let err = ingest("x\n1\n", r#"[{"name":"y","kind":"continuous"}]"#).unwrap_err();
        assert!(err.to_string().contains("`y` not found"), "{err}");
    }

    #[test]
    fn non_numeric_continuous_reports_line() {
        let err = ingest("x\n1\nabc\n", r#"[{"name":"x","kind":"continuous"}]"#).unwrap_err();
        assert_eq!(
            err.to_string(),
            "mem.csv:3: non-numeric value `abc` in continuous column `x`"
        );
    }

    #[test]
    fn undeclared_label() {
        let err = ingest(
            "g\na\nz\n",
            r#"[{"name":"g","kind":"unordered","levels":["a","b"]}]"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("mem.csv:3:"), "{err}");
    }

    #[test]
    fn unordered_labels_are_sorted_ordered_labels_keep_rank() {
        let ds = ingest(
            "u,o\nzeta,low\nalpha,high\n",
            r#"[{"name":"u","kind":"unordered","levels":["zeta","alpha"]},
                {"name":"o","kind":"ordered","levels":["low","mid","high"]}]"#,
        )
        .unwrap();
        assert_eq!(ds.row(0).unordered, &[1]);
        assert_eq!(ds.row(1).unordered, &[0]);
        assert_eq!(ds.row(0).ordered, &[0]);
        assert_eq!(ds.row(1).ordered, &[2]);
    }

    #[test]
    fn integer_labels_with_count_are_codes() {
        let ds = ingest("o\n3\n0\n", r#"[{"name":"o","kind":"ordered","levels":4}]"#).unwrap();
        assert_eq!(ds.row(0).ordered, &[3]);
        let err = ingest("o\n4\n", r#"[{"name":"o","kind":"ordered","levels":4}]"#).unwrap_err();
        assert!(err.to_string().contains("mem.csv:2"), "{err}");
    }

    #[test]
    fn quoted_fields() {
        let ds = ingest(
            "\"a name\",g\n1,\"x, y\"\n2,z\n",
            r#"[{"name":"a name","kind":"continuous"},{"name":"g","kind":"unordered"}]"#,
        )
        .unwrap();
        assert_eq!(ds.schema()[1].labels.as_ref().unwrap()[0], "x, y");
    }

    #[test]
    fn matrix_file_round_trip() {
        let m = DissimilarityMatrix::from_fn(4, |i, j| (i * 10 + j) as f64 / 3.0).unwrap();
        let mut buf = Vec::new();
        write_matrix(&m, &["metric=test".into()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("# n=4\n# metric=test\nrow,col,value\n1,0,3.33333333333e-1\n"),
            "{text}"
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, &text).unwrap();
        let (back, comments) = read_matrix(&path).unwrap();
        assert_eq!(comments, vec!["metric=test".to_string()]);
        for i in 0..4 {
            for j in 0..4 {
                assert!((back.get(i, j) - m.get(i, j)).abs() <= 1e-11 * m.get(i, j).abs());
            }
        }
    }
}
