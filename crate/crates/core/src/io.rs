//! Text formats: numeric CSV datasets and mean vectors.

use crate::error::{Error, Result};
use crate::gauss::DataMatrix;

fn parse_field(field: &str, line: u64, column: usize) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("column {}: `{}` is not a number", column + 1, field.trim()),
    })?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Parse {
            line,
            message: format!("column {}: value is not finite", column + 1),
        })
    }
}

/// Parses comma-separated numeric rows (observations) into a [`DataMatrix`].
///
/// Blank lines and lines starting with `#` are skipped. With `has_header`
/// the first non-comment record is discarded. Line numbers in errors are 1-based.
pub fn parse_dataset(text: &str, has_header: bool) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, f)| parse_field(f, line, j))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    DataMatrix::from_rows(&rows)
}

/// Parses a mean vector given inline (`"0,0.5,1"`) or as file contents with
/// values separated by commas, whitespace or newlines.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let content = line.split('#').next().unwrap_or("");
        for (j, token) in content
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            out.push(parse_field(token, line_no, j)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "empty vector".into(),
        });
    }
    Ok(out)
}

/// Writes a dataset as CSV, one observation per line, full round-trip precision.
pub fn write_dataset(data: &DataMatrix) -> String {
    let values = data.values();
    let mut out = String::new();
    for i in 0..values.nrows() {
        let row: Vec<String> = values.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
