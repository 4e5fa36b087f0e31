//! CSV ingestion and emission for samples.
//!
//! One observation per line: scalar samples use one column, regression
//! samples two columns `x,y`. A non-numeric first row is treated as an
//! optional header. Parsed scalar samples carry the unrestricted domain
//! tag; callers retag to nonnegative when the context demands it.

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Parse CSV text into a sample, auto-detecting the column count and an
/// optional header row. Line numbers in errors are 1-based positions in
/// the original text.
pub fn parse_sample_csv(text: &str) -> Result<Sample> {
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        rows.push((index + 1, line.split(',').map(str::trim).collect()));
    }
    if rows.is_empty() {
        return Err(Error::EmptyCsv);
    }
    // Header: a first row with any field that does not parse as a number.
    if rows[0].1.iter().any(|field| field.parse::<f64>().is_err()) {
        rows.remove(0);
    }
    if rows.is_empty() {
        return Err(Error::EmptyCsv);
    }

    let columns = rows[0].1.len();
    if columns != 1 && columns != 2 {
        return Err(Error::CsvParse {
            line: rows[0].0,
            detail: format!("expected 1 column (scalar) or 2 columns (x,y), found {columns}"),
        });
    }
    let mut parsed: Vec<(usize, Vec<f64>)> = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        if fields.len() != columns {
            return Err(Error::CsvParse {
                line,
                detail: format!(
                    "row has {} column(s) but the file started with {columns}",
                    fields.len()
                ),
            });
        }
        let mut numbers = Vec::with_capacity(columns);
        for field in fields {
            let value = field.parse::<f64>().map_err(|_| Error::CsvParse {
                line,
                detail: format!("`{field}` is not a number"),
            })?;
            numbers.push(value);
        }
        parsed.push((line, numbers));
    }

    if columns == 1 {
        Sample::scalar(parsed.into_iter().map(|(_, row)| row[0]).collect())
    } else {
        Sample::regression(parsed.into_iter().map(|(_, row)| (row[0], row[1])).collect())
    }
}

/// Render a sample as CSV with a header row.
pub fn to_csv(sample: &Sample) -> String {
    let mut out = String::new();
    match sample.pairs() {
        Some(pairs) => {
            out.push_str("x,y\n");
            for (x, y) in pairs {
                out.push_str(&format!("{x},{y}\n"));
            }
        }
        None => {
            out.push_str("value\n");
            for v in sample.values().expect("scalar sample has values") {
                out.push_str(&format!("{v}\n"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Domain;

    #[test]
    fn parses_scalar_columns_with_and_without_header() {
        let with_header = parse_sample_csv("value\n1.5\n2.5\n-3\n").unwrap();
        assert_eq!(with_header.values().unwrap(), &[1.5, 2.5, -3.0]);
        assert_eq!(with_header.domain(), Domain::Real);

        let bare = parse_sample_csv("1.5\n2.5\n-3").unwrap();
        assert_eq!(bare, with_header);
    }

    #[test]
    fn parses_two_column_regression() {
        let sample = parse_sample_csv("x,y\n0,0\n1,1\n2,1.9\n").unwrap();
        assert_eq!(sample.domain(), Domain::Regression);
        assert_eq!(sample.pairs().unwrap(), &[(0.0, 0.0), (1.0, 1.0), (2.0, 1.9)]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(parse_sample_csv(""), Err(Error::EmptyCsv)));
        assert!(matches!(parse_sample_csv("value\n"), Err(Error::EmptyCsv)));
        assert!(matches!(
            parse_sample_csv("1\n2,3\n"),
            Err(Error::CsvParse { line: 2, .. })
        ));
        assert!(matches!(
            parse_sample_csv("1\noops\n"),
            Err(Error::CsvParse { line: 2, .. })
        ));
        assert!(matches!(
            parse_sample_csv("a,b,c\n1,2,3\n"),
            Err(Error::CsvParse { line: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trips() {
        let scalar = Sample::scalar(vec![1.0, -2.25, 3.5]).unwrap();
        assert_eq!(parse_sample_csv(&to_csv(&scalar)).unwrap(), scalar);

        let pairs = Sample::regression(vec![(0.5, 1.0), (-1.0, -0.5)]).unwrap();
        assert_eq!(parse_sample_csv(&to_csv(&pairs)).unwrap(), pairs);
    }
}
