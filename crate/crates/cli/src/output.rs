use std::path::Path;

use dsim_core::series::TimeSeries;

use crate::CliError;

/// Column names plus formatted rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip form; exponent notation for very small or large values.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Empty cell for a missing value.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// `x, [aux…], y_name, stderr`.
    pub fn from_series(series: &TimeSeries, y_name: &str) -> Self {
        let mut columns = vec![series.x_label.clone()];
        columns.extend(series.aux.iter().map(|(n, _)| n.clone()));
        columns.push(y_name.to_string());
        columns.push("stderr".to_string());
        let rows = (0..series.len())
            .map(|i| {
                let mut r = vec![num(series.x[i])];
                r.extend(series.aux.iter().map(|(_, v)| num(v[i])));
                r.push(num(series.mean[i]));
                r.push(num(series.stderr[i]));
                r
            })
            .collect();
        Table { columns, rows }
    }

    /// `#`-prefixed comment lines, then the header row and the data rows.
    pub fn render(&self, comments: &[String]) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        for c in comments {
            for line in c.lines() {
                let l = format!("# {line}");
                buf.extend_from_slice(l.trim_end().as_bytes());
                buf.push(b'\n');
            }
        }
        let mut w = csv::Writer::from_writer(buf);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// A numeric CSV written by this tool or compatible with it: `#` lines are
/// skipped, the first remaining line names the columns.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v = if field.is_empty() {
                f64::NAN
            } else {
                field
                    .parse()
                    .map_err(|_| bad(format!("data row {}: '{field}' is not a number", k + 1)))?
            };
            col.push(v);
        }
    }
    Ok((header, columns))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_comments_then_rows() {
        let mut t = Table::new(&["delay_us", "signal"]);
        t.push(vec![num(0.0), num(1e-9)]);
        let out = String::from_utf8(t.render(&["a\nb".into()]).unwrap()).unwrap();
        assert_eq!(out, "# a\n# b\ndelay_us,signal\n0.0,1e-9\n");
    }

    #[test]
    fn reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![num(0.5), num(-2.25)]);
        t.push(vec![num(1.0), String::new()]);
        write_file(&p, &t.render(&["c".into()]).unwrap()).unwrap();
        let (h, cols) = read_table(&p).unwrap();
        assert_eq!(h, vec!["x", "y"]);
        assert_eq!(cols[0], vec![0.5, 1.0]);
        assert_eq!(cols[1][0], -2.25);
        assert!(cols[1][1].is_nan());
    }
}
