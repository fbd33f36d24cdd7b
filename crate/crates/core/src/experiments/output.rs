//! CSV tables with an embedded configuration header.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

/// Twelve significant digits in scientific notation. Non-finite values are
/// rejected.
pub fn format_value(v: f64) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("{v}")));
    }
    let v = if v == 0.0 { 0.0 } else { v };
    Ok(format!("{v:.11e}"))
}

/// Numeric table; `None` cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        if let Some((i, v)) = row.iter().enumerate().find_map(|(i, v)| v.filter(|x| !x.is_finite()).map(|x| (i, x))) {
            return Err(Error::NonFinite(format!("{v} in column `{}`", self.columns[i])));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Renders the table. Each line of `header` becomes a `# ` comment.
    pub fn render(&self, header: &str) -> Result<String> {
        let mut out = String::new();
        for line in header.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            let cells = row
                .iter()
                .map(|v| v.map_or(Ok(String::new()), format_value))
                .collect::<Result<Vec<_>>>()?;
            writer.write_record(&cells)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(bytes).expect("ascii"));
        Ok(out)
    }

    pub fn write(&self, path: &Path, header: &str) -> Result<()> {
        fs::write(path, self.render(header)?)?;
        Ok(())
    }

    /// Parses a file written by [`Table::write`], skipping `#` lines.
    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = reader.headers()?.iter().map(str::to_string).collect();
        let mut table = Self { columns, rows: Vec::new() };
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|cell| {
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::InvalidConfig(format!("malformed number `{cell}`")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

/// Writes `metadata.txt`: run facts as `key = value` lines followed by the
/// configuration block.
pub fn write_metadata(dir: &Path, facts: &[(&str, String)], config_text: &str, wall_time: Duration) -> Result<()> {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut file = fs::File::create(dir.join("metadata.txt"))?;
    writeln!(file, "timestamp_unix = {timestamp}")?;
    writeln!(file, "wall_time_s = {:.3}", wall_time.as_secs_f64())?;
    writeln!(file, "code_version = {}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in facts {
        writeln!(file, "{k} = {v}")?;
    }
    writeln!(file, "[config]")?;
    file.write_all(config_text.as_bytes())?;
    Ok(())
}
