//! Versioned CSV tables with `#`-prefixed metadata lines.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub meta: Vec<(String, String)>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, header: Vec<&'static str>) -> Self {
        Table {
            schema,
            meta: Vec::new(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.push((key.into(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a header column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    /// Parsed numeric column; unparsable cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn render(&self) -> Result<String> {
        let mut out = format!("# schema: {} v1\n", self.schema);
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))?);
        Ok(out)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Output(e.to_string())
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_and_quotes() {
        let mut t = Table::new("demo", vec!["a", "b"]).meta("config_hash", "abc");
        t.push(vec![num(0.1), "x, y".into()]);
        let s = t.render().unwrap();
        assert_eq!(s, "# schema: demo v1\n# config_hash: abc\na,b\n0.1,\"x, y\"\n");
    }

    #[test]
    fn numeric_column() {
        let mut t = Table::new("demo", vec!["a"]);
        t.push(vec![num(2.5)]);
        assert_eq!(t.numbers("a").unwrap(), vec![2.5]);
        assert!(t.numbers("b").is_none());
    }
}
