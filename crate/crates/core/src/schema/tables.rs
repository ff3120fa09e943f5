//! Minimal tab-separated table reader with line-accurate error loci.

use std::fs;
use std::path::Path;

use super::load::LoadError;

pub struct Table {
    pub file: String,
    headers: Vec<String>,
    pub rows: Vec<(u32, Vec<String>)>,
}

impl Table {
    pub fn read(path: &Path, file: &str) -> Result<Table, LoadError> {
        let text = fs::read_to_string(path).map_err(|e| LoadError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, file)
    }

    pub fn parse(text: &str, file: &str) -> Result<Table, LoadError> {
        let mut lines = text.lines().enumerate();
        let headers = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() || l.starts_with('#') => continue,
                Some((_, l)) => break l.split('\t').map(|h| h.trim().to_string()).collect::<Vec<_>>(),
                None => break Vec::new(),
            }
        };
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<String> = line.split('\t').map(|f| f.trim().to_string()).collect();
            if fields.len() > headers.len() {
                return Err(LoadError::Parse {
                    file: file.to_string(),
                    line: n as u32 + 1,
                    message: format!("row has {} fields, header has {}", fields.len(), headers.len()),
                });
            }
            rows.push((n as u32 + 1, fields));
        }
        Ok(Table { file: file.to_string(), headers, rows })
    }

    pub fn col(&self, name: &str) -> Result<usize, LoadError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LoadError::MissingColumn {
                file: self.file.clone(),
                column: name.to_string(),
            })
    }

    pub fn field<'a>(&'a self, row: &'a (u32, Vec<String>), col: usize) -> &'a str {
        row.1.get(col).map(|s| s.as_str()).unwrap_or("")
    }

    pub fn required<'a>(
        &'a self,
        row: &'a (u32, Vec<String>),
        col: usize,
    ) -> Result<&'a str, LoadError> {
        let v = self.field(row, col);
        if v.is_empty() {
            return Err(LoadError::Parse {
                file: self.file.clone(),
                line: row.0,
                message: format!("empty value in column '{}'", self.headers[col]),
            });
        }
        Ok(v)
    }

    pub fn number(&self, row: &(u32, Vec<String>), col: usize) -> Result<f64, LoadError> {
        let v = self.required(row, col)?;
        v.parse::<f64>().map_err(|_| LoadError::Parse {
            file: self.file.clone(),
            line: row.0,
            message: format!("'{}' is not a number (column '{}')", v, self.headers[col]),
        })
    }

    pub fn opt_number(&self, row: &(u32, Vec<String>), col: usize) -> Result<Option<f64>, LoadError> {
        let v = self.field(row, col);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse::<f64>().map(Some).map_err(|_| LoadError::Parse {
            file: self.file.clone(),
            line: row.0,
            message: format!("'{}' is not a number (column '{}')", v, self.headers[col]),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_headers_and_skips_comments() {
        let t = Table::parse("# note\ns\trole\nfeed\tM\n\nprod\tP\n", "streams.tsv").unwrap();
        assert_eq!(t.col("s").unwrap(), 0);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.field(&t.rows[1], 1), "P");
    }

    #[test]
    fn bad_number_carries_locus() {
        let t = Table::parse("s\tv\na\tx9\n", "p.tsv").unwrap();
        let col = t.col("v").unwrap();
        let err = t.number(&t.rows[0], col).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p.tsv") && msg.contains("line 2"), "{}", msg);
    }
}
