//! Tab-separated input records and table output.
//!
//! Input files carry no header; blank lines and lines starting with `#` are
//! skipped. Output tables have exactly one header line.

use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pnp_core::graph::{MembershipRecord, Rating};
use pnp_core::Error as CoreError;

use crate::error::{CliError, Result};

/// Non-comment lines with their 1-based line numbers.
fn records(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((n + 1, trimmed.to_string()));
    }
    Ok(out)
}

fn bad(path: &Path, line: usize, message: String) -> CliError {
    CliError::Input { path: path.to_path_buf(), source: CoreError::Record { line, message } }
}

fn fields<'a>(path: &Path, line: usize, text: &'a str, want: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = text.split('\t').collect();
    if parts.len() != want {
        return Err(bad(path, line, format!("expected {want} tab-separated fields, found {}", parts.len())));
    }
    Ok(parts)
}

fn parse<T: FromStr>(path: &Path, line: usize, what: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(path, line, format!("invalid {what} '{s}'")))
}

/// `user_id TAB movie_id TAB rating`, numbered by file line.
pub fn read_ratings(path: &Path) -> Result<Vec<(usize, Rating)>> {
    records(path)?
        .into_iter()
        .map(|(line, text)| {
            let f = fields(path, line, &text, 3)?;
            Ok((
                line,
                Rating {
                    user: parse(path, line, "user id", f[0])?,
                    movie: parse(path, line, "movie id", f[1])?,
                    value: parse(path, line, "rating", f[2])?,
                },
            ))
        })
        .collect()
}

/// `movie_id TAB feature_id TAB type_label`, numbered by file line.
pub fn read_membership(path: &Path) -> Result<Vec<(usize, MembershipRecord)>> {
    records(path)?
        .into_iter()
        .map(|(line, text)| {
            let f = fields(path, line, &text, 3)?;
            let label = f[2].trim();
            if label.is_empty() {
                return Err(bad(path, line, "empty type label".into()));
            }
            Ok((
                line,
                MembershipRecord {
                    movie: parse(path, line, "movie id", f[0])?,
                    feature: parse(path, line, "feature id", f[1])?,
                    label: label.to_string(),
                },
            ))
        })
        .collect()
}

/// One user id per line.
pub fn read_ids(path: &Path) -> Result<Vec<u64>> {
    records(path)?
        .into_iter()
        .map(|(line, text)| parse(path, line, "user id", text.split('\t').next().unwrap_or("")))
        .collect()
}

/// `feature_id TAB cost`.
pub fn read_costs(path: &Path) -> Result<Vec<(u64, f64)>> {
    records(path)?
        .into_iter()
        .map(|(line, text)| {
            let f = fields(path, line, &text, 2)?;
            Ok((parse(path, line, "feature id", f[0])?, parse(path, line, "cost", f[1])?))
        })
        .collect()
}

/// Writes a header line followed by rows; values are joined with tabs.
pub struct Table {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Table {
    pub fn create(path: impl AsRef<Path>, header: &[&str]) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut t = Table { path, out: BufWriter::new(file) };
        if !header.is_empty() {
            t.raw(&header.join("\t"))?;
        }
        Ok(t)
    }

    /// A file without header, for the ingest formats.
    pub fn headerless(path: impl AsRef<Path>) -> Result<Self> {
        Self::create(path, &[])
    }

    pub fn row(&mut self, cells: &[&dyn Display]) -> Result<()> {
        let line: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        self.raw(&line.join("\t"))
    }

    fn raw(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_numbers_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.tsv");
        fs::write(&p, "# header\n1\t10\t4.5\n\n2\t10\t3\r\n").unwrap();
        let r = read_ratings(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].0, 2);
        assert_eq!(r[1], (4, Rating { user: 2, movie: 10, value: 3.0 }));
    }

    #[test]
    fn malformed_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.tsv");
        fs::write(&p, "1\t2\tactor\n1\tx\tactor\n").unwrap();
        match read_membership(&p).unwrap_err() {
            CliError::Input { source: CoreError::Record { line, .. }, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        fs::write(&p, "1\t2\n").unwrap();
        assert_eq!(read_membership(&p).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn table_has_one_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/t.tsv");
        let mut t = Table::create(&p, &["a", "b"]).unwrap();
        t.row(&[&1, &"x"]).unwrap();
        t.finish().unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "a\tb\n1\tx\n");
    }
}
