//! Output files are staged in memory and written together, so a failed
//! command leaves no partial results behind.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    /// Adds a CSV file from a header and rows.
    pub fn add_csv(&mut self, name: impl Into<String>, header: &str, rows: &[String]) {
        let mut s = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
        s.push_str(header);
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        self.add(name, s);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file into `dir` through temporaries and renames them in
    /// place once all writes succeeded.
    pub fn commit(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let io = |what: &str, p: &Path, e: std::io::Error| CliError::Runtime(format!("{what} {}: {e}", p.display()));
        let created = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
        let mut temps: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(self.files.len());
        let cleanup = |temps: &[(PathBuf, PathBuf)]| {
            for (t, _) in temps {
                let _ = fs::remove_file(t);
            }
            if created {
                let _ = fs::remove_dir(dir);
            }
        };
        for (name, contents) in &self.files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.partial"));
            if let Err(e) = fs::write(&tmp, contents) {
                cleanup(&temps);
                return Err(io("cannot write", &tmp, e));
            }
            temps.push((tmp, target));
        }
        let mut done = Vec::with_capacity(temps.len());
        for (i, (tmp, target)) in temps.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, target) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                cleanup(&temps[i..]);
                return Err(io("cannot move into place", target, e));
            }
            done.push(target.clone());
        }
        Ok(done)
    }
}
