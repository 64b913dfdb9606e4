use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub arm: String,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub library_version: &'static str,
    pub complete: bool,
    pub files: Vec<FileRecord>,
    pub failures: Vec<FailureRecord>,
}

/// Output directory that records a digest for every file it writes.
pub struct Outputs {
    root: PathBuf,
    files: Vec<FileRecord>,
    pub failures: Vec<FailureRecord>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Outputs {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            failures: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.files.push(FileRecord {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Plots are best effort: a failed write is reported but does not stop the run.
    pub fn write_plot(&mut self, rel: &str, svg: String) {
        if let Err(e) = self.write(rel, svg.as_bytes()) {
            eprintln!("warning: plot skipped: {e}");
        }
    }

    /// Absorbs the records of a nested run written below `prefix`.
    pub fn adopt(&mut self, prefix: &str, other: Outputs) {
        for mut f in other.files {
            f.path = format!("{prefix}/{}", f.path);
            self.files.push(f);
        }
        for mut f in other.failures {
            f.arm = format!("{prefix}/{}", f.arm);
            self.failures.push(f);
        }
    }

    pub fn finish(self) -> Result<Manifest, CliError> {
        let manifest = Manifest {
            tool: "kicked",
            library_version: kicked_rotor::VERSION,
            complete: self.failures.is_empty(),
            files: self.files,
            failures: self.failures,
        };
        let path = self.root.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("serializable");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(manifest)
    }
}

/// A CSV table with a header row and a `# units:` line.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        let mut text = String::new();
        let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
        let units: Vec<String> = columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
        writeln!(text, "{}", names.join(",")).unwrap();
        writeln!(text, "# units: {}", units.join(", ")).unwrap();
        Self {
            text,
            columns: columns.len(),
        }
    }

    /// Floats use Rust's shortest round-trip formatting.
    pub fn row(&mut self, first: impl std::fmt::Display, rest: &[f64]) {
        debug_assert_eq!(rest.len() + 1, self.columns);
        write!(self.text, "{first}").unwrap();
        for v in rest {
            write!(self.text, ",{v:?}").unwrap();
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Reads a numeric CSV written by [`Csv`], returning the header and rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Input(format!("{} is empty", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Input(format!("{} data row {}: {e}", path.display(), n + 1)))?;
        if row.len() != header.len() {
            return Err(CliError::Input(format!(
                "{} data row {} has {} fields, expected {}",
                path.display(),
                n + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut csv = Csv::new(&[("kick_index", "kicks"), ("E_q", "1"), ("E_c", "1")]);
        csv.row(0, &[0.0, 0.0]);
        csv.row(1, &[1.5e-300, 3.0625]);
        let text = String::from_utf8(csv.into_bytes()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("kick_index,E_q,E_c"));
        assert!(lines.next().unwrap().starts_with("# units:"));
        assert_eq!(lines.next(), Some("0,0.0,0.0"));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        fs::write(&path, &text).unwrap();
        let (header, rows) = read_csv(&path).unwrap();
        assert_eq!(header, ["kick_index", "E_q", "E_c"]);
        assert_eq!(rows[1], vec![1.0, 1.5e-300, 3.0625]);
    }

    #[test]
    fn digests_match_contents() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::create(dir.path()).unwrap();
        out.write("a/b.txt", b"abc").unwrap();
        let m = out.finish().unwrap();
        assert_eq!(
            m.files[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert!(dir.path().join("manifest.json").exists());
    }
}
