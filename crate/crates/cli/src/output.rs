//! CSV and key-value files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{render, RunSpec};
use crate::error::{HarnessError, Result};

/// Shortest text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Csv {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Csv {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(HarnessError::io(path))?;
        let mut csv = Csv {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        csv.line(&header.join(","))?;
        Ok(csv)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(HarnessError::io(&self.path))
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        let joined = fields
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(",");
        self.line(&joined)
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(HarnessError::io(&self.path))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.flush()?;
        Ok(self.path)
    }
}

/// `key = value` lines.
pub fn write_kv(path: &Path, pairs: &[(&str, String)]) -> Result<PathBuf> {
    let mut text = String::new();
    for (k, v) in pairs {
        text.push_str(&format!("{k} = {v}\n"));
    }
    std::fs::write(path, text).map_err(HarnessError::io(path))?;
    Ok(path.to_path_buf())
}

/// Writes `manifest.cfg` (a config that reproduces the run) and, separately,
/// `timestamp.txt`.
pub fn write_manifest(dir: &Path, spec: &RunSpec) -> Result<Vec<PathBuf>> {
    let manifest = dir.join("manifest.cfg");
    let text = format!(
        "# chemowave {} manifest\n\
         # deterministic: fixed-step explicit scheme; sampling uses the seed below\n{}",
        env!("CARGO_PKG_VERSION"),
        render(spec)
    );
    std::fs::write(&manifest, text).map_err(HarnessError::io(&manifest))?;
    let stamp = dir.join("timestamp.txt");
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    std::fs::write(&stamp, format!("unix_seconds = {secs}\n")).map_err(HarnessError::io(&stamp))?;
    Ok(vec![manifest, stamp])
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -6.325, 66.66666666666667, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(opt(None), "");
    }
}
