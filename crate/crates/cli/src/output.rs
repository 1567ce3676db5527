//! Output formatting and atomic file writes.
//!
//! Every floating-point value is printed with 9 significant digits so repeat
//! runs diff cleanly; files are written to a temporary sibling and renamed
//! into place.

use std::fs;
use std::path::{Path, PathBuf};

use sfwm_core::error::Result;

/// 9-significant-digit scientific form.
pub fn fmt(x: f64) -> String {
    format!("{x:.8e}")
}

/// Write atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = tmp_sibling(path);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn tmp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Assemble a CSV from a header and rows of already-formatted fields.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
