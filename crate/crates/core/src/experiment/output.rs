//! CSV result files. Every file starts with a fixed header row and is written
//! through a temporary sibling that is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::stats::PValueMatrix;

pub const GENERATIONS_HEADER: &str = "run,method,generation,alive,train_rmse,test_rmse";
pub const SUMMARY_HEADER: &str = "run,method,final_test_rmse,final_alive,mean_alive";
pub const MATRIX_HEADER: &str = "method_i,method_j,p_value,significant";
pub const REMOVALS_HEADER: &str = "run,method,generation,removed,survivor,weight,score";

/// One row of the per-generation file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub method: String,
    pub generation: usize,
    pub alive: usize,
    pub train_rmse: f64,
    pub test_rmse: f64,
}

/// One row of the summary file.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub run: usize,
    pub method: String,
    pub final_test_rmse: f64,
    pub final_alive: usize,
    pub mean_alive: f64,
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn render_generations(rows: &[RunRecord]) -> String {
    let mut out = String::from(GENERATIONS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.run, r.method, r.generation, r.alive, r.train_rmse, r.test_rmse
        ));
    }
    out
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.run, r.method, r.final_test_rmse, r.final_alive, r.mean_alive
        ));
    }
    out
}

pub fn render_matrix(m: &PValueMatrix) -> String {
    let mut out = String::from(MATRIX_HEADER);
    out.push('\n');
    for e in &m.entries {
        out.push_str(&format!("{},{},{},{}\n", m.methods[e.i], m.methods[e.j], e.p, e.significant));
    }
    out
}

fn rows<'a>(path: &Path, text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header {header:?}"),
            })
        }
    }
    let width = header.split(',').count();
    lines
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() != width {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            Ok((i + 1, fields))
        })
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        line,
        message: format!("bad {name} {value:?}"),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = read(path)?;
    rows(path, &text, SUMMARY_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(SummaryRow {
                run: field(path, line, "run", f[0])?,
                method: f[1].to_string(),
                final_test_rmse: field(path, line, "final_test_rmse", f[2])?,
                final_alive: field(path, line, "final_alive", f[3])?,
                mean_alive: field(path, line, "mean_alive", f[4])?,
            })
        })
        .collect()
}

pub fn read_generations(path: &Path) -> Result<Vec<RunRecord>> {
    let text = read(path)?;
    rows(path, &text, GENERATIONS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(RunRecord {
                run: field(path, line, "run", f[0])?,
                method: f[1].to_string(),
                generation: field(path, line, "generation", f[2])?,
                alive: field(path, line, "alive", f[3])?,
                train_rmse: field(path, line, "train_rmse", f[4])?,
                test_rmse: field(path, line, "test_rmse", f[5])?,
            })
        })
        .collect()
}
