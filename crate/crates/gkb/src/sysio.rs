//! Saddle systems stored as a directory of Matrix Market files:
//! `M.mtx`, `A.mtx`, `g.mtx`, `r.mtx` plus `meta.txt` holding `eta=<real>`.

use std::path::{Path, PathBuf};

use gkb_core::SaddleSystem;

use crate::error::{Error, Result};
use crate::mm;

pub const META_FILE: &str = "meta.txt";

fn require(dir: &Path, name: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingFile { path })
    }
}

/// Reads `eta` from the meta file. Blank lines and `#` comments are allowed.
pub fn parse_meta(path: &Path, text: &str) -> Result<f64> {
    let mut eta = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, found '{line}'")))?;
        match key.trim() {
            "eta" => {
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("invalid eta '{}'", value.trim())))?;
                eta = Some(v);
            }
            other => return Err(parse_err(format!("unknown key '{other}'"))),
        }
    }
    eta.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "no eta entry".into(),
    })
}

pub fn load_system(dir: impl AsRef<Path>) -> Result<SaddleSystem> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::MissingFile {
            path: dir.to_path_buf(),
        });
    }
    let m = mm::read_matrix(require(dir, "M.mtx")?)?;
    let a = mm::read_matrix(require(dir, "A.mtx")?)?;
    let g = mm::read_vector(require(dir, "g.mtx")?)?;
    let r = mm::read_vector(require(dir, "r.mtx")?)?;
    let meta = require(dir, META_FILE)?;
    let text = std::fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
    let eta = parse_meta(&meta, &text)?;
    SaddleSystem::new(m, a, eta, g, r).map_err(|source| Error::System {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes the five files, creating `dir` if needed.
pub fn save_system(dir: impl AsRef<Path>, system: &SaddleSystem) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    mm::write_matrix(dir.join("M.mtx"), system.m())?;
    mm::write_matrix(dir.join("A.mtx"), system.a())?;
    mm::write_vector(dir.join("g.mtx"), system.g())?;
    mm::write_vector(dir.join("r.mtx"), system.r())?;
    let meta = dir.join(META_FILE);
    std::fs::write(&meta, format!("eta={}\n", system.eta())).map_err(|e| Error::io(&meta, e))
}
