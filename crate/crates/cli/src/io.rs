//! File helpers. `-` names stdin or stdout where a command allows it.

use std::fmt::Display;
use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use textprep::{CorpusLine, DecompositionDb};

use crate::error::{io_error, CliError, Result};

pub fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

pub fn read_text(path: &Path) -> Result<String> {
    let mut bytes = Vec::new();
    if is_stdio(path) {
        io::stdin()
            .read_to_end(&mut bytes)
            .map_err(|e| io_error(Path::new("<stdin>"), e))?;
    } else {
        bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    }
    String::from_utf8(bytes).map_err(|e| {
        CliError::input(format!(
            "{}: invalid UTF-8 at byte {}",
            path.display(),
            e.utf8_error().valid_up_to()
        ))
    })
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?.lines().map(str::to_string).collect())
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusLine>> {
    Ok(read_text(path)?.lines().map(CorpusLine::from).collect())
}

/// Writes through a temporary sibling and a rename, so a failed run never
/// leaves a truncated file behind.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if is_stdio(path) {
        let mut out = io::stdout().lock();
        return out
            .write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| io_error(Path::new("<stdout>"), e));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let tmp = sibling(path, &format!(".tmp{}", std::process::id()));
    fs::write(&tmp, text).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

pub fn write_lines<T: Display>(path: &Path, lines: &[T]) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    write_text(path, &text)
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = BufReader::new(fs::File::open(path).map_err(|e| io_error(path, e))?);
    let mut h = Sha256::new();
    io::copy(&mut file, &mut h).map_err(|e| io_error(path, e))?;
    Ok(hex::encode(h.finalize()))
}

/// Loads `ids.txt` and `strokes.txt` from `dir`, or the bundled fixture.
pub fn load_db(dir: Option<&Path>) -> Result<DecompositionDb> {
    let Some(dir) = dir else {
        return textprep::fixture::db().map_err(|e| CliError::input(format!("bundled database: {e}")));
    };
    if !dir.is_dir() {
        return Err(CliError::input(format!(
            "{}: expected a directory holding ids.txt and strokes.txt",
            dir.display()
        )));
    }
    let open = |name: &str| {
        let p = dir.join(name);
        fs::File::open(&p).map(BufReader::new).map_err(|e| io_error(&p, e))
    };
    DecompositionDb::load(open("ids.txt")?, open("strokes.txt")?)
        .map_err(|e| CliError::input(format!("{}: {e}", dir.display())))
}
