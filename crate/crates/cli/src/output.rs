use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::runner::OutputFile;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::user("write outputs", format!("{}: {e}", path.display()))
}

/// Writes each file to a temporary sibling and renames it into place. If
/// any step fails, every file written by this call is removed again.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut placed: Vec<PathBuf> = Vec::new();
    let mut temps: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for f in files {
            let target = dir.join(&f.name);
            let temp = dir.join(format!(".{}.tmp", f.name));
            temps.push(temp.clone());
            let mut handle = fs::File::create(&temp).map_err(|e| io_error(&temp, e))?;
            handle.write_all(&f.contents).map_err(|e| io_error(&temp, e))?;
            handle.sync_all().map_err(|e| io_error(&temp, e))?;
            fs::rename(&temp, &target).map_err(|e| io_error(&target, e))?;
            placed.push(target);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in temps.iter().chain(&placed) {
            let _ = fs::remove_file(p);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_and_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![
            OutputFile {
                name: "a.csv".into(),
                contents: b"x\n".to_vec(),
            },
            OutputFile {
                name: "missing/b.csv".into(),
                contents: b"y\n".to_vec(),
            },
        ];
        assert!(write_outputs(dir.path(), &files).is_err());
        assert!(!dir.path().join("a.csv").exists());

        write_outputs(dir.path(), &files[..1]).unwrap();
        assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), b"x\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
