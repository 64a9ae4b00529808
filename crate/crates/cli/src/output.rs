use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// A set of output files that appear together or not at all.
///
/// Each file is first written next to its destination under a hidden
/// temporary name, and renamed into place by [`Staged::commit`]. Dropping
/// an uncommitted set removes the temporaries.
pub struct Staged {
    dir: PathBuf,
    files: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl Staged {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Staged {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            committed: false,
        })
    }

    pub fn add(&mut self, name: &str, contents: &[u8]) -> CliResult<()> {
        let tmp = self.dir.join(format!(".{name}.partial"));
        let dest = self.dir.join(name);
        // record first so a failed write is still cleaned up
        self.files.push((tmp.clone(), dest));
        fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))
    }

    pub fn commit(mut self) -> CliResult<Vec<PathBuf>> {
        for (tmp, dest) in &self.files {
            fs::rename(tmp, dest).map_err(|e| CliError::io(dest, e))?;
        }
        self.committed = true;
        Ok(self.files.iter().map(|(_, d)| d.clone()).collect())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _) in &self.files {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}
