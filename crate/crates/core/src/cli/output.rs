use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::TaylorField;
use crate::field_file;
use crate::mesh::{read_mesh, write_mesh, Mesh};

/// Files are written into a hidden staging directory and moved into place
/// only after every one of them was written and read back. A failed run
/// leaves nothing behind.
pub(crate) struct Staging {
    out_dir: PathBuf,
    dir: PathBuf,
    files: Vec<String>,
}

impl Staging {
    pub fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let dir = out_dir.join(format!(".staging-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { out_dir: out_dir.to_path_buf(), dir, files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn field(&mut self, name: &str, field: &TaylorField) -> Result<()> {
        let path = self.path(name);
        let bytes = field_file::encode(field);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        let back = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if back != bytes || field_file::decode(&back)?.len() != field.len() {
            return Err(Error::format("field", format!("{} did not read back", path.display())));
        }
        Ok(())
    }

    pub fn mesh(&mut self, name: &str, mesh: &Mesh) -> Result<()> {
        let path = self.path(name);
        write_mesh(mesh, &path)?;
        let back = read_mesh(&path)?;
        if back.triangles != mesh.triangles || back.vertices.len() != mesh.vertices.len() {
            return Err(Error::format("mesh", format!("{} did not read back", path.display())));
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format("json", e.to_string()))?;
        text.push('\n');
        fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
        let back = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str::<serde_json::Value>(&back).map_err(|e| Error::format("json", e.to_string()))?;
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::format("csv", e.to_string()))?;
        for r in rows {
            w.serialize(r).map_err(|e| Error::format("csv", e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        drop(w);
        let n = csv::Reader::from_path(&path).map_err(|e| Error::format("csv", e.to_string()))?.records().count();
        if n != rows.len() {
            return Err(Error::format("csv", format!("{} has {n} rows, wrote {}", path.display(), rows.len())));
        }
        Ok(())
    }

    /// Moves every staged file into the output directory.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut out = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let (from, to) = (self.dir.join(name), self.out_dir.join(name));
            fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
            out.push(to);
        }
        Ok(out)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}
