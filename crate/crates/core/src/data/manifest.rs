use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Contents of `manifest.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub views: Vec<String>,
    pub features: String,
    pub labels: Option<String>,
    pub scale_features: bool,
}

impl DatasetManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(Error::MissingFile(path));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
            file: path.clone(),
            message: e.to_string(),
        })?;
        m.validate(&path)?;
        Ok(m)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let bad = |message: String| Error::Manifest {
            file: path.to_path_buf(),
            message,
        };
        if self.views.is_empty() {
            return Err(bad("at least one view is required".into()));
        }
        if self.n == 0 || self.d == 0 {
            return Err(bad(format!("n = {} and d = {} must be positive", self.n, self.d)));
        }
        if self.k == 0 || self.k > self.n {
            return Err(bad(format!("k = {} must lie in [1, n = {}]", self.k, self.n)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
