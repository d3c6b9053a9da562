//! Multi-view datasets: `V` feature matrices of shape `d_v x n` describing
//! the same `n` samples, plus optional ground-truth cluster ids.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, MatrixFormat};
use crate::linalg::ensure_finite;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<Array2<f64>>,
    labels: Option<Vec<usize>>,
    k: Option<usize>,
}

impl MultiViewDataset {
    /// Builds a dataset, checking that every view has the same number of
    /// columns, no view is empty, and all entries are finite.
    pub fn new(views: Vec<Array2<f64>>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::Schema("a dataset needs at least one view".into()));
        }
        let n = views[0].ncols();
        for (v, x) in views.iter().enumerate() {
            if x.nrows() == 0 || x.ncols() == 0 {
                return Err(Error::Schema(format!("view {v} is empty ({}x{})", x.nrows(), x.ncols())));
            }
            if x.ncols() != n {
                return Err(Error::Schema(format!(
                    "view {v} has {} samples but view 0 has {n}",
                    x.ncols()
                )));
            }
            ensure_finite(x, &format!("view {v}"))?;
        }
        Ok(MultiViewDataset {
            views,
            labels: None,
            k: None,
        })
    }

    /// Attaches ground-truth labels. `k` defaults to `max(label) + 1`.
    pub fn with_labels(mut self, labels: Vec<usize>, k: Option<usize>) -> Result<Self> {
        if labels.len() != self.n_samples() {
            return Err(Error::Schema(format!(
                "{} labels for {} samples",
                labels.len(),
                self.n_samples()
            )));
        }
        let k = k.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Schema(format!("label {bad} is not below k = {k}")));
        }
        self.labels = Some(labels);
        self.k = Some(k);
        Ok(self)
    }

    pub fn views(&self) -> &[Array2<f64>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &Array2<f64> {
        &self.views[v]
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].ncols()
    }

    /// Total feature count `d = Σ d_v`.
    pub fn total_features(&self) -> usize {
        self.views.iter().map(|x| x.nrows()).sum()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    /// Scales every nonzero column of every view to unit ℓ2 norm.
    pub fn normalize_columns(&self) -> Self {
        let views = self
            .views
            .iter()
            .map(|x| {
                let mut x = x.clone();
                normalize_columns_in_place(&mut x);
                x
            })
            .collect();
        MultiViewDataset {
            views,
            labels: self.labels.clone(),
            k: self.k,
        }
    }
}

/// Zero columns stay zero.
pub fn normalize_columns_in_place(x: &mut Array2<f64>) {
    for mut col in x.axis_iter_mut(Axis(1)) {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col /= norm;
        }
    }
}

/// On-disk description of a dataset. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub views: Vec<ViewEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub path: String,
    pub format: MatrixFormat,
}

pub fn load_dataset(manifest_path: &Path) -> Result<MultiViewDataset> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::format(manifest_path, format!("bad manifest: {e}")))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let views = manifest
        .views
        .iter()
        .map(|entry| io::read_matrix(&resolve(&entry.path), entry.format))
        .collect::<Result<Vec<_>>>()?;
    let dataset = MultiViewDataset::new(views)?;
    match &manifest.labels {
        Some(labels_path) => {
            let labels = io::read_labels(&resolve(labels_path))?;
            dataset.with_labels(labels, manifest.k)
        }
        None => Ok(MultiViewDataset {
            k: manifest.k,
            ..dataset
        }),
    }
}

/// Writes `view_<v>.<ext>` files, `labels.csv` (if present) and
/// `manifest.json` into `dir`, returning the manifest path.
pub fn save_dataset(dataset: &MultiViewDataset, dir: &Path, format: MatrixFormat) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(dataset.n_views());
    for (v, x) in dataset.views().iter().enumerate() {
        let name = format!("view_{}.{}", v + 1, format.extension());
        io::write_matrix(&dir.join(&name), x, format)?;
        entries.push(ViewEntry { path: name, format });
    }
    let labels = match dataset.labels() {
        Some(l) => {
            io::write_labels(&dir.join("labels.csv"), l)?;
            Some("labels.csv".to_string())
        }
        None => None,
    };
    let manifest = Manifest {
        views: entries,
        labels,
        k: dataset.k(),
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
