use crate::hash::{ContentHash, Hasher};

/// Fully numeric, model-ready rows: no missing values, row-major features.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeIndexedDataset {
    pub feature_names: Vec<String>,
    features: Vec<f64>,
    pub labels: Vec<u8>,
    pub vintage: Vec<u32>,
    pub row_ids: Vec<u64>,
    pub groups: Option<Vec<u32>>,
}

impl TimeIndexedDataset {
    /// # Panics
    /// If the shapes disagree.
    pub fn new(feature_names: Vec<String>, features: Vec<f64>, labels: Vec<u8>, vintage: Vec<u32>) -> Self {
        let n = labels.len();
        assert_eq!(features.len(), n * feature_names.len(), "feature matrix shape");
        assert_eq!(vintage.len(), n, "vintage length");
        Self {
            feature_names,
            features,
            labels,
            vintage,
            row_ids: (0..n as u64).collect(),
            groups: None,
        }
    }

    /// Convenience constructor for tests and toy data: all rows in month 0.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[u8]) -> Self {
        let n_features = rows.first().map_or(0, Vec::len);
        let names = (0..n_features).map(|j| format!("x{j}")).collect();
        let flat = rows.iter().flatten().copied().collect();
        Self::new(names, flat, labels.to_vec(), vec![0; labels.len()])
    }

    pub fn with_row_ids(mut self, ids: Vec<u64>) -> Self {
        assert_eq!(ids.len(), self.n_rows());
        self.row_ids = ids;
        self
    }

    pub fn with_groups(mut self, groups: Vec<u32>) -> Self {
        assert_eq!(groups.len(), self.n_rows());
        self.groups = Some(groups);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_features();
        &self.features[i * n..(i + 1) * n]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.n_features() + j]
    }

    pub fn set_value(&mut self, i: usize, j: usize, v: f64) {
        let n = self.n_features();
        self.features[i * n + j] = v;
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.value(i, j)).collect()
    }

    /// Column-major copy of the feature matrix.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        let n = self.n_features();
        let mut cols = vec![Vec::with_capacity(self.n_rows()); n];
        for row in self.features.chunks_exact(n.max(1)).take(self.n_rows()) {
            for (c, &v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
        cols
    }

    pub fn bad_rate(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().map(|&y| y as f64).sum::<f64>() / self.n_rows() as f64
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        let n = self.n_features();
        let mut features = Vec::with_capacity(rows.len() * n);
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Self {
            feature_names: self.feature_names.clone(),
            features,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            vintage: rows.iter().map(|&r| self.vintage[r]).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
            groups: self.groups.as_ref().map(|g| rows.iter().map(|&r| g[r]).collect()),
        }
    }

    /// Bit-level hash of every field.
    pub fn content_hash(&self) -> ContentHash {
        let mut h = Hasher::new();
        h.update_json(&self.feature_names);
        let bits: Vec<u8> = self.features.iter().flat_map(|v| v.to_bits().to_le_bytes()).collect();
        h.update(bits);
        h.update(&self.labels);
        h.update_json(&self.vintage);
        h.update_json(&self.row_ids);
        h.update_json(&self.groups);
        h.finish()
    }
}
