use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub index: usize,
    pub score: f64,
    /// 1 = most important; ties broken by lower feature index.
    pub rank: usize,
}

/// Non-negative per-feature importance scores, in feature order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub entries: Vec<ImportanceEntry>,
}

impl ImportanceReport {
    /// Builds a report from `(feature index, name, score)`; negative scores
    /// are clipped to 0.
    pub fn from_scores<I, S>(scores: I) -> Self
    where
        I: IntoIterator<Item = (usize, S, f64)>,
        S: Into<String>,
    {
        let mut entries: Vec<ImportanceEntry> = scores
            .into_iter()
            .map(|(index, name, score)| ImportanceEntry {
                feature: name.into(),
                index,
                score: if score > 0.0 { score } else { 0.0 },
                rank: 0,
            })
            .collect();
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by(|&a, &b| {
            entries[b]
                .score
                .total_cmp(&entries[a].score)
                .then(entries[a].index.cmp(&entries[b].index))
        });
        for (rank, k) in order.into_iter().enumerate() {
            entries[k].rank = rank + 1;
        }
        Self { entries }
    }

    pub fn get(&self, feature: &str) -> Option<&ImportanceEntry> {
        self.entries.iter().find(|e| e.feature == feature)
    }

    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.get(feature).map(|e| e.rank)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.score).sum()
    }

    /// Fraction of the total importance mass held by `feature`.
    pub fn share(&self, feature: &str) -> Option<f64> {
        let total = self.total();
        self.get(feature)
            .map(|e| if total > 0.0 { e.score / total } else { 0.0 })
    }

    pub fn ranked(&self) -> Vec<&ImportanceEntry> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by_key(|e| e.rank);
        v
    }
}
