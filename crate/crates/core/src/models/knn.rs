//! k-nearest-neighbour regression and classification.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnDistance {
    /// Plain Euclidean distance; categorical cells contribute 0/1 mismatch.
    Euclidean,
    /// Gower distance: range-normalised absolute difference for numeric
    /// cells, 0/1 mismatch for categorical cells, averaged over features.
    Gower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnTask {
    /// Mean of the neighbours' targets.
    Regression,
    /// Majority label, ties to the lowest label.
    Classification { classes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub distance: KnnDistance,
    pub task: KnnTask,
    pub categorical: Vec<bool>,
    pub ranges: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl KnnModel {
    pub(crate) fn fit(d: &Dataset, k: usize, distance: KnnDistance, task: KnnTask) -> Self {
        let ranges = (0..d.n_features())
            .map(|j| {
                let col = d.column(j);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    hi - lo
                } else {
                    1.0
                }
            })
            .collect();
        Self {
            k,
            distance,
            task,
            categorical: d.features().iter().map(|f| f.kind == FeatureKind::Categorical).collect(),
            ranges,
            rows: d.rows().to_vec(),
            targets: d.targets().to_vec(),
        }
    }

    fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let terms = a.iter().zip(b).enumerate().map(|(j, (x, y))| {
            if self.categorical[j] {
                f64::from(u8::from(x != y))
            } else {
                match self.distance {
                    KnnDistance::Euclidean => (x - y) * (x - y),
                    KnnDistance::Gower => (x - y).abs() / self.ranges[j],
                }
            }
        });
        match self.distance {
            KnnDistance::Euclidean => terms.sum::<f64>().sqrt(),
            KnnDistance::Gower => terms.sum::<f64>() / a.len().max(1) as f64,
        }
    }

    /// Indices of the `k` nearest training rows, ordered by (distance, index).
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self.rows.iter().enumerate().map(|(i, r)| (self.dist(x, r), i)).collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let nn = self.neighbours(x);
        match self.task {
            KnnTask::Regression => nn.iter().map(|&i| self.targets[i]).sum::<f64>() / nn.len() as f64,
            KnnTask::Classification { classes } => {
                let mut votes = vec![0usize; classes.max(1)];
                for &i in &nn {
                    votes[self.targets[i] as usize] += 1;
                }
                let mut best = 0;
                for (c, &v) in votes.iter().enumerate() {
                    if v > votes[best] {
                        best = c;
                    }
                }
                best as f64
            }
        }
    }
}
