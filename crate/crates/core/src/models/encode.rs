use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};

/// How one input feature maps to design columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Block {
    /// `(x - shift) / scale`
    Numeric { shift: f64, scale: f64 },
    /// Indicator columns for levels `first..levels`.
    OneHot { levels: usize, first: usize },
}

/// Maps raw feature vectors to numeric design vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub blocks: Vec<Block>,
}

impl Encoder {
    pub fn identity(n: usize) -> Self {
        Self { blocks: vec![Block::Numeric { shift: 0.0, scale: 1.0 }; n] }
    }

    /// Raw numeric columns, dummy coding with the first level dropped.
    pub fn for_linear(d: &Dataset) -> Self {
        Self::fit(d, false, true)
    }

    /// Standardized numeric columns, full one-hot coding.
    pub fn for_network(d: &Dataset) -> Self {
        Self::fit(d, true, false)
    }

    fn fit(d: &Dataset, standardize: bool, drop_first: bool) -> Self {
        let blocks = d
            .features()
            .iter()
            .enumerate()
            .map(|(j, f)| match f.kind {
                FeatureKind::Categorical => Block::OneHot {
                    levels: f.categories.as_ref().map_or(0, Vec::len),
                    first: usize::from(drop_first),
                },
                _ if standardize => {
                    let col = d.column(j);
                    let mean = crate::stats::mean(&col);
                    let sd = crate::stats::population_variance(&col).sqrt();
                    Block::Numeric { shift: mean, scale: if sd > 1e-12 { sd } else { 1.0 } }
                }
                _ => Block::Numeric { shift: 0.0, scale: 1.0 },
            })
            .collect();
        Self { blocks }
    }

    pub fn width(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Numeric { .. } => 1,
                Block::OneHot { levels, first } => levels.saturating_sub(*first),
            })
            .sum()
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        for (b, &v) in self.blocks.iter().zip(x) {
            match b {
                Block::Numeric { shift, scale } => out.push((v - shift) / scale),
                Block::OneHot { levels, first } => {
                    out.extend((*first..*levels).map(|l| if v as usize == l { 1.0 } else { 0.0 }))
                }
            }
        }
        out
    }
}
