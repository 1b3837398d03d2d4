use crate::error::{Error, Result};

/// A finite Markov chain given by its transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    p: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl FiniteChain {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..p.len()).map(|i| i.to_string()).collect();
        Self::with_labels(p, labels)
    }

    pub fn with_labels(p: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let n = p.len();
        if n == 0 || labels.len() != n {
            return Err(Error::InvalidInput("chain needs n >= 1 states and n labels".into()));
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!("row {i} has {} entries", row.len())));
            }
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidInput(format!("row {i} has entries outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { p, labels })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i]
    }

    /// `(P v)_i = Σ_j p_ij v_j`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.p
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}
