use serde::{Deserialize, Serialize};

use crate::dist::DistributionModel;
use crate::error::{domain, Error, Result};

/// Canonical process `X_t = Σ tᵢXᵢ`: one standardized model per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    models: Vec<DistributionModel>,
}

impl ProcessSpec {
    pub fn new(models: Vec<DistributionModel>) -> Result<Self> {
        if models.is_empty() {
            return domain("a process needs at least one coordinate");
        }
        Ok(Self { models })
    }

    /// `n` independent copies of `model`.
    pub fn iid(model: DistributionModel, n: usize) -> Self {
        assert!(n >= 1, "a process needs at least one coordinate");
        Self { models: vec![model; n] }
    }

    pub fn dimension(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[DistributionModel] {
        &self.models
    }

    pub fn model(&self, i: usize) -> &DistributionModel {
        &self.models[i]
    }

    /// All coordinates share one law.
    pub fn is_iid(&self) -> bool {
        self.models.windows(2).all(|w| w[0] == w[1])
    }

    pub(crate) fn check_dimension(&self, found: usize) -> Result<()> {
        if found != self.dimension() {
            return Err(Error::Dimension { expected: self.dimension(), found });
        }
        Ok(())
    }
}

/// Finite index set `T ⊂ ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl IndexSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return domain("index set dimension must be >= 1");
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::Dimension { expected: dim, found: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return domain("index set coordinates must be finite");
            }
        }
        Ok(Self { dim, points, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return domain("one label per point is required");
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// `{e₁, …, eₙ}`.
    pub fn basis(n: usize) -> Result<Self> {
        let points = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        Self::new(n, points)
    }

    /// `{c·t : t ∈ T}`.
    pub fn scaled(&self, c: f64) -> Self {
        let points = self.points.iter().map(|p| p.iter().map(|x| c * x).collect()).collect();
        Self { dim: self.dim, points, labels: self.labels.clone() }
    }

    /// The points with the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        let labels = self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i].clone()).collect());
        Self { dim: self.dim, points, labels }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of point `i`, or its index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }
}
