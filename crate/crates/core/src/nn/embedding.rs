use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::nn::{NamedParam, Param, ParamInit};
use crate::tensors::{ManifoldParameter, ManifoldTensor, OnManifold};

/// A table of points looked up by index; one row per entry.
pub struct HEmbedding {
    table: ManifoldParameter,
}

impl HEmbedding {
    pub fn new(entries: usize, dim: usize, manifold: &Manifold, init: &mut ParamInit) -> Result<Self> {
        Ok(Self {
            table: init.points(&[entries, dim], manifold, 1)?,
        })
    }

    pub fn from_table(table: ManifoldParameter) -> Result<Self> {
        if table.tensor().rank() != 2 || table.man_dim() != 1 {
            return Err(Error::dimension("embedding table must be entries × dim with points along axis 1"));
        }
        Ok(Self { table })
    }

    pub fn entries(&self) -> usize {
        self.table.tensor().shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.table.tensor().shape()[1]
    }

    pub fn table(&self) -> &ManifoldParameter {
        &self.table
    }

    pub fn manifold(&self) -> &Manifold {
        self.table.manifold()
    }

    /// Rows at `indices`, as a `len × dim` tensor of points.
    pub fn forward(&self, indices: &[usize]) -> Result<ManifoldTensor> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.entries()) {
            return Err(Error::Data(format!("index {bad} outside a table of {}", self.entries())));
        }
        let rows = self.table.tensor().index_select(0, indices)?;
        Ok(ManifoldTensor::trusted(rows, self.manifold().clone(), 1))
    }

    pub fn parameters(&self) -> Vec<NamedParam> {
        vec![NamedParam::new("table", Param::Point(self.table.clone()))]
    }
}
