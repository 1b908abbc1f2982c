//! Tree embedding with the quadratic distortion loss
//! `Σ_{i<j} (d(xᵢ, xⱼ) − τ·d_G(i, j))²`, one full-batch step per epoch.

use crate::error::{Error, Result};
use crate::harness::checkpoint::{Checkpoint, RunState};
use crate::harness::config::{Command, RunConfig};
use crate::harness::metrics::{write_metrics, MetricRow};
use crate::harness::tree::{generate_tree, TreeSpec};
use crate::harness::{build_manifold, build_optimizer, build_schedule, restore_run, trainable};
use crate::manifolds::Manifold;
use crate::nn::{HEmbedding, ParamInit};
use crate::optim::{Optimizer, StepDecay};
use crate::tensor::Tensor;

pub struct EmbedOutcome {
    pub embedding: HEmbedding,
    pub manifold: Manifold,
    pub metrics: Vec<MetricRow>,
    pub distortion: f64,
    pub final_loss: f64,
}

pub struct EmbedSession {
    config: RunConfig,
    tree: TreeSpec,
    manifold: Manifold,
    embedding: HEmbedding,
    optimizer: Box<dyn Optimizer>,
    schedule: StepDecay,
    left: Vec<usize>,
    right: Vec<usize>,
    target: Tensor,
    epochs_done: usize,
}

impl EmbedSession {
    /// Fresh session for the tree described by `config`.
    pub fn new(config: &RunConfig) -> Result<Self> {
        let tree = generate_tree(config.depth, config.branching, config.seed)?;
        Self::for_tree(tree, config)
    }

    pub fn for_tree(tree: TreeSpec, config: &RunConfig) -> Result<Self> {
        if config.command != Command::EmbedTree {
            return Err(Error::Config("embedding sessions need an embed-tree config".into()));
        }
        config.validate()?;
        let manifold = build_manifold(config)?;
        let mut init = ParamInit::new(config.seed);
        let embedding = HEmbedding::new(tree.node_count(), config.dim, &manifold, &mut init)?;
        let optimizer = build_optimizer(config, trainable(&manifold, embedding.parameters()))?;
        let d = tree.distances();
        let n = tree.node_count();
        let (mut left, mut right, mut target) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..n {
            for j in i + 1..n {
                left.push(i);
                right.push(j);
                target.push(config.tau * d[i][j] as f64);
            }
        }
        let pairs = target.len();
        Ok(Self {
            config: config.clone(),
            tree,
            manifold,
            embedding,
            optimizer,
            schedule: build_schedule(config)?,
            left,
            right,
            target: Tensor::from_vec(target, &[pairs])?,
            epochs_done: 0,
        })
    }

    /// Rebuilds the session stored in `ck`; `epochs` overrides the planned
    /// total.
    pub fn resume(ck: &Checkpoint, epochs: Option<usize>) -> Result<Self> {
        let Some(run) = &ck.run else {
            return Err(Error::Data("checkpoint has no run state to resume".into()));
        };
        let mut config = run.config.clone();
        if let Some(e) = epochs {
            config.epochs = e;
        }
        let mut s = Self::new(&config)?;
        let run = restore_run(ck, &s.manifold, &s.embedding.parameters(), s.optimizer.as_mut())?;
        s.schedule = build_schedule(&config)?.resume_at(run.epochs_done);
        s.epochs_done = run.epochs_done;
        Ok(s)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn tree(&self) -> &TreeSpec {
        &self.tree
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn embedding(&self) -> &HEmbedding {
        &self.embedding
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    fn pair_distances(&self) -> Result<Tensor> {
        let a = self.embedding.forward(&self.left)?;
        let b = self.embedding.forward(&self.right)?;
        self.manifold.dist(&a, &b)
    }

    /// Current value of the loss as a graph scalar.
    pub fn loss(&self) -> Result<Tensor> {
        Ok(self.pair_distances()?.sub(&self.target)?.square().sum_all())
    }

    /// Mean of `|d / (τ·d_G) − 1|` over all node pairs.
    pub fn distortion(&self) -> Result<f64> {
        let d = self.pair_distances()?.detach();
        let rel = d.div(&self.target)?.add_scalar(-1.0);
        let total: f64 = rel.data().iter().map(|v| v.abs()).sum();
        Ok(total / rel.numel() as f64)
    }

    /// One optimizer step; the row carries the loss before the step.
    pub fn train_epoch(&mut self) -> Result<MetricRow> {
        self.optimizer.zero_grad();
        let loss = self.loss()?;
        let value = loss.item()?;
        if !value.is_finite() {
            return Err(Error::Numeric(format!("loss became {value} at epoch {}", self.epochs_done + 1)));
        }
        loss.backward()?;
        self.optimizer.step()?;
        self.epochs_done += 1;
        self.schedule.epoch_end(self.optimizer.as_mut());
        Ok(MetricRow {
            epoch: self.epochs_done,
            step: self.epochs_done,
            loss: value,
            accuracy: None,
        })
    }

    /// Trains until `config.epochs` epochs are done.
    pub fn run(&mut self) -> Result<Vec<MetricRow>> {
        let mut rows = Vec::with_capacity(self.config.epochs.saturating_sub(self.epochs_done));
        while self.epochs_done < self.config.epochs {
            rows.push(self.train_epoch()?);
        }
        Ok(rows)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::capture(&self.manifold, &self.embedding.parameters()).with_run(RunState {
            config: self.config.clone(),
            epochs_done: self.epochs_done,
            steps_done: self.epochs_done,
            lr: self.optimizer.lr(),
            optimizer: self.optimizer.state(),
        })
    }

    /// Writes the checkpoint, metrics and disk export requested by the config.
    pub fn write_outputs(&self, rows: &[MetricRow]) -> Result<()> {
        if let Some(path) = &self.config.checkpoint_out {
            self.checkpoint().save(path)?;
        }
        if let Some(path) = &self.config.metrics_out {
            write_metrics(path, rows)?;
        }
        if let Some(path) = &self.config.export_disk {
            let labels: Vec<String> = (0..self.tree.node_count()).map(|i| self.tree.label(i)).collect();
            crate::harness::export::export_disk(&self.embedding, &labels, path, self.config.export_format)?;
        }
        Ok(())
    }

    pub fn finish(self, metrics: Vec<MetricRow>) -> Result<EmbedOutcome> {
        let distortion = self.distortion()?;
        let final_loss = self.loss()?.item()?;
        Ok(EmbedOutcome {
            embedding: self.embedding,
            manifold: self.manifold,
            metrics,
            distortion,
            final_loss,
        })
    }
}

/// Trains an embedding of `tree` and reports its distortion.
pub fn embed_hierarchy(tree: &TreeSpec, config: &RunConfig) -> Result<EmbedOutcome> {
    let mut session = EmbedSession::for_tree(tree.clone(), config)?;
    let rows = session.run()?;
    session.write_outputs(&rows)?;
    session.finish(rows)
}
