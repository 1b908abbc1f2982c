//! Desk-scale experiment harness: tree embedding, small-image
//! classification, IDX ingestion, checkpoints, metrics and disk export.
//! The `hypnn` binary is a thin wrapper over this module.

pub mod checkpoint;
pub mod config;
pub mod embed;
pub mod export;
pub mod idx;
pub mod image;
pub mod metrics;
pub mod tree;

pub use checkpoint::{Checkpoint, CurvatureRecord, ParamKind, ParamRecord, RunState};
pub use config::{Command, ConfigLayer, ExportFormat, ManifoldChoice, OptimizerKind, RunConfig};
pub use embed::{embed_hierarchy, EmbedOutcome, EmbedSession};
pub use export::{export_checkpoint, export_coordinates, export_disk};
pub use idx::{load_idx, ImageSet};
pub use image::{batch_order, synthetic_bars, train_image, ConvNet, ImageOutcome, ImageSession};
pub use metrics::{read_metrics, write_metrics, MetricRow};
pub use tree::{generate_tree, TreeSpec};

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::manifolds::{Curvature, Manifold};
use crate::nn::{NamedParam, Param};
use crate::optim::{Optimizer, RAdamConfig, RSgdConfig, RiemannianAdam, RiemannianSgd, StepDecay};

/// The manifold a run trains on.
pub fn build_manifold(cfg: &RunConfig) -> Result<Manifold> {
    Ok(match cfg.manifold {
        ManifoldChoice::Euclidean => Manifold::euclidean(),
        ManifoldChoice::Poincare => Manifold::poincare_ball(Curvature::new(cfg.curvature, cfg.learnable_curvature)?),
    })
}

/// Model parameters plus the raw curvature when it is learnable.
pub fn trainable(manifold: &Manifold, mut params: Vec<NamedParam>) -> Vec<NamedParam> {
    if let Some(c) = manifold.curvature().filter(|c| c.learnable()) {
        params.push(NamedParam::new("curvature", Param::Euclidean(c.raw().clone())));
    }
    params
}

pub fn build_optimizer(cfg: &RunConfig, params: Vec<NamedParam>) -> Result<Box<dyn Optimizer>> {
    Ok(match cfg.optimizer {
        OptimizerKind::Rsgd => Box::new(RiemannianSgd::new(params, RSgdConfig::new(cfg.lr).with_momentum(cfg.momentum))?),
        OptimizerKind::Radam => Box::new(RiemannianAdam::new(params, RAdamConfig::new(cfg.lr))?),
    })
}

pub fn build_schedule(cfg: &RunConfig) -> Result<StepDecay> {
    StepDecay::new(cfg.lr_decay, cfg.lr_decay_every)
}

/// Everything a session needs to pick up where a checkpoint left off.
pub(crate) fn restore_run(
    ck: &Checkpoint,
    manifold: &Manifold,
    model_params: &[NamedParam],
    optimizer: &mut dyn Optimizer,
) -> Result<RunState> {
    let run = ck
        .run
        .clone()
        .ok_or_else(|| crate::Error::Data("checkpoint has no run state to resume".into()))?;
    ck.restore_into(manifold, model_params)?;
    optimizer.load_state(run.optimizer.clone())?;
    optimizer.set_lr(run.lr);
    Ok(run)
}

/// What a finished run reports.
#[derive(Clone, Debug, PartialEq)]
pub enum Summary {
    Embed { epochs: usize, loss: f64, distortion: f64 },
    /// `loss` is the last training step's.
    Image { epochs: usize, loss: f64, accuracy: f64 },
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Summary::Embed { epochs, loss, distortion } => {
                write!(f, "epochs {epochs}  loss {loss:.6e}  mean distortion {distortion:.6}")
            }
            Summary::Image { epochs, loss, accuracy } => {
                write!(f, "epochs {epochs}  last loss {loss:.6}  train accuracy {accuracy:.4}")
            }
        }
    }
}

/// Runs `cfg` from scratch and writes the requested outputs.
pub fn run(cfg: &RunConfig) -> Result<Summary> {
    match cfg.command {
        Command::EmbedTree => finish_embed(EmbedSession::new(cfg)?),
        Command::TrainImage => finish_image(ImageSession::new(cfg)?),
    }
}

/// Continues the run stored at `path`. `epochs` raises the planned total;
/// the output paths replace those recorded in the checkpoint when given.
pub fn resume(
    path: &Path,
    epochs: Option<usize>,
    checkpoint_out: Option<PathBuf>,
    metrics_out: Option<PathBuf>,
) -> Result<Summary> {
    let mut ck = Checkpoint::load(path)?;
    let Some(run) = ck.run.as_mut() else {
        return Err(Error::Data(format!("{} holds no run state", path.display())));
    };
    if checkpoint_out.is_some() {
        run.config.checkpoint_out = checkpoint_out;
    }
    if metrics_out.is_some() {
        run.config.metrics_out = metrics_out;
    }
    match run.config.command {
        Command::EmbedTree => finish_embed(EmbedSession::resume(&ck, epochs)?),
        Command::TrainImage => finish_image(ImageSession::resume(&ck, epochs)?),
    }
}

fn finish_embed(mut s: EmbedSession) -> Result<Summary> {
    let rows = s.run()?;
    s.write_outputs(&rows)?;
    Ok(Summary::Embed {
        epochs: s.epochs_done(),
        loss: s.loss()?.item()?,
        distortion: s.distortion()?,
    })
}

fn finish_image(mut s: ImageSession) -> Result<Summary> {
    let out = s.run()?;
    let (loss, accuracy) = match (out.metrics.last(), out.train_accuracy.last()) {
        (Some(row), Some(&acc)) => (row.loss, acc),
        _ => s.evaluate()?,
    };
    Ok(Summary::Image {
        epochs: s.epochs_done(),
        loss,
        accuracy,
    })
}
