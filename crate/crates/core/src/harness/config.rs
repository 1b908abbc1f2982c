use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EmbedTree,
    TrainImage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldChoice {
    Poincare,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Rsgd,
    Radam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    Csv,
    Svg,
}

/// A fully resolved run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub manifold: ManifoldChoice,
    pub curvature: f64,
    pub learnable_curvature: bool,
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub momentum: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub lr_decay: f64,
    pub lr_decay_every: usize,
    pub depth: usize,
    pub branching: usize,
    pub tau: f64,
    pub classes: usize,
    pub synthetic: bool,
    pub samples: usize,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub crop: Option<usize>,
    pub downscale: Option<usize>,
    pub checkpoint_out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
    pub export_disk: Option<PathBuf>,
    pub export_format: ExportFormat,
}

impl RunConfig {
    /// Defaults for `command`.
    pub fn defaults(command: Command) -> Self {
        let image = command == Command::TrainImage;
        Self {
            command,
            manifold: ManifoldChoice::Poincare,
            curvature: 1.0,
            learnable_curvature: false,
            dim: 2,
            epochs: if image { 20 } else { 3000 },
            lr: if image { 1e-3 } else { 0.03 },
            optimizer: OptimizerKind::Radam,
            momentum: 0.9,
            batch_size: 32,
            seed: 7,
            lr_decay: 1.0,
            lr_decay_every: 1,
            depth: 3,
            branching: 2,
            tau: 0.3,
            classes: 2,
            synthetic: image,
            samples: 512,
            train_images: None,
            train_labels: None,
            crop: None,
            downscale: None,
            checkpoint_out: None,
            metrics_out: None,
            export_disk: None,
            export_format: ExportFormat::Csv,
        }
    }

    /// Defaults, then the optional file, then `flags`.
    pub fn resolve(command: Command, file: Option<&Path>, flags: &ConfigLayer) -> Result<Self> {
        let mut cfg = Self::defaults(command);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply(&ConfigLayer::parse(&text)?);
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, layer: &ConfigLayer) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if let Some(v) = &layer.$f {
                    self.$f = v.clone();
                }
            )*};
        }
        macro_rules! take_opt {
            ($($f:ident),*) => {$(
                if let Some(v) = &layer.$f {
                    self.$f = Some(v.clone());
                }
            )*};
        }
        take!(
            manifold, curvature, learnable_curvature, dim, epochs, lr, optimizer, momentum, batch_size, seed,
            lr_decay, lr_decay_every, depth, branching, tau, classes, synthetic, samples, export_format
        );
        take_opt!(train_images, train_labels, crop, downscale, checkpoint_out, metrics_out, export_disk);
        // Naming data files implies they are the data, unless stated otherwise.
        if layer.synthetic.is_none() && (layer.train_images.is_some() || layer.train_labels.is_some()) {
            self.synthetic = false;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.curvature.is_finite() && self.curvature > 0.0) {
            return fail(format!("curvature must be positive, got {}", self.curvature));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return fail(format!("lr must be positive, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return fail(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) || self.lr_decay_every == 0 {
            return fail("lr-decay must lie in (0, 1] with lr-decay-every >= 1".into());
        }
        if self.learnable_curvature && self.manifold == ManifoldChoice::Euclidean {
            return fail("learnable curvature needs the poincare manifold".into());
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return fail("epochs and batch-size must be positive".into());
        }
        match self.command {
            Command::EmbedTree => {
                if self.dim < 2 {
                    return fail(format!("dim must be at least 2, got {}", self.dim));
                }
                if self.depth < 1 || self.branching < 2 {
                    return fail("trees need depth >= 1 and branching >= 2".into());
                }
                if !(self.tau.is_finite() && self.tau > 0.0) {
                    return fail(format!("tau must be positive, got {}", self.tau));
                }
                if self.export_disk.is_some() && self.dim != 2 {
                    return fail("disk export needs dim = 2".into());
                }
            }
            Command::TrainImage => {
                if self.classes < 2 {
                    return fail(format!("classes must be at least 2, got {}", self.classes));
                }
                let files = self.train_images.is_some() || self.train_labels.is_some();
                if self.synthetic && files {
                    return fail("choose either --synthetic or IDX files, not both".into());
                }
                if !self.synthetic && (self.train_images.is_none() || self.train_labels.is_none()) {
                    return fail("IDX training needs both --train-images and --train-labels".into());
                }
                if self.synthetic && (self.samples < 2 || self.classes != 2) {
                    return fail("the synthetic bars task has 2 classes and needs >= 2 samples".into());
                }
                if self.crop == Some(0) || self.downscale == Some(0) {
                    return fail("crop and downscale must be positive".into());
                }
            }
        }
        Ok(())
    }
}

/// A partial configuration: every field optional, same key names as
/// [`RunConfig`]. Config files and command-line flags both produce one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigLayer {
    pub manifold: Option<ManifoldChoice>,
    pub curvature: Option<f64>,
    pub learnable_curvature: Option<bool>,
    pub dim: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub momentum: Option<f64>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub lr_decay: Option<f64>,
    pub lr_decay_every: Option<usize>,
    pub depth: Option<usize>,
    pub branching: Option<usize>,
    pub tau: Option<f64>,
    pub classes: Option<usize>,
    pub synthetic: Option<bool>,
    pub samples: Option<usize>,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub crop: Option<usize>,
    pub downscale: Option<usize>,
    pub checkpoint_out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
    pub export_disk: Option<PathBuf>,
    pub export_format: Option<ExportFormat>,
}

impl ConfigLayer {
    /// Parses `key = value` lines (TOML); unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "lr = 0.5\nepochs = 10\nmanifold = \"euclidean\"\n").unwrap();
        let flags = ConfigLayer {
            epochs: Some(4),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Command::EmbedTree, Some(&path), &flags).unwrap();
        assert_eq!(cfg.lr, 0.5);
        assert_eq!(cfg.epochs, 4);
        assert_eq!(cfg.manifold, ManifoldChoice::Euclidean);
    }

    #[test]
    fn files_switch_off_synthetic() {
        let flags = ConfigLayer {
            train_images: Some("i.idx".into()),
            train_labels: Some("l.idx".into()),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Command::TrainImage, None, &flags).unwrap();
        assert!(!cfg.synthetic);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ConfigLayer::parse("learning-rate = 0.1"), Err(Error::Config(_))));
    }

    #[test]
    fn ranges_checked() {
        let mut cfg = RunConfig::defaults(Command::EmbedTree);
        cfg.curvature = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::defaults(Command::TrainImage);
        cfg.synthetic = false;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn serializes_back() {
        let cfg = RunConfig::defaults(Command::TrainImage);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
