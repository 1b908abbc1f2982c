//! Small-image classification with a LeNet-style network: inputs are lifted
//! to the manifold with `exp₀` along the channel axis, then pass through
//! conv, ReLU and max-pool blocks, three fully connected layers and an MLR
//! head.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::checkpoint::{Checkpoint, RunState};
use crate::harness::config::{Command, RunConfig};
use crate::harness::idx::{load_idx, ImageSet};
use crate::harness::metrics::{write_metrics, MetricRow};
use crate::harness::{build_manifold, build_optimizer, build_schedule, restore_run, trainable};
use crate::manifolds::Manifold;
use crate::nn::{
    cross_entropy, lift_to_manifold, HConv2d, HFlatten, HLinear, HMlr, HPool2d, HReLU, Module, NamedParam, ParamInit,
    Sequential,
};
use crate::optim::{Optimizer, StepDecay};
use crate::tensor::{conv_output_size, Tensor};

const KERNEL: usize = 5;
const POOL: usize = 2;

/// conv(1→6, 5) → ReLU → pool 2 → conv(6→16, 5) → ReLU → pool 2 → flatten
/// → fc 120 → ReLU → fc 84 → ReLU → MLR.
pub struct ConvNet {
    body: Sequential,
    head: HMlr,
    manifold: Manifold,
}

impl ConvNet {
    pub fn new(manifold: &Manifold, height: usize, width: usize, classes: usize, init: &mut ParamInit) -> Result<Self> {
        let block = |h: usize| conv_output_size(h, KERNEL, 1, 0).map(|h| h / POOL).filter(|&h| h > 0);
        let out = |h: usize| block(h).and_then(block);
        let (Some(oh), Some(ow)) = (out(height), out(width)) else {
            return Err(Error::Config(format!("{height}×{width} images are too small for the network")));
        };
        let m = manifold;
        let body = Sequential::new(m)
            .with(HConv2d::new(1, 6, KERNEL, m, init)?)?
            .with(HReLU::new(m))?
            .with(HPool2d::max(POOL, m))?
            .with(HConv2d::new(6, 16, KERNEL, m, init)?)?
            .with(HReLU::new(m))?
            .with(HPool2d::max(POOL, m))?
            .with(HFlatten::new(m))?
            .with(HLinear::new(16 * oh * ow, 120, m, init)?)?
            .with(HReLU::new(m))?
            .with(HLinear::new(120, 84, m, init)?)?
            .with(HReLU::new(m))?;
        let head = HMlr::new(84, classes, m, init)?;
        Ok(Self {
            body,
            head,
            manifold: m.clone(),
        })
    }

    /// `N×1×H×W` raw images to `N×K` logits.
    pub fn logits(&self, images: &Tensor) -> Result<Tensor> {
        let x = lift_to_manifold(images, &self.manifold, 1)?;
        self.head.forward(&self.body.forward(&x)?)
    }

    pub fn parameters(&self) -> Vec<NamedParam> {
        let mut out = self.body.parameters();
        out.extend(self.head.parameters().into_iter().map(|p| NamedParam::new(format!("head.{}", p.name), p.param)));
        out
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn set_training(&self, training: bool) {
        self.body.set_training(training);
    }
}

/// Two-class 16×16 task: class 0 has a horizontal bar, class 1 a vertical
/// one, each two pixels thick at a random offset, over faint uniform noise.
/// Labels alternate, so every prefix is balanced.
pub fn synthetic_bars(samples: usize, seed: u64) -> Result<ImageSet> {
    const SIDE: usize = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut pixels = Vec::with_capacity(samples * SIDE * SIDE);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let label = i % 2;
        let offset = rng.random_range(1..SIDE - 2);
        let level = rng.random_range(0.7..1.0);
        for r in 0..SIDE {
            for c in 0..SIDE {
                let along = if label == 0 { r } else { c };
                let noise = rng.random_range(0.0..0.15);
                let on = along == offset || along == offset + 1;
                pixels.push(if on { level } else { noise });
            }
        }
        labels.push(label);
    }
    ImageSet::new(SIDE, SIDE, 2, pixels, labels)
}

/// Minibatches for one epoch: a seeded shuffle of `0..n`, one stream per
/// epoch so any epoch can be replayed in isolation.
pub fn batch_order(n: usize, batch: usize, seed: u64, epoch: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64 + 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    idx.chunks(batch.max(1)).map(<[usize]>::to_vec).collect()
}

pub struct ImageOutcome {
    pub metrics: Vec<MetricRow>,
    /// Full-pass training accuracy after each epoch.
    pub train_accuracy: Vec<f64>,
}

pub struct ImageSession {
    config: RunConfig,
    manifold: Manifold,
    net: ConvNet,
    data: ImageSet,
    optimizer: Box<dyn Optimizer>,
    schedule: StepDecay,
    epochs_done: usize,
    steps_done: usize,
}

impl ImageSession {
    /// Loads the data named by `config` and builds a fresh model.
    pub fn new(config: &RunConfig) -> Result<Self> {
        let data = if config.synthetic {
            synthetic_bars(config.samples, config.seed)?
        } else {
            let (Some(images), Some(labels)) = (&config.train_images, &config.train_labels) else {
                return Err(Error::Config("IDX training needs image and label files".into()));
            };
            load_idx(images, labels, config.classes, config.crop, config.downscale)?
        };
        Self::with_data(config, data)
    }

    pub fn with_data(config: &RunConfig, data: ImageSet) -> Result<Self> {
        if config.command != Command::TrainImage {
            return Err(Error::Config("image sessions need a train-image config".into()));
        }
        config.validate()?;
        if data.is_empty() {
            return Err(Error::Data("the training set is empty".into()));
        }
        if data.classes != config.classes {
            return Err(Error::Config(format!("data has {} classes, config {}", data.classes, config.classes)));
        }
        let manifold = build_manifold(config)?;
        let mut init = ParamInit::new(config.seed);
        let net = ConvNet::new(&manifold, data.height, data.width, config.classes, &mut init)?;
        let optimizer = build_optimizer(config, trainable(&manifold, net.parameters()))?;
        Ok(Self {
            config: config.clone(),
            manifold,
            net,
            data,
            optimizer,
            schedule: build_schedule(config)?,
            epochs_done: 0,
            steps_done: 0,
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
        let run = restore_run(ck, &s.manifold, &s.net.parameters(), s.optimizer.as_mut())?;
        s.schedule = build_schedule(&config)?.resume_at(run.epochs_done);
        s.epochs_done = run.epochs_done;
        s.steps_done = run.steps_done;
        Ok(s)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn net(&self) -> &ConvNet {
        &self.net
    }

    pub fn data(&self) -> &ImageSet {
        &self.data
    }

    pub fn optimizer(&self) -> &dyn Optimizer {
        self.optimizer.as_ref()
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    fn batch_loss(&self, indices: &[usize]) -> Result<(Tensor, f64)> {
        let (images, labels) = self.data.batch(indices)?;
        let logits = self.net.logits(&images)?;
        let acc = accuracy(&logits, &labels);
        Ok((cross_entropy(&logits, &labels)?, acc))
    }

    /// Loss of the first minibatch of the next epoch, without training.
    pub fn next_step_loss(&self) -> Result<f64> {
        let order = batch_order(self.data.len(), self.config.batch_size, self.config.seed, self.epochs_done);
        self.batch_loss(&order[0])?.0.item()
    }

    /// Mean loss and accuracy over the whole training set.
    pub fn evaluate(&self) -> Result<(f64, f64)> {
        self.net.set_training(false);
        let all: Vec<usize> = (0..self.data.len()).collect();
        let (mut loss, mut correct) = (0.0, 0.0);
        for chunk in all.chunks(self.config.batch_size) {
            let (l, acc) = self.batch_loss(chunk)?;
            loss += l.item()? * chunk.len() as f64;
            correct += acc * chunk.len() as f64;
        }
        self.net.set_training(true);
        let n = self.data.len() as f64;
        Ok((loss / n, correct / n))
    }

    /// One pass over the shuffled data; one metrics row per step.
    pub fn train_epoch(&mut self) -> Result<Vec<MetricRow>> {
        let order = batch_order(self.data.len(), self.config.batch_size, self.config.seed, self.epochs_done);
        let mut rows = Vec::with_capacity(order.len());
        for indices in &order {
            self.optimizer.zero_grad();
            let (loss, acc) = self.batch_loss(indices)?;
            let value = loss.item()?;
            if !value.is_finite() {
                return Err(Error::Numeric(format!(
                    "loss became {value} at epoch {}, step {}",
                    self.epochs_done + 1,
                    self.steps_done + 1
                )));
            }
            loss.backward()?;
            self.optimizer.step()?;
            self.steps_done += 1;
            rows.push(MetricRow {
                epoch: self.epochs_done + 1,
                step: self.steps_done,
                loss: value,
                accuracy: Some(acc),
            });
        }
        self.epochs_done += 1;
        self.schedule.epoch_end(self.optimizer.as_mut());
        if let Some(path) = &self.config.checkpoint_out {
            self.checkpoint().save(path)?;
        }
        Ok(rows)
    }

    /// Trains until `config.epochs` epochs are done, then writes metrics.
    pub fn run(&mut self) -> Result<ImageOutcome> {
        let mut metrics = Vec::new();
        let mut train_accuracy = Vec::new();
        while self.epochs_done < self.config.epochs {
            metrics.extend(self.train_epoch()?);
            train_accuracy.push(self.evaluate()?.1);
        }
        if let Some(path) = &self.config.metrics_out {
            write_metrics(path, &metrics)?;
        }
        Ok(ImageOutcome {
            metrics,
            train_accuracy,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::capture(&self.manifold, &self.net.parameters()).with_run(RunState {
            config: self.config.clone(),
            epochs_done: self.epochs_done,
            steps_done: self.steps_done,
            lr: self.optimizer.lr(),
            optimizer: self.optimizer.state(),
        })
    }
}

/// Trains the network described by `config` on `data`.
pub fn train_image(config: &RunConfig, data: ImageSet) -> Result<ImageOutcome> {
    ImageSession::with_data(config, data)?.run()
}

/// Fraction of rows whose largest logit is the label (first maximum wins).
pub fn accuracy(logits: &Tensor, labels: &[usize]) -> f64 {
    let k = logits.shape()[1];
    let data = logits.data();
    let hits = data
        .chunks(k)
        .zip(labels)
        .filter(|(row, &label)| {
            let best = row
                .iter()
                .enumerate()
                .fold(0, |b, (i, &v)| if v > row[b] { i } else { b });
            best == label
        })
        .count();
    hits as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bars_are_balanced_and_seeded() {
        let a = synthetic_bars(10, 3).unwrap();
        assert_eq!(a, synthetic_bars(10, 3).unwrap());
        assert_ne!(a, synthetic_bars(10, 4).unwrap());
        assert_eq!(a.labels.iter().filter(|&&l| l == 1).count(), 5);
        assert!(a.pixels.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn batches_cover_every_index_once() {
        let order = batch_order(70, 32, 1, 0);
        assert_eq!(order.iter().map(Vec::len).collect::<Vec<_>>(), [32, 32, 6]);
        let mut all: Vec<usize> = order.concat();
        all.sort_unstable();
        assert_eq!(all, (0..70).collect::<Vec<_>>());
        assert_ne!(batch_order(70, 32, 1, 0), batch_order(70, 32, 1, 1));
    }

    #[test]
    fn network_shapes() {
        let b = Manifold::ball(1.0).unwrap();
        let net = ConvNet::new(&b, 16, 16, 3, &mut ParamInit::new(0)).unwrap();
        let logits = net.logits(&Tensor::full(0.3, &[2, 1, 16, 16])).unwrap();
        assert_eq!(logits.shape(), &[2, 3]);
        assert_eq!(net.parameters().len(), 10);
        assert!(ConvNet::new(&b, 8, 8, 2, &mut ParamInit::new(0)).is_err());
    }

    #[test]
    fn first_epoch_descends() {
        let mut cfg = RunConfig::defaults(Command::TrainImage);
        cfg.samples = 64;
        cfg.batch_size = 16;
        cfg.lr = 3e-3;
        let mut s = ImageSession::new(&cfg).unwrap();
        let (before, _) = s.evaluate().unwrap();
        s.train_epoch().unwrap();
        let (after, _) = s.evaluate().unwrap();
        assert!(after < before, "{after} >= {before}");
    }

    #[test]
    fn accuracy_counts_argmax() {
        let l = Tensor::matrix(&[&[0.1, 0.9], &[2.0, -1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(accuracy(&l, &[1, 1, 0]), 2.0 / 3.0);
    }
}
