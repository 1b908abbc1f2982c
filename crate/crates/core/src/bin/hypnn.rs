use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypnn::harness::{self, Command, ConfigLayer, ExportFormat, ManifoldChoice, OptimizerKind, RunConfig};
use hypnn::Error;

#[derive(Parser)]
#[command(name = "hypnn", version, about = "Hyperbolic embedding and image classification runs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Embed a balanced tree and report its distortion.
    #[command(allow_negative_numbers = true)]
    EmbedTree {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        branching: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        export_disk: Option<PathBuf>,
        #[arg(long, value_enum)]
        export_format: Option<Format>,
    },
    /// Train the convolutional classifier.
    #[command(allow_negative_numbers = true)]
    TrainImage {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, requires = "train_labels")]
        train_images: Option<PathBuf>,
        #[arg(long, requires = "train_images")]
        train_labels: Option<PathBuf>,
        #[arg(long, conflicts_with = "train_images")]
        synthetic: bool,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        crop: Option<usize>,
        #[arg(long)]
        downscale: Option<usize>,
    },
    /// Write the embedding stored in a checkpoint as CSV or SVG.
    ExportDisk {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Continue a run from its checkpoint.
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        /// New total number of epochs.
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        checkpoint_out: Option<PathBuf>,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Shared {
    #[arg(long, value_enum)]
    manifold: Option<Space>,
    #[arg(long)]
    curvature: Option<f64>,
    #[arg(long)]
    learnable_curvature: bool,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, value_enum)]
    optimizer: Option<Opt>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr_decay: Option<f64>,
    #[arg(long)]
    lr_decay_every: Option<usize>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    checkpoint_out: Option<PathBuf>,
    #[arg(long)]
    metrics_out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Space {
    Poincare,
    Euclidean,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Opt {
    Rsgd,
    Radam,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Csv,
    Svg,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ExportFormat::Csv,
            Format::Svg => ExportFormat::Svg,
        }
    }
}

impl Shared {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            manifold: self.manifold.map(|m| match m {
                Space::Poincare => ManifoldChoice::Poincare,
                Space::Euclidean => ManifoldChoice::Euclidean,
            }),
            curvature: self.curvature,
            learnable_curvature: self.learnable_curvature.then_some(true),
            dim: self.dim,
            epochs: self.epochs,
            lr: self.lr,
            optimizer: self.optimizer.map(|o| match o {
                Opt::Rsgd => OptimizerKind::Rsgd,
                Opt::Radam => OptimizerKind::Radam,
            }),
            momentum: self.momentum,
            batch_size: self.batch_size,
            seed: self.seed,
            lr_decay: self.lr_decay,
            lr_decay_every: self.lr_decay_every,
            checkpoint_out: self.checkpoint_out.clone(),
            metrics_out: self.metrics_out.clone(),
            ..ConfigLayer::default()
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Data(_) | Error::Io(_) => 3,
        Error::Numeric(_) => 4,
        _ => 1,
    }
}

fn dispatch(cmd: Cmd) -> hypnn::Result<String> {
    match cmd {
        Cmd::EmbedTree {
            shared,
            depth,
            branching,
            tau,
            export_disk,
            export_format,
        } => {
            let layer = ConfigLayer {
                depth,
                branching,
                tau,
                export_disk,
                export_format: export_format.map(Into::into),
                ..shared.layer()
            };
            let cfg = RunConfig::resolve(Command::EmbedTree, shared.config.as_deref(), &layer)?;
            Ok(harness::run(&cfg)?.to_string())
        }
        Cmd::TrainImage {
            shared,
            train_images,
            train_labels,
            synthetic,
            classes,
            samples,
            crop,
            downscale,
        } => {
            let layer = ConfigLayer {
                train_images,
                train_labels,
                synthetic: synthetic.then_some(true),
                classes,
                samples,
                crop,
                downscale,
                ..shared.layer()
            };
            let cfg = RunConfig::resolve(Command::TrainImage, shared.config.as_deref(), &layer)?;
            Ok(harness::run(&cfg)?.to_string())
        }
        Cmd::ExportDisk { checkpoint, out, format } => {
            let ck = harness::Checkpoint::load(&checkpoint)?;
            harness::export_checkpoint(&ck, &out, format.into())?;
            Ok(format!("wrote {}", out.display()))
        }
        Cmd::Resume {
            checkpoint,
            epochs,
            checkpoint_out,
            metrics_out,
        } => Ok(harness::resume(&checkpoint, epochs, checkpoint_out, metrics_out)?.to_string()),
    }
}
