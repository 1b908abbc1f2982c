//! Trains the convolutional classifier with a hyperbolic head on the
//! synthetic bars task.

use hypnn::harness::{synthetic_bars, train_image, Command, RunConfig};
use hypnn::Result;

fn main() -> Result<()> {
    let mut cfg = RunConfig::defaults(Command::TrainImage);
    cfg.epochs = 3;
    let data = synthetic_bars(cfg.samples, cfg.seed)?;
    let out = train_image(&cfg, data)?;
    for row in out.metrics.iter().filter(|r| r.step % 8 == 0) {
        println!("epoch {} step {:>2}  loss {:.4}", row.epoch, row.step, row.loss);
    }
    println!("training accuracy per epoch {:?}", out.train_accuracy);
    Ok(())
}
