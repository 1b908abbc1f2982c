//! Saves a half-finished embedding run, resumes it from disk and writes the
//! final layout to the unit disk as CSV.

use hypnn::harness::{export_checkpoint, Checkpoint, Command, EmbedSession, ExportFormat, RunConfig};
use hypnn::Result;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join(format!("hypnn-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let ck_path = dir.join("half.json");

    let mut cfg = RunConfig::defaults(Command::EmbedTree);
    cfg.depth = 2;
    cfg.epochs = 200;
    let mut first = EmbedSession::new(&cfg)?;
    for _ in 0..100 {
        first.train_epoch()?;
    }
    first.checkpoint().save(&ck_path)?;
    println!("saved after {} epochs, distortion {:.4}", first.epochs_done(), first.distortion()?);

    let mut second = EmbedSession::resume(&Checkpoint::load(&ck_path)?, None)?;
    second.run()?;
    println!("resumed to {} epochs, distortion {:.4}", second.epochs_done(), second.distortion()?);

    let final_ck = dir.join("final.json");
    second.checkpoint().save(&final_ck)?;
    let csv = dir.join("disk.csv");
    export_checkpoint(&Checkpoint::load(&final_ck)?, &csv, ExportFormat::Csv)?;
    print!("{}", std::fs::read_to_string(&csv)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
