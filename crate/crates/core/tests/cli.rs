use std::path::Path;
use std::process::{Command, Output};

fn hypnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypnn")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn embed_resume_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let metrics = dir.path().join("m.csv");
    let disk = dir.path().join("disk.csv");
    let out = hypnn(&[
        "embed-tree", "--epochs", "30", "--depth", "2", "--checkpoint-out", arg(&ck), "--metrics-out", arg(&metrics),
        "--export-disk", arg(&disk),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean distortion"));
    let text = std::fs::read_to_string(&metrics).unwrap();
    assert!(text.starts_with("epoch,step,loss,accuracy\n"));
    assert_eq!(text.lines().count(), 31);
    assert!(text.lines().nth(1).unwrap().ends_with(','));
    assert_eq!(std::fs::read_to_string(&disk).unwrap().lines().count(), 8);

    let more = dir.path().join("m2.csv");
    let out = hypnn(&["resume", "--checkpoint", arg(&ck), "--epochs", "40", "--metrics-out", arg(&more)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tail = std::fs::read_to_string(&more).unwrap();
    assert_eq!(tail.lines().nth(1).unwrap().split(',').next(), Some("31"));

    let svg = dir.path().join("disk.svg");
    let out = hypnn(&["export-disk", "--checkpoint", arg(&ck), "--out", arg(&svg), "--format", "svg"]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn resumed_run_continues_the_uninterrupted_one() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    assert!(hypnn(&["embed-tree", "--epochs", "20", "--depth", "2", "--metrics-out", arg(&full)]).status.success());
    let ck = dir.path().join("half.json");
    assert!(hypnn(&["embed-tree", "--epochs", "10", "--depth", "2", "--checkpoint-out", arg(&ck)]).status.success());
    let rest = dir.path().join("rest.csv");
    assert!(hypnn(&["resume", "--checkpoint", arg(&ck), "--epochs", "20", "--metrics-out", arg(&rest)]).status.success());
    let full = std::fs::read_to_string(full).unwrap();
    let rest = std::fs::read_to_string(rest).unwrap();
    let tail: Vec<&str> = full.lines().skip(11).collect();
    assert_eq!(rest.lines().skip(1).collect::<Vec<_>>(), tail);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "epochs = 5\ndepth = 1\nmanifold = \"euclidean\"\n").unwrap();
    let metrics = dir.path().join("m.csv");
    let out = hypnn(&["embed-tree", "--config", arg(&cfg), "--epochs", "3", "--metrics-out", arg(&metrics)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&metrics).unwrap().lines().count(), 4);

    std::fs::write(&cfg, "epoch = 5\n").unwrap();
    assert_eq!(hypnn(&["embed-tree", "--config", arg(&cfg)]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(hypnn(&["embed-tree", "--curvature", "-1"]).status.code(), Some(2));
    assert_eq!(hypnn(&["embed-tree", "--dim", "1"]).status.code(), Some(2));
    assert_eq!(hypnn(&["embed-tree", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(hypnn(&["train-image", "--classes", "1"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.idx");
    let out = hypnn(&["train-image", "--train-images", arg(&missing), "--train-labels", arg(&missing)]);
    assert_eq!(out.status.code(), Some(3));

    let bad = dir.path().join("bad.idx");
    std::fs::write(&bad, [0u8, 0, 0x27, 0x0f, 0, 0, 0, 1]).unwrap();
    let out = hypnn(&["train-image", "--train-images", arg(&bad), "--train-labels", arg(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));

    let ck = dir.path().join("ck.json");
    std::fs::write(&ck, "{\"params\": []}").unwrap();
    assert_eq!(hypnn(&["resume", "--checkpoint", arg(&ck)]).status.code(), Some(3));
    assert_eq!(hypnn(&["export-disk", "--checkpoint", arg(&ck), "--out", arg(&dir.path().join("o.csv"))]).status.code(), Some(3));

    // A step size this large overflows the loss.
    let out = hypnn(&["embed-tree", "--manifold", "euclidean", "--optimizer", "rsgd", "--momentum", "0", "--lr", "1e200", "--epochs", "5"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn idx_training_from_files() {
    use hypnn::harness::{idx, synthetic_bars};
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = idx::encode_idx(&synthetic_bars(32, 1).unwrap());
    let (ip, lp) = (dir.path().join("img.idx"), dir.path().join("lab.idx"));
    std::fs::write(&ip, images).unwrap();
    std::fs::write(&lp, labels).unwrap();
    let metrics = dir.path().join("m.csv");
    let out = hypnn(&[
        "train-image", "--train-images", arg(&ip), "--train-labels", arg(&lp), "--epochs", "1", "--batch-size", "16",
        "--metrics-out", arg(&metrics),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&metrics).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(!text.lines().nth(1).unwrap().ends_with(','));
}
