use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::checkpoint::{Checkpoint, ManifoldTag};
use crate::harness::config::{Command, ExportFormat};
use crate::harness::tree::generate_tree;
use crate::nn::HEmbedding;

const VIEW: f64 = 400.0;

/// Writes a two-dimensional embedding as disk coordinates.
///
/// Ball points are rescaled by `√c` so they lie in the unit disk whatever
/// the curvature. Euclidean tables are written as they are.
pub fn export_disk(embedding: &HEmbedding, labels: &[String], path: &Path, format: ExportFormat) -> Result<()> {
    if embedding.dim() != 2 {
        return Err(Error::Dimension(format!("disk export needs dim = 2, got {}", embedding.dim())));
    }
    let scale = embedding.manifold().curvature().map_or(1.0, |c| c.value_f64().sqrt());
    let data = embedding.table().value().tensor().to_vec();
    let coords: Vec<[f64; 2]> = data.chunks(2).map(|p| [p[0] * scale, p[1] * scale]).collect();
    export_coordinates(&coords, labels, path, format)
}

/// Exports the `table` parameter of an embedding checkpoint.
pub fn export_checkpoint(ck: &Checkpoint, path: &Path, format: ExportFormat) -> Result<()> {
    let rec = ck
        .params
        .iter()
        .find(|p| p.name == "table")
        .ok_or_else(|| Error::Data("checkpoint holds no embedding table".into()))?;
    if rec.shape.len() != 2 || rec.shape[1] != 2 {
        return Err(Error::Dimension(format!("disk export needs an N×2 table, got {:?}", rec.shape)));
    }
    let scale = match (rec.manifold, &ck.curvature) {
        (ManifoldTag::Poincare, Some(c)) => crate::tensor::softplus(c.raw).sqrt(),
        _ => 1.0,
    };
    let coords: Vec<[f64; 2]> = rec.data.chunks(2).map(|p| [p[0] * scale, p[1] * scale]).collect();
    let labels: Vec<String> = match ck.run.as_ref().map(|r| &r.config) {
        Some(cfg) if cfg.command == Command::EmbedTree => {
            let tree = generate_tree(cfg.depth, cfg.branching, cfg.seed)?;
            (0..coords.len()).map(|i| tree.label(i)).collect()
        }
        _ => (0..coords.len()).map(|i| if i == 0 { "root".into() } else { format!("n{i}") }).collect(),
    };
    export_coordinates(&coords, &labels, path, format)
}

/// `csv`: `node_id,label,x,y`, one row per node. `svg`: unit circle plus one
/// marker per node; points outside the disk widen the viewport.
pub fn export_coordinates(coords: &[[f64; 2]], labels: &[String], path: &Path, format: ExportFormat) -> Result<()> {
    if coords.len() != labels.len() {
        return Err(Error::Data(format!("{} points but {} labels", coords.len(), labels.len())));
    }
    match format {
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(e.to_string()))?;
            let mut put = |rec: [String; 4]| w.write_record(rec).map_err(|e| Error::Data(e.to_string()));
            put(["node_id", "label", "x", "y"].map(String::from))?;
            for (i, ([x, y], label)) in coords.iter().zip(labels).enumerate() {
                put([i.to_string(), label.clone(), format!("{x:?}"), format!("{y:?}")])?;
            }
            w.flush()?;
        }
        ExportFormat::Svg => std::fs::write(path, svg(coords, labels))?,
    }
    Ok(())
}

fn svg(coords: &[[f64; 2]], labels: &[String]) -> String {
    let extent = coords.iter().map(|[x, y]| x.hypot(*y)).fold(1.0, f64::max) * 1.05;
    let s = VIEW / (2.0 * extent);
    let to_px = |v: f64| VIEW / 2.0 + v * s;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{VIEW}" height="{VIEW}" viewBox="0 0 {VIEW} {VIEW}">"#
    );
    let _ = writeln!(
        out,
        r#"  <circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="black"/>"#,
        c = VIEW / 2.0,
        r = s
    );
    for ([x, y], label) in coords.iter().zip(labels) {
        // SVG's y axis points down.
        let (px, py) = (to_px(*x), VIEW - to_px(*y));
        let _ = writeln!(out, r#"  <circle cx="{px:.3}" cy="{py:.3}" r="3" fill="steelblue"><title>{label}</title></circle>"#);
    }
    out.push_str("</svg>\n");
    out
}
