//! Embeds a balanced tree in the Poincaré disk and in the plane with the same
//! budget, then compares their mean distortion.

use hypnn::harness::{embed_hierarchy, generate_tree, Command, ManifoldChoice, RunConfig};
use hypnn::Result;

fn main() -> Result<()> {
    let tree = generate_tree(3, 2, 0)?;
    for manifold in [ManifoldChoice::Poincare, ManifoldChoice::Euclidean] {
        let mut cfg = RunConfig::defaults(Command::EmbedTree);
        cfg.manifold = manifold;
        cfg.epochs = 1000;
        let out = embed_hierarchy(&tree, &cfg)?;
        println!("{manifold:?}: loss {:.4e}, mean distortion {:.4}", out.final_loss, out.distortion);
    }
    Ok(())
}
