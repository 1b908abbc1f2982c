pub mod error;
pub mod harness;
pub mod manifolds;
pub mod nn;
pub mod optim;
pub mod tensor;
pub mod tensors;

pub use error::{Error, Result};
pub use manifolds::{Curvature, Manifold};
pub use tensor::Tensor;
pub use tensors::{check_compatible, ManifoldParameter, ManifoldTensor, OnManifold, TangentTensor};
