use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::nn::{HLinear, Module, NamedParam, ParamInit};
use crate::tensors::ManifoldTensor;

/// How the `kh·kw` channel points of a patch are joined into one point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConcatMode {
    /// Tangent blocks rescaled by Beta-function ratios.
    #[default]
    Beta,
    /// Tangent blocks joined as they are.
    Plain,
}

/// 2-D convolution over `N×C×H×W` feature maps whose channel axis holds
/// the points.
///
/// Each patch's channel points are concatenated into one point of dimension
/// `C·kh·kw`, which an [`HLinear`] maps to `C'` dimensions. On the Euclidean
/// manifold this is cross-correlation plus bias.
pub struct HConv2d {
    in_channels: usize,
    out_channels: usize,
    kernel: (usize, usize),
    stride: (usize, usize),
    padding: (usize, usize),
    concat: ConcatMode,
    linear: HLinear,
    manifold: Manifold,
}

impl HConv2d {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        manifold: &Manifold,
        init: &mut ParamInit,
    ) -> Result<Self> {
        let fan_in = in_channels * kernel * kernel;
        Ok(Self {
            in_channels,
            out_channels,
            kernel: (kernel, kernel),
            stride: (1, 1),
            padding: (0, 0),
            concat: ConcatMode::Beta,
            linear: HLinear::new(fan_in, out_channels, manifold, init)?,
            manifold: manifold.clone(),
        })
    }

    /// Replaces the inner linear map, whose input dimension must be
    /// `C·kh·kw` in channel-major, row, column order.
    pub fn with_linear(mut self, linear: HLinear) -> Result<Self> {
        let (kh, kw) = self.kernel;
        if linear.in_features() != self.in_channels * kh * kw || linear.out_features() != self.out_channels {
            return Err(Error::shape(format!(
                "linear map {}→{} does not fit a {kh}×{kw} kernel over {} channels",
                linear.in_features(),
                linear.out_features(),
                self.in_channels
            )));
        }
        self.linear = linear;
        Ok(self)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = (stride, stride);
        self
    }

    pub fn with_padding(mut self, padding: usize) -> Self {
        self.padding = (padding, padding);
        self
    }

    pub fn with_concat(mut self, concat: ConcatMode) -> Self {
        self.concat = concat;
        self
    }

    pub fn linear(&self) -> &HLinear {
        &self.linear
    }

    /// Output spatial extents for an `h×w` input.
    pub fn output_size(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let oh = crate::tensor::conv_output_size(h, self.kernel.0, self.stride.0, self.padding.0)?;
        let ow = crate::tensor::conv_output_size(w, self.kernel.1, self.stride.1, self.padding.1)?;
        Some((oh, ow))
    }
}

impl Module for HConv2d {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.manifold.expect(x)?;
        let t = x.tensor();
        if t.rank() != 4 || x.man_dim() != 1 {
            return Err(Error::dimension(format!(
                "convolution expects N×C×H×W points along axis 1, got {:?} along axis {}",
                t.shape(),
                x.man_dim()
            )));
        }
        let (n, c, h, w) = (t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]);
        if c != self.in_channels {
            return Err(Error::dimension(format!("expected {} channels, got {c}", self.in_channels)));
        }
        let (oh, ow) = self
            .output_size(h, w)
            .ok_or_else(|| Error::shape(format!("input {h}×{w} is smaller than the kernel")))?;
        let (kh, kw) = self.kernel;
        let g = self.manifold.geometry();
        let k = c * kh * kw;

        // Padding zeros in tangent space are the origin on the ball.
        let v = g.logmap0(t, 1)?;
        let patches = v.unfold2d(self.kernel, self.stride, self.padding)?;
        let scale = match self.concat {
            ConcatMode::Beta => g.concat_scale(c, k),
            ConcatMode::Plain => 1.0,
        };
        let patches = if scale == 1.0 { patches } else { patches.mul_scalar(scale) };
        let l = oh * ow;
        let points = g.expmap0(&patches, 1)?;
        let rows = points.permute(&[0, 2, 1])?.reshape(&[n * l, k])?;
        let rows = ManifoldTensor::trusted(rows, self.manifold.clone(), 1);
        let y = self.linear.forward(&rows)?;
        let y = y
            .tensor()
            .reshape(&[n, l, self.out_channels])?
            .permute(&[0, 2, 1])?
            .reshape(&[n, self.out_channels, oh, ow])?;
        Ok(ManifoldTensor::trusted(y, self.manifold.clone(), 1))
    }

    fn parameters(&self) -> Vec<NamedParam> {
        self.linear
            .parameters()
            .into_iter()
            .map(|p| NamedParam::new(format!("linear.{}", p.name), p.param))
            .collect()
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
}
