//! Text checkpoints: one JSON document holding the curvature, every named
//! parameter and, optionally, what is needed to resume a run.
//!
//! Numbers are written with 17 significant digits, which reproduces every
//! `f64` exactly on load.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::manifolds::{Manifold, ManifoldKind, BALL_EPS};
use crate::nn::{NamedParam, Param};
use crate::optim::SlotState;
use crate::tensors::OnManifold;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Manifold,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldTag {
    Poincare,
    Euclidean,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureRecord {
    pub raw: f64,
    pub learnable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamRecord {
    pub name: String,
    pub kind: ParamKind,
    pub manifold: ManifoldTag,
    pub man_dim: Option<usize>,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Position of an interrupted run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunState {
    pub config: RunConfig,
    pub epochs_done: usize,
    pub steps_done: usize,
    pub lr: f64,
    pub optimizer: Vec<SlotState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub curvature: Option<CurvatureRecord>,
    pub params: Vec<ParamRecord>,
    pub run: Option<RunState>,
}

impl Checkpoint {
    /// Snapshot of `params` living on (or next to) `manifold`.
    pub fn capture(manifold: &Manifold, params: &[NamedParam]) -> Self {
        let curvature = manifold.curvature().map(|c| CurvatureRecord {
            raw: c.raw().data()[0],
            learnable: c.learnable(),
        });
        let params = params
            .iter()
            .map(|p| {
                let t = p.param.tensor();
                let (kind, tag, man_dim) = match &p.param {
                    Param::Euclidean(_) => (ParamKind::Euclidean, ManifoldTag::None, None),
                    Param::Point(mp) => (ParamKind::Manifold, tag_of(mp.manifold()), Some(mp.man_dim())),
                };
                ParamRecord {
                    name: p.name.clone(),
                    kind,
                    manifold: tag,
                    man_dim,
                    shape: t.shape().to_vec(),
                    data: t.to_vec(),
                }
            })
            .collect();
        Self {
            curvature,
            params,
            run: None,
        }
    }

    pub fn with_run(mut self, run: RunState) -> Self {
        self.run = Some(run);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = Doc::<F17> {
            format_version: Some(FORMAT_VERSION),
            curvature: self.curvature.as_ref().map(|c| CurvatureDoc {
                raw: F17(c.raw),
                learnable: c.learnable,
            }),
            params: self
                .params
                .iter()
                .map(|p| ParamDoc {
                    name: p.name.clone(),
                    kind: p.kind,
                    manifold: p.manifold,
                    man_dim: p.man_dim,
                    shape: p.shape.clone(),
                    data: p.data.iter().copied().map(F17).collect(),
                })
                .collect(),
            run: self.run.as_ref().map(|r| RunDoc {
                config: r.config.clone(),
                epochs_done: r.epochs_done,
                steps_done: r.steps_done,
                lr: F17(r.lr),
                optimizer: r
                    .optimizer
                    .iter()
                    .map(|s| SlotDoc {
                        name: s.name.clone(),
                        steps: s.steps,
                        momentum: s.momentum.as_ref().map(|v| v.iter().copied().map(F17).collect()),
                        second_moment: s.second_moment.as_ref().map(|v| v.iter().copied().map(F17).collect()),
                    })
                    .collect(),
            }),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Numeric(format!("cannot serialize checkpoint: {e}")))
    }

    /// Parses and validates a document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Doc<f64> = parse(text)?;
        match doc.format_version {
            None => return Err(Error::Data("checkpoint has no format_version".into())),
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(Error::Data(format!("unsupported checkpoint format_version {v}"))),
        }
        let curvature = doc.curvature.map(|c| CurvatureRecord {
            raw: c.raw,
            learnable: c.learnable,
        });
        let c = curvature.as_ref().map(|c| crate::tensor::softplus(c.raw));
        let params: Vec<ParamRecord> = doc
            .params
            .into_iter()
            .map(|p| ParamRecord {
                name: p.name,
                kind: p.kind,
                manifold: p.manifold,
                man_dim: p.man_dim,
                shape: p.shape,
                data: p.data,
            })
            .collect();
        for p in &params {
            validate(p, c)?;
        }
        let run = doc.run.map(|r| RunState {
            config: r.config,
            epochs_done: r.epochs_done,
            steps_done: r.steps_done,
            lr: r.lr,
            optimizer: r
                .optimizer
                .into_iter()
                .map(|s| SlotState {
                    name: s.name,
                    steps: s.steps,
                    momentum: s.momentum,
                    second_moment: s.second_moment,
                })
                .collect(),
        });
        Ok(Self { curvature, params, run })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Writes the stored values into `params` (same names, order, kinds and
    /// shapes) and the curvature of `manifold`.
    pub fn restore_into(&self, manifold: &Manifold, params: &[NamedParam]) -> Result<()> {
        match (manifold.curvature(), &self.curvature) {
            (Some(c), Some(rec)) => {
                if c.learnable() != rec.learnable {
                    return Err(Error::Data("curvature learnability differs from the checkpoint".into()));
                }
                c.raw().set_data(vec![rec.raw])?;
            }
            (None, None) => {}
            _ => return Err(Error::Data("checkpoint manifold kind differs from the model".into())),
        }
        if params.len() != self.params.len() {
            return Err(Error::Data(format!(
                "checkpoint holds {} parameters, the model has {}",
                self.params.len(),
                params.len()
            )));
        }
        for (p, rec) in params.iter().zip(&self.params) {
            let t = p.param.tensor();
            let (kind, tag, man_dim) = match &p.param {
                Param::Euclidean(_) => (ParamKind::Euclidean, ManifoldTag::None, None),
                Param::Point(mp) => (ParamKind::Manifold, tag_of(mp.manifold()), Some(mp.man_dim())),
            };
            if rec.name != p.name || rec.kind != kind || rec.manifold != tag || rec.man_dim != man_dim || rec.shape != t.shape() {
                return Err(Error::Data(format!("checkpoint record `{}` does not fit parameter `{}`", rec.name, p.name)));
            }
        }
        for (p, rec) in params.iter().zip(&self.params) {
            p.param.tensor().set_data(rec.data.clone())?;
        }
        Ok(())
    }
}

fn tag_of(m: &Manifold) -> ManifoldTag {
    match m.kind() {
        ManifoldKind::Euclidean => ManifoldTag::Euclidean,
        ManifoldKind::PoincareBall(_) => ManifoldTag::Poincare,
    }
}

fn validate(p: &ParamRecord, c: Option<f64>) -> Result<()> {
    let bad = |msg: String| Err(Error::Data(format!("parameter `{}`: {msg}", p.name)));
    if p.shape.iter().product::<usize>() != p.data.len() {
        return bad(format!("shape {:?} does not hold {} values", p.shape, p.data.len()));
    }
    if p.data.iter().any(|v| !v.is_finite()) {
        return bad("non-finite value".into());
    }
    match (p.kind, p.manifold, p.man_dim) {
        (ParamKind::Euclidean, ManifoldTag::None, None) => Ok(()),
        (ParamKind::Manifold, ManifoldTag::Euclidean, Some(d)) if d < p.shape.len() => Ok(()),
        (ParamKind::Manifold, ManifoldTag::Poincare, Some(d)) if d < p.shape.len() => {
            let Some(c) = c else {
                return bad("ball parameter without a curvature record".into());
            };
            let limit = 1.0 - BALL_EPS;
            for norm in point_norms(&p.data, &p.shape, d) {
                if c.sqrt() * norm > limit {
                    return bad(format!("point outside the ball (√c‖x‖ = {})", c.sqrt() * norm));
                }
            }
            Ok(())
        }
        _ => bad("inconsistent kind, manifold and man_dim".into()),
    }
}

/// Norms of the slices along `dim` of a row-major buffer.
fn point_norms(data: &[f64], shape: &[usize], dim: usize) -> Vec<f64> {
    let inner: usize = shape[dim + 1..].iter().product();
    let extent = shape[dim];
    let outer: usize = shape[..dim].iter().product();
    let mut out = Vec::with_capacity(outer * inner);
    for o in 0..outer {
        for i in 0..inner {
            let sq: f64 = (0..extent)
                .map(|k| data[(o * extent + k) * inner + i].powi(2))
                .sum();
            out.push(sq.sqrt());
        }
    }
    out
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Data(format!("malformed checkpoint: {e}")))
}

/// An `f64` written with 17 significant digits.
struct F17(f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc<N> {
    format_version: Option<u32>,
    curvature: Option<CurvatureDoc<N>>,
    params: Vec<ParamDoc<N>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run: Option<RunDoc<N>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurvatureDoc<N> {
    raw: N,
    learnable: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamDoc<N> {
    name: String,
    kind: ParamKind,
    manifold: ManifoldTag,
    man_dim: Option<usize>,
    shape: Vec<usize>,
    data: Vec<N>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc<N> {
    config: RunConfig,
    epochs_done: usize,
    steps_done: usize,
    lr: N,
    optimizer: Vec<SlotDoc<N>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotDoc<N> {
    name: String,
    steps: u64,
    momentum: Option<Vec<N>>,
    second_moment: Option<Vec<N>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ParamInit;
    use crate::tensor::Tensor;

    fn model() -> (Manifold, Vec<NamedParam>) {
        let m = Manifold::ball(1.3).unwrap();
        let mut init = ParamInit::new(11);
        let p = init.points(&[4, 3], &m, 1).unwrap();
        let w = init.uniform(&[2, 3], 3).unwrap();
        let params = vec![
            NamedParam::new("table", Param::Point(p)),
            NamedParam::new("w", Param::Euclidean(w)),
        ];
        (m, params)
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let (m, params) = model();
        let ck = Checkpoint::capture(&m, &params);
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
        for (a, b) in ck.params.iter().zip(&back.params) {
            let same = a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits());
            assert!(same);
        }
    }

    #[test]
    fn seventeen_digits_on_disk() {
        let (m, params) = model();
        let text = Checkpoint::capture(&m, &params).to_json().unwrap();
        assert!(text.contains("\"format_version\": 1"));
        let v = serde_json::from_str::<serde_json::Value>(&text).unwrap();
        let raw = v["curvature"]["raw"].as_f64().unwrap();
        assert_eq!(raw, m.curvature().unwrap().raw().data()[0]);
    }

    #[test]
    fn missing_version_rejected() {
        let (m, params) = model();
        let text = Checkpoint::capture(&m, &params).to_json().unwrap();
        let text = text.replace("\"format_version\": 1,", "");
        assert!(matches!(Checkpoint::from_json(&text), Err(Error::Data(_))));
        let text2 = Checkpoint::capture(&m, &params).to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(Checkpoint::from_json(&text2), Err(Error::Data(_))));
    }

    #[test]
    fn out_of_ball_rejected() {
        let (m, params) = model();
        let mut ck = Checkpoint::capture(&m, &params);
        ck.params[0].data[0] = 0.99;
        assert!(matches!(Checkpoint::from_json(&ck.to_json().unwrap()), Err(Error::Data(_))));
    }

    #[test]
    fn restore_checks_layout() {
        let (m, params) = model();
        let ck = Checkpoint::capture(&m, &params);
        params[1].param.tensor().set_data(vec![0.0; 6]).unwrap();
        ck.restore_into(&m, &params).unwrap();
        assert_eq!(params[1].param.tensor().to_vec(), ck.params[1].data);
        let other = vec![NamedParam::new("w", Param::Euclidean(Tensor::parameter(vec![0.0; 6], &[2, 3]).unwrap()))];
        assert!(ck.restore_into(&m, &other).is_err());
    }
}
