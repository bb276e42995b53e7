//! Raw region features and visual-relationship embeddings.
//!
//! A region's raw feature is the concatenation of its box coordinates,
//! appearance vector, and class scores. An ordered region pair is embedded
//! either as a learned translation (projected object minus projected
//! subject) or as the parameter-free concatenation baseline.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{ImageRecord, PairLabel, Region};
use crate::error::{Error, Result};
use crate::gradcheck::{max_rel_error, GradGroup, GradReport};
use crate::linalg::{add_scaled, Matrix};
use crate::optim::{adam_step, AdamConfig, Moments};

/// Raw feature layout: `[x1, y1, x2, y2, appearance..., class_scores...]`.
pub fn assemble_feature(region: &Region) -> Vec<f64> {
    let b = &region.bbox;
    let mut out = Vec::with_capacity(4 + region.appearance.len() + region.class_scores.len());
    out.extend_from_slice(&[b.x1, b.y1, b.x2, b.y2]);
    out.extend_from_slice(&region.appearance);
    out.extend_from_slice(&region.class_scores);
    out
}

pub fn feature_dim(appearance_dim: usize, class_dim: usize) -> usize {
    4 + appearance_dim + class_dim
}

/// How an ordered region pair becomes an embedding vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedMode {
    /// Learned projection of object minus projection of subject.
    Translation,
    /// `[subject_feature; object_feature]`, no parameters.
    Concat,
}

impl EmbedMode {
    /// Output dimension of the embedding under this mode.
    pub fn output_dim(&self, input_dim: usize, embed_dim: usize) -> usize {
        match self {
            EmbedMode::Translation => embed_dim,
            EmbedMode::Concat => 2 * input_dim,
        }
    }
}

/// Subject/object projection matrices, possibly aliased.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Shared(Matrix),
    Split { subject: Matrix, object: Matrix },
}

impl Projection {
    pub fn subject(&self) -> &Matrix {
        match self {
            Projection::Shared(m) => m,
            Projection::Split { subject, .. } => subject,
        }
    }

    pub fn object(&self) -> &Matrix {
        match self {
            Projection::Shared(m) => m,
            Projection::Split { object, .. } => object,
        }
    }

    pub fn is_shared(&self) -> bool {
        matches!(self, Projection::Shared(_))
    }
}

/// Learnable embedder weights plus the predicate-classification head used
/// only during pretraining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedderParams {
    pub input_dim: usize,
    pub embed_dim: usize,
    pub projection: Projection,
    /// `n_train_classes x embed_dim`.
    pub class_head: Matrix,
    pub class_bias: Vec<f64>,
}

impl EmbedderParams {
    /// Uniform init in `[-1/sqrt(input_dim), 1/sqrt(input_dim)]`, zero biases.
    pub fn init(
        input_dim: usize,
        embed_dim: usize,
        n_classes: usize,
        shared: bool,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (input_dim as f64).sqrt();
        let projection = if shared {
            Projection::Shared(Matrix::uniform(embed_dim, input_dim, bound, &mut rng))
        } else {
            Projection::Split {
                subject: Matrix::uniform(embed_dim, input_dim, bound, &mut rng),
                object: Matrix::uniform(embed_dim, input_dim, bound, &mut rng),
            }
        };
        let head_bound = 1.0 / (embed_dim as f64).sqrt();
        EmbedderParams {
            input_dim,
            embed_dim,
            projection,
            class_head: Matrix::uniform(n_classes, embed_dim, head_bound, &mut rng),
            class_bias: vec![0.0; n_classes],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.projection
            .subject()
            .validate_shape("subject projection", self.embed_dim, self.input_dim)?;
        self.projection
            .object()
            .validate_shape("object projection", self.embed_dim, self.input_dim)?;
        self.class_head.validate_shape(
            "class head",
            self.class_bias.len(),
            self.embed_dim,
        )?;
        if self.embed_dim == 0 {
            return Err(Error::Validation("embed_dim must be at least 1".into()));
        }
        Ok(())
    }

    fn check_input(&self, what: &str, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                what: what.into(),
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Translation embedding of an ordered pair of raw features.
    pub fn embed_translation(&self, subject: &[f64], object: &[f64]) -> Result<Vec<f64>> {
        self.check_input("subject feature", subject)?;
        self.check_input("object feature", object)?;
        let s = self.projection.subject().matvec(subject);
        let o = self.projection.object().matvec(object);
        Ok(o.iter().zip(s.iter()).map(|(a, b)| a - b).collect())
    }
}

/// Concatenation baseline: `[subject; object]`.
pub fn embed_concat(subject: &[f64], object: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(subject.len() + object.len());
    out.extend_from_slice(subject);
    out.extend_from_slice(object);
    out
}

/// Embed every pair label of one image under the given mode.
///
/// Translation mode projects each region once and forms label embeddings by
/// subtraction, which rounds identically to the direct per-pair evaluation.
pub fn embed_labels(
    params: &EmbedderParams,
    mode: EmbedMode,
    image: &ImageRecord,
    labels: &[PairLabel],
) -> Result<Vec<Vec<f64>>> {
    let features: Vec<Vec<f64>> = image.regions.iter().map(assemble_feature).collect();
    for label in labels {
        label.validate(image.regions.len())?;
    }
    match mode {
        EmbedMode::Concat => Ok(labels
            .iter()
            .map(|l| embed_concat(&features[l.subject_idx], &features[l.object_idx]))
            .collect()),
        EmbedMode::Translation => {
            for f in &features {
                params.check_input("region feature", f)?;
            }
            let proj_s: Vec<Vec<f64>> = features
                .iter()
                .map(|f| params.projection.subject().matvec(f))
                .collect();
            let proj_o: Vec<Vec<f64>> = features
                .iter()
                .map(|f| params.projection.object().matvec(f))
                .collect();
            Ok(labels
                .iter()
                .map(|l| {
                    proj_o[l.object_idx]
                        .iter()
                        .zip(proj_s[l.subject_idx].iter())
                        .map(|(a, b)| a - b)
                        .collect()
                })
                .collect())
        }
    }
}

/// One pretraining example: a ground-truth pair and its predicate.
#[derive(Debug, Clone)]
pub struct PretrainItem {
    pub subject: Vec<f64>,
    pub object: Vec<f64>,
    pub predicate_id: u32,
}

/// Maps train-split predicate ids to contiguous class indices.
#[derive(Debug, Clone)]
pub struct ClassMap {
    map: BTreeMap<u32, usize>,
}

impl ClassMap {
    pub fn from_train_ids<'a>(ids: impl IntoIterator<Item = &'a u32>) -> Self {
        let map = ids
            .into_iter()
            .enumerate()
            .map(|(idx, pid)| (*pid, idx))
            .collect();
        ClassMap { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn class_of(&self, predicate_id: u32) -> Result<usize> {
        self.map
            .get(&predicate_id)
            .copied()
            .ok_or(Error::SupervisionLeak { predicate_id })
    }
}

/// Gradients matching [`EmbedderParams`] shape for shape.
#[derive(Debug, Clone)]
pub struct EmbedderGrads {
    pub projection: Projection,
    pub class_head: Matrix,
    pub class_bias: Vec<f64>,
}

impl EmbedderGrads {
    fn zeros_like(params: &EmbedderParams) -> Self {
        let zero_proj = Matrix::zeros(params.embed_dim, params.input_dim);
        let projection = match &params.projection {
            Projection::Shared(_) => Projection::Shared(zero_proj),
            Projection::Split { .. } => Projection::Split {
                subject: zero_proj.clone(),
                object: zero_proj,
            },
        };
        EmbedderGrads {
            projection,
            class_head: Matrix::zeros(params.class_head.rows, params.class_head.cols),
            class_bias: vec![0.0; params.class_bias.len()],
        }
    }
}

fn softmax_cross_entropy(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    let z_max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - z_max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let loss = total.ln() - (logits[target] - z_max);
    let mut dz: Vec<f64> = exps.iter().map(|e| e / total).collect();
    dz[target] -= 1.0;
    (loss, dz)
}

/// Mean softmax cross-entropy of the predicate classifier over a batch.
pub fn pretrain_loss(
    params: &EmbedderParams,
    batch: &[PretrainItem],
    classes: &ClassMap,
) -> Result<f64> {
    let mut total = 0.0;
    for item in batch {
        let target = classes.class_of(item.predicate_id)?;
        let f = params.embed_translation(&item.subject, &item.object)?;
        let mut logits = params.class_head.matvec(&f);
        add_scaled(&mut logits, &params.class_bias, 1.0);
        let (loss, _) = softmax_cross_entropy(&logits, target);
        total += loss;
    }
    Ok(total / batch.len() as f64)
}

/// Mean loss plus analytic gradients for every embedder tensor.
pub fn pretrain_gradients(
    params: &EmbedderParams,
    batch: &[PretrainItem],
    classes: &ClassMap,
) -> Result<(f64, EmbedderGrads)> {
    let mut grads = EmbedderGrads::zeros_like(params);
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;

    for item in batch {
        let target = classes.class_of(item.predicate_id)?;
        let f = params.embed_translation(&item.subject, &item.object)?;
        let mut logits = params.class_head.matvec(&f);
        add_scaled(&mut logits, &params.class_bias, 1.0);
        let (loss, mut dz) = softmax_cross_entropy(&logits, target);
        total += loss;
        for d in dz.iter_mut() {
            *d *= scale;
        }

        grads.class_head.add_outer(&dz, &f, 0);
        add_scaled(&mut grads.class_bias, &dz, 1.0);

        // d loss / d f, then into the projections:
        // f = object_proj * x_o - subject_proj * x_s.
        let df = params.class_head.matvec_transposed(&dz);
        let neg_df: Vec<f64> = df.iter().map(|v| -v).collect();
        match &mut grads.projection {
            Projection::Shared(g) => {
                g.add_outer(&df, &item.object, 0);
                g.add_outer(&neg_df, &item.subject, 0);
            }
            Projection::Split { subject, object } => {
                object.add_outer(&df, &item.object, 0);
                subject.add_outer(&neg_df, &item.subject, 0);
            }
        }
    }
    Ok((total * scale, grads))
}

/// Optimizer state for the embedder tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedderOptState {
    pub step: u64,
    pub subject_proj: Moments,
    /// Present only for split projections.
    pub object_proj: Option<Moments>,
    pub class_head: Moments,
    pub class_bias: Moments,
}

impl EmbedderOptState {
    pub fn zeros_like(params: &EmbedderParams) -> Self {
        let proj_len = params.embed_dim * params.input_dim;
        EmbedderOptState {
            step: 0,
            subject_proj: Moments::zeros(proj_len),
            object_proj: match params.projection {
                Projection::Shared(_) => None,
                Projection::Split { .. } => Some(Moments::zeros(proj_len)),
            },
            class_head: Moments::zeros(params.class_head.data.len()),
            class_bias: Moments::zeros(params.class_bias.len()),
        }
    }
}

/// One optimizer update on the whole embedder; returns the mean batch loss.
pub fn pretrain_step(
    params: &mut EmbedderParams,
    opt: &mut EmbedderOptState,
    cfg: &AdamConfig,
    batch: &[PretrainItem],
    classes: &ClassMap,
) -> Result<f64> {
    let (loss, grads) = pretrain_gradients(params, batch, classes)?;
    opt.step += 1;
    let t = opt.step;
    match (&mut params.projection, &grads.projection) {
        (Projection::Shared(p), Projection::Shared(g)) => {
            adam_step(cfg, t, &mut p.data, &g.data, &mut opt.subject_proj);
        }
        (
            Projection::Split { subject, object },
            Projection::Split {
                subject: gs,
                object: go,
            },
        ) => {
            adam_step(cfg, t, &mut subject.data, &gs.data, &mut opt.subject_proj);
            adam_step(
                cfg,
                t,
                &mut object.data,
                &go.data,
                opt.object_proj.as_mut().expect("split optimizer state"),
            );
        }
        _ => unreachable!("gradients mirror parameter layout"),
    }
    adam_step(
        cfg,
        t,
        &mut params.class_head.data,
        &grads.class_head.data,
        &mut opt.class_head,
    );
    adam_step(
        cfg,
        t,
        &mut params.class_bias,
        &grads.class_bias,
        &mut opt.class_bias,
    );
    Ok(loss)
}

/// Finite-difference check of the pretraining gradients at `h = 1e-5`.
pub fn grad_check(seed: u64, embed_dim: usize) -> GradReport {
    let input_dim = 9;
    let n_classes = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = EmbedderParams::init(input_dim, embed_dim, n_classes, false, seed ^ 0x5eed);
    let classes = ClassMap::from_train_ids(&[10, 20, 30]);
    let batch: Vec<PretrainItem> = (0..4)
        .map(|i| PretrainItem {
            subject: (0..input_dim)
                .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                .collect(),
            object: (0..input_dim)
                .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                .collect(),
            predicate_id: [10, 20, 30][i % 3],
        })
        .collect();

    let (_, grads) = pretrain_gradients(&params, &batch, &classes).unwrap();
    let loss_at = |p: &EmbedderParams| pretrain_loss(p, &batch, &classes).unwrap();
    let h = 1e-5;

    let numeric_for = |extract: &dyn Fn(&mut EmbedderParams) -> &mut Vec<f64>| -> Vec<f64> {
        let mut base = params.clone();
        let len = extract(&mut base).len();
        (0..len)
            .map(|i| {
                let mut plus = params.clone();
                extract(&mut plus)[i] += h;
                let mut minus = params.clone();
                extract(&mut minus)[i] -= h;
                (loss_at(&plus) - loss_at(&minus)) / (2.0 * h)
            })
            .collect()
    };

    let subject_data = |p: &mut EmbedderParams| -> &mut Vec<f64> {
        match &mut p.projection {
            Projection::Shared(m) => &mut m.data,
            Projection::Split { subject, .. } => &mut subject.data,
        }
    };
    let object_data = |p: &mut EmbedderParams| -> &mut Vec<f64> {
        match &mut p.projection {
            Projection::Shared(m) => &mut m.data,
            Projection::Split { object, .. } => &mut object.data,
        }
    };

    let groups = vec![
        GradGroup {
            name: "embedder.subject_proj".into(),
            max_rel_error: max_rel_error(
                grads.projection.subject().data.as_slice(),
                &numeric_for(&subject_data),
            ),
        },
        GradGroup {
            name: "embedder.object_proj".into(),
            max_rel_error: max_rel_error(
                grads.projection.object().data.as_slice(),
                &numeric_for(&object_data),
            ),
        },
        GradGroup {
            name: "embedder.class_head".into(),
            max_rel_error: max_rel_error(&grads.class_head.data, &numeric_for(&|p| {
                &mut p.class_head.data
            })),
        },
        GradGroup {
            name: "embedder.class_bias".into(),
            max_rel_error: max_rel_error(&grads.class_bias, &numeric_for(&|p| {
                &mut p.class_bias
            })),
        },
    ];
    GradReport { seed, groups }
}
