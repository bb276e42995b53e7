//! Episodic metric training.
//!
//! Each bag is one episode: the matched ground-truth relationships of its
//! images are paired across images, labelled positive when both carry the
//! bag's common predicate, and scored by the relation network under a
//! binary logistic loss. One optimizer step per episode.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, LossRecord, RelationSection, CHECKPOINT_SCHEMA_VERSION};
use crate::datamodel::{Bag, DatasetManifest};
use crate::embedder::{
    assemble_feature, embed_concat, EmbedMode, EmbedderOptState, EmbedderParams, Projection,
};
use crate::error::{Error, Result};
use crate::linalg::{sigmoid, softplus, Matrix};
use crate::optim::{adam_step, AdamConfig};
use crate::rng::{stream_rng, subseed};
use crate::similarity::{relation_backward, RelationNetGrads, RelationNetParams, RelationOptState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub episodes: usize,
    /// Kept negatives per positive in an episode.
    pub negative_ratio: usize,
    pub seed: u64,
    pub freeze_embedder: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            episodes: 0,
            negative_ratio: 3,
            seed: 0,
            freeze_embedder: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.negative_ratio < 1 {
            return Err(Error::Config(format!(
                "negative:positive ratio must be at least 1, got {}",
                self.negative_ratio
            )));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// One candidate relationship: a matched ground-truth pair in one image.
#[derive(Debug, Clone)]
pub struct CandidateRel {
    /// Position of the source image within the bag.
    pub bag_slot: usize,
    pub subject_feature: Vec<f64>,
    pub object_feature: Vec<f64>,
    pub predicate_id: u32,
}

/// Cross-image candidate pairs of one episode, before embedding.
#[derive(Debug, Clone)]
pub struct Episode {
    pub candidates: Vec<CandidateRel>,
    /// `(first candidate, second candidate, label)` with label in `{-1, +1}`.
    pub pairs: Vec<(usize, usize, f64)>,
}

/// A realized training pair: two embeddings from different images plus the
/// positive/negative label.
#[derive(Debug, Clone)]
pub struct EpisodePair {
    pub f_first: Vec<f64>,
    pub f_second: Vec<f64>,
    pub label: f64,
}

/// Why a bag produced no episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpisodeSkip {
    ImageWithoutCandidates(String),
    NoPositivePairs,
}

/// Enumerate all ordered cross-image candidate pairs and subsample
/// negatives to `ratio` per positive.
///
/// A pair is positive exactly when both candidates carry the bag's common
/// predicate; candidates always come from different images.
pub fn build_episode(
    manifest: &DatasetManifest,
    bag: &Bag,
    ratio: usize,
    rng: &mut ChaCha8Rng,
) -> Result<std::result::Result<Episode, EpisodeSkip>> {
    let mut candidates = Vec::new();
    for (slot, image_id) in bag.image_ids.iter().enumerate() {
        let image = manifest.image(image_id)?;
        let before = candidates.len();
        for ann in &image.annotations {
            if let Some((s, o)) = ann.matched {
                candidates.push(CandidateRel {
                    bag_slot: slot,
                    subject_feature: assemble_feature(&image.regions[s]),
                    object_feature: assemble_feature(&image.regions[o]),
                    predicate_id: ann.predicate_id,
                });
            }
        }
        if candidates.len() == before {
            return Ok(Err(EpisodeSkip::ImageWithoutCandidates(image_id.clone())));
        }
    }

    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (i, a) in candidates.iter().enumerate() {
        for (j, b) in candidates.iter().enumerate() {
            if a.bag_slot == b.bag_slot {
                continue;
            }
            let both_common = a.predicate_id == bag.common_predicate_id
                && b.predicate_id == bag.common_predicate_id;
            if both_common {
                positives.push((i, j, 1.0));
            } else {
                negatives.push((i, j, -1.0));
            }
        }
    }
    if positives.is_empty() {
        return Ok(Err(EpisodeSkip::NoPositivePairs));
    }

    let keep = ratio * positives.len();
    if negatives.len() > keep {
        let mut picks: Vec<usize> = sample(rng, negatives.len(), keep).into_iter().collect();
        picks.sort_unstable();
        negatives = picks.into_iter().map(|i| negatives[i]).collect();
    }

    let mut pairs = positives;
    pairs.extend(negatives);
    Ok(Ok(Episode { candidates, pairs }))
}

/// Embed an episode's candidates under the current embedder weights.
pub fn realize_pairs(
    episode: &Episode,
    embedder: &EmbedderParams,
    mode: EmbedMode,
) -> Result<Vec<EpisodePair>> {
    let embeddings: Vec<Vec<f64>> = episode
        .candidates
        .iter()
        .map(|c| match mode {
            EmbedMode::Translation => {
                embedder.embed_translation(&c.subject_feature, &c.object_feature)
            }
            EmbedMode::Concat => Ok(embed_concat(&c.subject_feature, &c.object_feature)),
        })
        .collect::<Result<_>>()?;
    Ok(episode
        .pairs
        .iter()
        .map(|&(i, j, label)| EpisodePair {
            f_first: embeddings[i].clone(),
            f_second: embeddings[j].clone(),
            label,
        })
        .collect())
}

/// Binary logistic loss `ln(1 + exp(-y * score))`, overflow-safe.
pub fn logistic_loss(score: f64, label: f64) -> f64 {
    softplus(-label * score)
}

/// Attach a fresh relation-network section to a pretrained checkpoint.
pub fn init_training(checkpoint: &mut Checkpoint, config: TrainConfig) -> Result<()> {
    config.validate()?;
    if checkpoint.relation.is_some() {
        return Err(Error::Config(
            "checkpoint already contains a relation network; resume instead".into(),
        ));
    }
    let params = RelationNetParams::init(
        checkpoint.embedding_dim(),
        subseed(config.seed, "relation-init", 0),
    );
    let opt = RelationOptState::zeros_like(&params);
    checkpoint.relation = Some(RelationSection {
        params,
        opt,
        config,
        completed_episodes: 0,
        loss_history: Vec::new(),
    });
    Ok(())
}

/// Run `episodes` more training episodes, mutating the checkpoint in place.
///
/// Episode order, negative subsampling, and updates are all derived from the
/// train config seed and the absolute episode index, so training N then M
/// episodes equals training N+M in one run. `on_episode` observes each
/// executed episode's mean loss.
pub fn train(
    manifest: &DatasetManifest,
    bags: &[Bag],
    checkpoint: &mut Checkpoint,
    episodes: usize,
    mut on_episode: impl FnMut(usize, f64),
) -> Result<()> {
    for bag in bags {
        if !manifest.train_predicates.contains(&bag.common_predicate_id) {
            return Err(Error::SupervisionLeak {
                predicate_id: bag.common_predicate_id,
            });
        }
    }
    if bags.is_empty() && episodes > 0 {
        return Err(Error::Config("no training bags supplied".into()));
    }
    let mode = checkpoint.embed_mode;
    let cfg = checkpoint
        .relation
        .as_ref()
        .ok_or_else(|| Error::Config("checkpoint has no relation section; initialize first".into()))?
        .config
        .clone();
    cfg.validate()?;
    let train_embedder = !cfg.freeze_embedder && mode == EmbedMode::Translation;
    let adam = cfg.adam();
    let start = checkpoint.relation.as_ref().unwrap().completed_episodes;

    for episode_idx in start..start + episodes {
        let pass = episode_idx / bags.len();
        let slot = episode_idx % bags.len();
        let order = {
            let mut order: Vec<usize> = (0..bags.len()).collect();
            use rand::seq::SliceRandom;
            order.shuffle(&mut stream_rng(cfg.seed, "episode-order", pass as u64));
            order
        };
        let bag = &bags[order[slot]];

        let mut rng = stream_rng(cfg.seed, "episode", episode_idx as u64);
        let episode = match build_episode(manifest, bag, cfg.negative_ratio, &mut rng)? {
            Ok(ep) => ep,
            Err(_skip) => {
                let section = checkpoint.relation.as_mut().unwrap();
                section.completed_episodes = episode_idx + 1;
                continue;
            }
        };
        let pairs = realize_pairs(&episode, &checkpoint.embedder, mode)?;

        let section = checkpoint.relation.as_mut().unwrap();
        let d = section.params.embed_dim;
        let mut grads = RelationNetGrads::zeros(d);
        let mut input_grads: Vec<(usize, Vec<f64>, usize, Vec<f64>)> = Vec::new();
        let scale = 1.0 / pairs.len() as f64;
        let mut total = 0.0;
        for (pair, &(ci, cj, _)) in pairs.iter().zip(episode.pairs.iter()) {
            let score = section.params.score(&pair.f_first, &pair.f_second);
            total += logistic_loss(score, pair.label);
            // d/d score of softplus(-y*score) = -y * sigmoid(-y*score)
            let upstream = -pair.label * sigmoid(-pair.label * score) * scale;
            let (df_i, df_j) = relation_backward(
                &section.params,
                &pair.f_first,
                &pair.f_second,
                upstream,
                &mut grads,
            );
            if train_embedder {
                input_grads.push((ci, df_i, cj, df_j));
            }
        }
        let loss = total * scale;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                episode: episode_idx,
                loss,
            });
        }

        section.opt.step += 1;
        let t = section.opt.step;
        adam_step(
            &adam,
            t,
            &mut section.params.combine_weight.data,
            &grads.combine_weight.data,
            &mut section.opt.combine_weight,
        );
        adam_step(
            &adam,
            t,
            &mut section.params.combine_bias,
            &grads.combine_bias,
            &mut section.opt.combine_bias,
        );
        adam_step(
            &adam,
            t,
            &mut section.params.gate_weight.data,
            &grads.gate_weight.data,
            &mut section.opt.gate_weight,
        );
        adam_step(
            &adam,
            t,
            &mut section.params.gate_bias,
            &grads.gate_bias,
            &mut section.opt.gate_bias,
        );
        adam_step(
            &adam,
            t,
            &mut section.params.readout_weight,
            &grads.readout_weight,
            &mut section.opt.readout_weight,
        );
        let mut bias = [section.params.readout_bias];
        adam_step(
            &adam,
            t,
            &mut bias,
            &[grads.readout_bias],
            &mut section.opt.readout_bias,
        );
        section.params.readout_bias = bias[0];

        if train_embedder {
            apply_embedder_grads(
                &mut checkpoint.embedder,
                &mut checkpoint.embedder_opt,
                &adam,
                &episode,
                &input_grads,
            );
        }

        let section = checkpoint.relation.as_mut().unwrap();
        section.loss_history.push(LossRecord {
            episode: episode_idx,
            loss,
        });
        section.completed_episodes = episode_idx + 1;
        on_episode(episode_idx, loss);
    }

    if train_embedder {
        checkpoint.embedder_opt = embedder_opt_taken;
    }
    Ok(())
}

/// Push relation-net input gradients through the translation embedder.
fn apply_embedder_grads(
    embedder: &mut EmbedderParams,
    opt: &mut EmbedderOptState,
    adam: &AdamConfig,
    episode: &Episode,
    input_grads: &[(usize, Vec<f64>, usize, Vec<f64>)],
) {
    let (rows, cols) = (embedder.embed_dim, embedder.input_dim);
    let mut grad_subject = Matrix::zeros(rows, cols);
    let mut grad_object = Matrix::zeros(rows, cols);
    for (ci, df_i, cj, df_j) in input_grads {
        for (cand_idx, df) in [(ci, df_i), (cj, df_j)] {
            let cand = &episode.candidates[*cand_idx];
            let neg: Vec<f64> = df.iter().map(|v| -v).collect();
            grad_object.add_outer(df, &cand.object_feature, 0);
            grad_subject.add_outer(&neg, &cand.subject_feature, 0);
        }
    }
    opt.step += 1;
    let t = opt.step;
    match &mut embedder.projection {
        Projection::Shared(m) => {
            let mut combined = grad_object;
            for (g, s) in combined.data.iter_mut().zip(grad_subject.data.iter()) {
                *g += s;
            }
            adam_step(adam, t, &mut m.data, &combined.data, &mut opt.subject_proj);
        }
        Projection::Split { subject, object } => {
            adam_step(adam, t, &mut subject.data, &grad_subject.data, &mut opt.subject_proj);
            adam_step(
                adam,
                t,
                &mut object.data,
                &grad_object.data,
                opt.object_proj.as_mut().expect("split optimizer state"),
            );
        }
    }
}

/// Fresh checkpoint around existing embedder weights (used when training
/// starts from a pretrained embedder or from a random init).
pub fn new_checkpoint(seed: u64, embed_mode: EmbedMode, embedder: EmbedderParams) -> Checkpoint {
    let embedder_opt = EmbedderOptState::zeros_like(&embedder);
    Checkpoint {
        schema_version: CHECKPOINT_SCHEMA_VERSION,
        seed,
        embed_mode,
        embedder,
        embedder_opt,
        pretrain_steps: 0,
        pretrain_loss_history: Vec::new(),
        relation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{BBox, ImageRecord, Region, RelationshipAnnotation, Split};
    use std::collections::{BTreeMap, BTreeSet};

    fn logistic_examples() {
        // placeholder (real tests below)
    }

    #[test]
    fn logistic_loss_values() {
        let _ = logistic_examples;
        assert!((logistic_loss(0.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(logistic_loss(40.0, 1.0) < 1e-15);
        // ln(1 + e^2)
        assert!((logistic_loss(2.0, -1.0) - 2.1269280110429727).abs() < 1e-12);
    }

    #[test]
    fn logistic_loss_monotonicity() {
        let scores = [-3.0, -1.0, 0.0, 0.5, 2.0, 5.0];
        for w in scores.windows(2) {
            assert!(logistic_loss(w[1], 1.0) < logistic_loss(w[0], 1.0));
            assert!(logistic_loss(w[1], -1.0) > logistic_loss(w[0], -1.0));
            assert!(logistic_loss(w[0], 1.0) >= 0.0);
        }
    }

    fn manifest_with_predicates() -> (DatasetManifest, Vec<Bag>) {
        // Four well-separated regions per image; annotations use (0,1) and
        // (2,3) so matching is exact.
        let region = |x: f64, app: f64| Region {
            bbox: BBox::new(x, 0.1, x + 0.2, 0.35).unwrap(),
            appearance: vec![app, app * 0.5],
            class_scores: vec![0.5, 0.5],
            objectness: 0.9,
        };
        let image = |id: &str, preds: &[u32]| {
            let regions = vec![
                region(0.02, 1.0),
                region(0.27, 2.0),
                region(0.52, 3.0),
                region(0.77, 4.0),
            ];
            let annotations = preds
                .iter()
                .enumerate()
                .map(|(k, &pid)| {
                    let (s, o) = if k % 2 == 0 { (0, 1) } else { (2, 3) };
                    RelationshipAnnotation {
                        subject_box: regions[s].bbox,
                        object_box: regions[o].bbox,
                        predicate_id: pid,
                        matched: None,
                    }
                })
                .collect();
            ImageRecord {
                image_id: id.into(),
                regions,
                annotations,
            }
        };
        let manifest = DatasetManifest {
            schema_version: 1,
            appearance_dim: 2,
            class_dim: 2,
            predicates: BTreeMap::from([(0, "p0".into()), (1, "p1".into()), (9, "t".into())]),
            train_predicates: BTreeSet::from([0, 1]),
            test_predicates: BTreeSet::from([9]),
            images: vec![
                image("a", &[0, 1]),
                image("b", &[0]),
                image("c", &[0, 1]),
                image("d", &[1, 9]),
            ],
            provenance: None,
        }
        .prepare(0.5, 100, 0.5);
        let bags = vec![
            Bag {
                image_ids: vec!["a".into(), "b".into()],
                common_predicate_id: 0,
            },
            Bag {
                image_ids: vec!["a".into(), "c".into(), "d".into()],
                common_predicate_id: 1,
            },
        ];
        (manifest, bags)
    }

    #[test]
    fn episode_pair_counts_and_labels() {
        let (manifest, bags) = manifest_with_predicates();
        let mut rng = stream_rng(0, "test", 0);
        // bag 0: images a (cands p0, p1) and b (cand p0)
        let episode = build_episode(&manifest, &bags[0], 3, &mut rng)
            .unwrap()
            .unwrap();
        // ordered cross-image pairs: 2*1 + 1*2 = 4, of which (p0,p0) both
        // orders are positive
        assert_eq!(episode.pairs.len(), 4);
        let positives: Vec<_> = episode.pairs.iter().filter(|p| p.2 > 0.0).collect();
        assert_eq!(positives.len(), 2);
        for (i, j, _) in &episode.pairs {
            assert_ne!(
                episode.candidates[*i].bag_slot,
                episode.candidates[*j].bag_slot
            );
        }
    }

    #[test]
    fn episode_counts_three_annotations_each() {
        // 4 images x 3 candidates -> 4*3*(3*3) = 108 ordered cross pairs
        let region = |x: f64| Region {
            bbox: BBox::new(x, 0.1, x + 0.1, 0.3).unwrap(),
            appearance: vec![x],
            class_scores: vec![1.0],
            objectness: 0.9,
        };
        let image = |id: &str| {
            let regions: Vec<Region> = (0..6).map(|i| region(0.02 + 0.15 * i as f64)).collect();
            let annotations = (0..3)
                .map(|k| RelationshipAnnotation {
                    subject_box: regions[2 * k].bbox,
                    object_box: regions[2 * k + 1].bbox,
                    predicate_id: k as u32,
                    matched: None,
                })
                .collect();
            ImageRecord {
                image_id: id.into(),
                regions,
                annotations,
            }
        };
        let manifest = DatasetManifest {
            schema_version: 1,
            appearance_dim: 1,
            class_dim: 1,
            predicates: BTreeMap::from([(0, "a".into()), (1, "b".into()), (2, "c".into())]),
            train_predicates: BTreeSet::from([0, 1, 2]),
            test_predicates: BTreeSet::new(),
            images: vec![image("w"), image("x"), image("y"), image("z")],
            provenance: None,
        }
        .prepare(0.5, 100, 0.5);
        let bag = Bag {
            image_ids: vec!["w".into(), "x".into(), "y".into(), "z".into()],
            common_predicate_id: 0,
        };
        // huge ratio: keep all negatives
        let mut rng = stream_rng(0, "test", 1);
        let episode = build_episode(&manifest, &bag, 1000, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(episode.pairs.len(), 108);
        // positives: one p0 candidate per image -> 4*3 ordered pairs
        assert_eq!(episode.pairs.iter().filter(|p| p.2 > 0.0).count(), 12);
    }

    #[test]
    fn episode_skips_image_without_candidates() {
        let (mut manifest, bags) = manifest_with_predicates();
        // strip image b's annotations
        manifest.images[1].annotations.clear();
        let mut rng = stream_rng(0, "test", 2);
        let outcome = build_episode(&manifest, &bags[0], 3, &mut rng).unwrap();
        assert_eq!(
            outcome.unwrap_err(),
            EpisodeSkip::ImageWithoutCandidates("b".into())
        );
    }

    fn fresh_training_checkpoint(seed: u64, episodes: usize) -> (DatasetManifest, Vec<Bag>, Checkpoint) {
        let (manifest, bags) = manifest_with_predicates();
        let embedder = EmbedderParams::init(8, 4, 2, false, subseed(seed, "embed-init", 0));
        let mut ckpt = new_checkpoint(seed, EmbedMode::Translation, embedder);
        init_training(
            &mut ckpt,
            TrainConfig {
                episodes,
                seed,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        (manifest, bags, ckpt)
    }

    #[test]
    fn zero_episodes_is_a_no_op() {
        let (manifest, bags, mut ckpt) = fresh_training_checkpoint(5, 0);
        let before = ckpt.clone();
        train(&manifest, &bags, &mut ckpt, 0, |_, _| {}).unwrap();
        assert_eq!(before, ckpt);
    }

    #[test]
    fn training_is_deterministic_under_seed() {
        let (manifest, bags, mut a) = fresh_training_checkpoint(7, 20);
        let (_, _, mut b) = fresh_training_checkpoint(7, 20);
        train(&manifest, &bags, &mut a, 20, |_, _| {}).unwrap();
        train(&manifest, &bags, &mut b, 20, |_, _| {}).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resume_equals_straight_run() {
        let (manifest, bags, mut split_run) = fresh_training_checkpoint(9, 30);
        train(&manifest, &bags, &mut split_run, 12, |_, _| {}).unwrap();
        train(&manifest, &bags, &mut split_run, 18, |_, _| {}).unwrap();

        let (_, _, mut straight) = fresh_training_checkpoint(9, 30);
        train(&manifest, &bags, &mut straight, 30, |_, _| {}).unwrap();
        assert_eq!(split_run, straight);
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let (manifest, bags) = manifest_with_predicates();
        let embedder = EmbedderParams::init(8, 4, 2, false, 1);
        let mut ckpt = new_checkpoint(1, EmbedMode::Translation, embedder);
        init_training(
            &mut ckpt,
            TrainConfig {
                learning_rate: 0.0,
                episodes: 10,
                seed: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let params_before = ckpt.relation.as_ref().unwrap().params.clone();
        train(&manifest, &bags, &mut ckpt, 10, |_, _| {}).unwrap();
        assert_eq!(ckpt.relation.as_ref().unwrap().params, params_before);
    }

    #[test]
    fn test_split_bag_aborts_training() {
        let (manifest, _, mut ckpt) = fresh_training_checkpoint(3, 5);
        let bags = vec![Bag {
            image_ids: vec!["a".into(), "d".into()],
            common_predicate_id: 9,
        }];
        let err = train(&manifest, &bags, &mut ckpt, 5, |_, _| {});
        assert!(matches!(err, Err(Error::SupervisionLeak { predicate_id: 9 })));
    }

    #[test]
    fn training_reduces_loss_on_separable_pairs() {
        let (manifest, bags, mut ckpt) = fresh_training_checkpoint(11, 200);
        let mut losses = Vec::new();
        train(&manifest, &bags, &mut ckpt, 200, |_, loss| losses.push(loss)).unwrap();
        let head: f64 = losses[..20].iter().sum::<f64>() / 20.0;
        let tail: f64 = losses[losses.len() - 20..].iter().sum::<f64>() / 20.0;
        assert!(
            tail < head,
            "mean loss did not drop: head {head}, tail {tail}"
        );
    }

    #[test]
    fn split_validation_is_checked() {
        let (manifest, bags) = manifest_with_predicates();
        assert_eq!(manifest.split_predicates(Split::Test).len(), 1);
        assert!(bags.iter().all(|b| b.size() >= 2));
    }
}
