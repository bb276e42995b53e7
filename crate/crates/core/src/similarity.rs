//! Learned similarity over relationship embeddings.
//!
//! The relation network combines two embeddings through a gated activation
//! (a tanh branch multiplied elementwise by a sigmoid gate, plus the plain
//! mean of the inputs) and reads the combination out through a linear layer.
//! The pairwise cost used by the labeling objective is the negated score.
//!
//! Forward evaluation always splits the combined `[f_i; f_j]` input into its
//! two halves and sums the half-projections, so single-pair scoring and the
//! batched score-matrix path round identically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradcheck::{max_rel_error, GradGroup, GradReport};
use crate::linalg::{dot, sigmoid, Matrix};
use crate::optim::Moments;

/// Relation-network weights for embeddings of width `embed_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationNetParams {
    pub embed_dim: usize,
    /// tanh branch, `embed_dim x 2*embed_dim`.
    pub combine_weight: Matrix,
    pub combine_bias: Vec<f64>,
    /// sigmoid gate, `embed_dim x 2*embed_dim`.
    pub gate_weight: Matrix,
    pub gate_bias: Vec<f64>,
    pub readout_weight: Vec<f64>,
    pub readout_bias: f64,
}

impl RelationNetParams {
    /// Uniform init scaled by fan-in, zero biases.
    pub fn init(embed_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / ((2 * embed_dim) as f64).sqrt();
        let readout_bound = 1.0 / (embed_dim as f64).sqrt();
        RelationNetParams {
            embed_dim,
            combine_weight: Matrix::uniform(embed_dim, 2 * embed_dim, bound, &mut rng),
            combine_bias: vec![0.0; embed_dim],
            gate_weight: Matrix::uniform(embed_dim, 2 * embed_dim, bound, &mut rng),
            gate_bias: vec![0.0; embed_dim],
            readout_weight: (0..embed_dim)
                .map(|_| rng.gen_range(-readout_bound..=readout_bound))
                .collect(),
            readout_bias: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.embed_dim;
        self.combine_weight
            .validate_shape("combine weight", d, 2 * d)?;
        self.gate_weight.validate_shape("gate weight", d, 2 * d)?;
        for (name, v) in [
            ("combine bias", &self.combine_bias),
            ("gate bias", &self.gate_bias),
            ("readout weight", &self.readout_weight),
        ] {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    what: name.into(),
                    expected: d,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("{name}: non-finite entries")));
            }
        }
        if !self.readout_bias.is_finite() {
            return Err(Error::Validation("readout bias: non-finite".into()));
        }
        Ok(())
    }

    fn check_dim(&self, f: &[f64]) {
        assert_eq!(
            f.len(),
            self.embed_dim,
            "embedding width {} does not match relation net width {}",
            f.len(),
            self.embed_dim
        );
    }

    /// Half-projections of one embedding through both branch matrices.
    pub fn project_first(&self, f: &[f64]) -> HalfProjection {
        self.check_dim(f);
        HalfProjection {
            combine: self.combine_weight.matvec_cols(f, 0),
            gate: self.gate_weight.matvec_cols(f, 0),
        }
    }

    /// As [`Self::project_first`] but through the second-argument columns.
    pub fn project_second(&self, f: &[f64]) -> HalfProjection {
        self.check_dim(f);
        HalfProjection {
            combine: self.combine_weight.matvec_cols(f, self.embed_dim),
            gate: self.gate_weight.matvec_cols(f, self.embed_dim),
        }
    }

    /// Gated combination `K` of two embeddings.
    pub fn gated_combine(&self, f_i: &[f64], f_j: &[f64]) -> Vec<f64> {
        let left = self.project_first(f_i);
        let right = self.project_second(f_j);
        (0..self.embed_dim)
            .map(|k| {
                let t = (left.combine[k] + right.combine[k] + self.combine_bias[k]).tanh();
                let g = sigmoid(left.gate[k] + right.gate[k] + self.gate_bias[k]);
                t * g + (f_i[k] + f_j[k]) / 2.0
            })
            .collect()
    }

    /// Raw (asymmetric) similarity score.
    pub fn score(&self, f_i: &[f64], f_j: &[f64]) -> f64 {
        let left = self.project_first(f_i);
        let right = self.project_second(f_j);
        self.score_from_halves(&left, &right, f_i, f_j)
    }

    /// Score from precomputed half-projections; rounds exactly like
    /// [`Self::score`].
    pub fn score_from_halves(
        &self,
        left: &HalfProjection,
        right: &HalfProjection,
        f_i: &[f64],
        f_j: &[f64],
    ) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.embed_dim {
            let t = (left.combine[k] + right.combine[k] + self.combine_bias[k]).tanh();
            let g = sigmoid(left.gate[k] + right.gate[k] + self.gate_bias[k]);
            acc += self.readout_weight[k] * (t * g + (f_i[k] + f_j[k]) / 2.0);
        }
        acc + self.readout_bias
    }
}

/// Projections of one embedding through the first- or second-argument
/// column blocks of both branch matrices.
#[derive(Debug, Clone)]
pub struct HalfProjection {
    pub combine: Vec<f64>,
    pub gate: Vec<f64>,
}

/// Gradients of a scalar function of the score with respect to every
/// parameter group, plus the two inputs.
#[derive(Debug, Clone)]
pub struct RelationNetGrads {
    pub combine_weight: Matrix,
    pub combine_bias: Vec<f64>,
    pub gate_weight: Matrix,
    pub gate_bias: Vec<f64>,
    pub readout_weight: Vec<f64>,
    pub readout_bias: f64,
}

impl RelationNetGrads {
    pub fn zeros(embed_dim: usize) -> Self {
        RelationNetGrads {
            combine_weight: Matrix::zeros(embed_dim, 2 * embed_dim),
            combine_bias: vec![0.0; embed_dim],
            gate_weight: Matrix::zeros(embed_dim, 2 * embed_dim),
            gate_bias: vec![0.0; embed_dim],
            readout_weight: vec![0.0; embed_dim],
            readout_bias: 0.0,
        }
    }
}

/// Exact analytic gradients of `upstream * score(f_i, f_j)`, accumulated
/// into `grads`. Returns the input gradients `(df_i, df_j)`.
pub fn relation_backward(
    params: &RelationNetParams,
    f_i: &[f64],
    f_j: &[f64],
    upstream: f64,
    grads: &mut RelationNetGrads,
) -> (Vec<f64>, Vec<f64>) {
    let d = params.embed_dim;
    let left = params.project_first(f_i);
    let right = params.project_second(f_j);

    let mut d_pre_combine = vec![0.0; d];
    let mut d_pre_gate = vec![0.0; d];
    for k in 0..d {
        let t = (left.combine[k] + right.combine[k] + params.combine_bias[k]).tanh();
        let g = sigmoid(left.gate[k] + right.gate[k] + params.gate_bias[k]);
        let d_k = params.readout_weight[k] * upstream;
        grads.readout_weight[k] += (t * g + (f_i[k] + f_j[k]) / 2.0) * upstream;
        d_pre_combine[k] = d_k * g * (1.0 - t * t);
        d_pre_gate[k] = d_k * t * g * (1.0 - g);
    }
    grads.readout_bias += upstream;

    grads.combine_weight.add_outer(&d_pre_combine, f_i, 0);
    grads.combine_weight.add_outer(&d_pre_combine, f_j, d);
    grads.gate_weight.add_outer(&d_pre_gate, f_i, 0);
    grads.gate_weight.add_outer(&d_pre_gate, f_j, d);
    for k in 0..d {
        grads.combine_bias[k] += d_pre_combine[k];
        grads.gate_bias[k] += d_pre_gate[k];
    }

    let d_cat_combine = params.combine_weight.matvec_transposed(&d_pre_combine);
    let d_cat_gate = params.gate_weight.matvec_transposed(&d_pre_gate);
    let mut df_i = vec![0.0; d];
    let mut df_j = vec![0.0; d];
    for c in 0..d {
        let mean_term = params.readout_weight[c] * upstream * 0.5;
        df_i[c] = d_cat_combine[c] + d_cat_gate[c] + mean_term;
        df_j[c] = d_cat_combine[d + c] + d_cat_gate[d + c] + mean_term;
    }
    (df_i, df_j)
}

/// Optimizer state for the relation network tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationOptState {
    pub step: u64,
    pub combine_weight: Moments,
    pub combine_bias: Moments,
    pub gate_weight: Moments,
    pub gate_bias: Moments,
    pub readout_weight: Moments,
    pub readout_bias: Moments,
}

impl RelationOptState {
    pub fn zeros_like(params: &RelationNetParams) -> Self {
        let d = params.embed_dim;
        RelationOptState {
            step: 0,
            combine_weight: Moments::zeros(d * 2 * d),
            combine_bias: Moments::zeros(d),
            gate_weight: Moments::zeros(d * 2 * d),
            gate_bias: Moments::zeros(d),
            readout_weight: Moments::zeros(d),
            readout_bias: Moments::zeros(1),
        }
    }
}

/// Negated similarity: the pairwise term of the labeling objective.
#[inline]
pub fn pairwise_cost(score: f64) -> f64 {
    -score
}

/// Cosine similarity with a neutral-zero convention for degenerate inputs.
pub fn cosine_score(f_i: &[f64], f_j: &[f64]) -> f64 {
    let ni = dot(f_i, f_i).sqrt();
    let nj = dot(f_j, f_j).sqrt();
    if ni < 1e-12 || nj < 1e-12 {
        return 0.0;
    }
    dot(f_i, f_j) / (ni * nj)
}

/// A similarity function over two equal-width embeddings.
pub trait PairScorer: Sync {
    fn score(&self, f_i: &[f64], f_j: &[f64]) -> f64;

    /// Cost of assigning the ordered pair, plus the reverse order.
    ///
    /// Every objective evaluation goes through this single kernel so brute
    /// force, greedy inference, and reported costs agree bitwise.
    fn mutual_cost(&self, f_a: &[f64], f_b: &[f64]) -> f64 {
        pairwise_cost(self.score(f_a, f_b)) + pairwise_cost(self.score(f_b, f_a))
    }

    /// All mutual costs between two label-embedding lists.
    fn mutual_cost_matrix(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> Matrix {
        let mut out = Matrix::zeros(a.len(), b.len());
        for (i, fa) in a.iter().enumerate() {
            for (j, fb) in b.iter().enumerate() {
                out.set(i, j, self.mutual_cost(fa, fb));
            }
        }
        out
    }
}

/// Relation-network scorer; `symmetrize` averages both argument orders.
pub struct RelationScorer<'a> {
    pub params: &'a RelationNetParams,
    pub symmetrize: bool,
}

impl RelationScorer<'_> {
    fn score_halves(
        &self,
        first_a: &HalfProjection,
        second_a: &HalfProjection,
        first_b: &HalfProjection,
        second_b: &HalfProjection,
        f_a: &[f64],
        f_b: &[f64],
    ) -> f64 {
        let fwd = self.params.score_from_halves(first_a, second_b, f_a, f_b);
        if !self.symmetrize {
            return fwd;
        }
        let bwd = self.params.score_from_halves(first_b, second_a, f_b, f_a);
        (fwd + bwd) / 2.0
    }
}

impl PairScorer for RelationScorer<'_> {
    fn score(&self, f_i: &[f64], f_j: &[f64]) -> f64 {
        self.score_halves(
            &self.params.project_first(f_i),
            &self.params.project_second(f_i),
            &self.params.project_first(f_j),
            &self.params.project_second(f_j),
            f_i,
            f_j,
        )
    }

    fn mutual_cost_matrix(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> Matrix {
        let first_a: Vec<_> = a.iter().map(|f| self.params.project_first(f)).collect();
        let second_a: Vec<_> = a.iter().map(|f| self.params.project_second(f)).collect();
        let first_b: Vec<_> = b.iter().map(|f| self.params.project_first(f)).collect();
        let second_b: Vec<_> = b.iter().map(|f| self.params.project_second(f)).collect();
        let mut out = Matrix::zeros(a.len(), b.len());
        for i in 0..a.len() {
            for j in 0..b.len() {
                let fwd =
                    self.score_halves(&first_a[i], &second_a[i], &first_b[j], &second_b[j], &a[i], &b[j]);
                let bwd =
                    self.score_halves(&first_b[j], &second_b[j], &first_a[i], &second_a[i], &b[j], &a[i]);
                out.set(i, j, pairwise_cost(fwd) + pairwise_cost(bwd));
            }
        }
        out
    }
}

/// Parameter-free cosine scorer.
pub struct CosineScorer;

impl PairScorer for CosineScorer {
    fn score(&self, f_i: &[f64], f_j: &[f64]) -> f64 {
        cosine_score(f_i, f_j)
    }
}

/// Finite-difference check of the relation-network gradients at `h = 1e-5`.
pub fn grad_check(seed: u64, embed_dim: usize) -> GradReport {
    let params = RelationNetParams::init(embed_dim, crate::rng::subseed(seed, "gradcheck", 0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f_i: Vec<f64> = (0..embed_dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let f_j: Vec<f64> = (0..embed_dim).map(|_| rng.gen_range(-1.5..1.5)).collect();

    let mut grads = RelationNetGrads::zeros(embed_dim);
    let (df_i, df_j) = relation_backward(&params, &f_i, &f_j, 1.0, &mut grads);

    let h = 1e-5;
    let diff = |plus: f64, minus: f64| (plus - minus) / (2.0 * h);

    let perturb_params = |edit: &dyn Fn(&mut RelationNetParams, f64)| -> f64 {
        let mut p = params.clone();
        edit(&mut p, h);
        let plus = p.score(&f_i, &f_j);
        let mut m = params.clone();
        edit(&mut m, -h);
        diff(plus, m.score(&f_i, &f_j))
    };

    let numeric_tensor = |len: usize,
                          edit: &dyn Fn(&mut RelationNetParams, usize, f64)|
     -> Vec<f64> {
        (0..len)
            .map(|idx| perturb_params(&|p: &mut RelationNetParams, delta: f64| edit(p, idx, delta)))
            .collect()
    };

    let d = embed_dim;
    let numeric_combine_w = numeric_tensor(d * 2 * d, &|p, i, dl| p.combine_weight.data[i] += dl);
    let numeric_combine_b = numeric_tensor(d, &|p, i, dl| p.combine_bias[i] += dl);
    let numeric_gate_w = numeric_tensor(d * 2 * d, &|p, i, dl| p.gate_weight.data[i] += dl);
    let numeric_gate_b = numeric_tensor(d, &|p, i, dl| p.gate_bias[i] += dl);
    let numeric_readout_w = numeric_tensor(d, &|p, i, dl| p.readout_weight[i] += dl);
    let numeric_readout_b = numeric_tensor(1, &|p, _, dl| p.readout_bias += dl);

    let numeric_input = |which_i: bool| -> Vec<f64> {
        (0..d)
            .map(|idx| {
                let mut fp = (f_i.clone(), f_j.clone());
                if which_i {
                    fp.0[idx] += h;
                } else {
                    fp.1[idx] += h;
                }
                let plus = params.score(&fp.0, &fp.1);
                let mut fm = (f_i.clone(), f_j.clone());
                if which_i {
                    fm.0[idx] -= h;
                } else {
                    fm.1[idx] -= h;
                }
                diff(plus, params.score(&fm.0, &fm.1))
            })
            .collect()
    };

    let groups = vec![
        GradGroup {
            name: "relation.combine_weight".into(),
            max_rel_error: max_rel_error(&grads.combine_weight.data, &numeric_combine_w),
        },
        GradGroup {
            name: "relation.combine_bias".into(),
            max_rel_error: max_rel_error(&grads.combine_bias, &numeric_combine_b),
        },
        GradGroup {
            name: "relation.gate_weight".into(),
            max_rel_error: max_rel_error(&grads.gate_weight.data, &numeric_gate_w),
        },
        GradGroup {
            name: "relation.gate_bias".into(),
            max_rel_error: max_rel_error(&grads.gate_bias, &numeric_gate_b),
        },
        GradGroup {
            name: "relation.readout_weight".into(),
            max_rel_error: max_rel_error(&grads.readout_weight, &numeric_readout_w),
        },
        GradGroup {
            name: "relation.readout_bias".into(),
            max_rel_error: max_rel_error(&[grads.readout_bias], &numeric_readout_b),
        },
        GradGroup {
            name: "relation.input_first".into(),
            max_rel_error: max_rel_error(&df_i, &numeric_input(true)),
        },
        GradGroup {
            name: "relation.input_second".into(),
            max_rel_error: max_rel_error(&df_j, &numeric_input(false)),
        },
    ];
    GradReport { seed, groups }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn randvec(seed: u64, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    #[test]
    fn zero_combine_branch_reduces_to_mean() {
        let mut p = RelationNetParams::init(3, 1);
        p.combine_weight = Matrix::zeros(3, 6);
        p.combine_bias = vec![0.0; 3];
        let f_i = [1.0, 2.0, 3.0];
        let f_j = [5.0, 6.0, 7.0];
        assert_eq!(p.gated_combine(&f_i, &f_j), vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn all_zero_inputs_and_biases_give_zero_combination() {
        let mut p = RelationNetParams::init(4, 2);
        p.combine_bias = vec![0.0; 4];
        p.gate_bias = vec![0.7, -0.3, 0.1, 2.0];
        let zero = [0.0; 4];
        assert_eq!(p.gated_combine(&zero, &zero), vec![0.0; 4]);
    }

    #[test]
    fn gated_combine_matches_formula_oracle() {
        let p = RelationNetParams::init(3, 7);
        let f_i = randvec(10, 3);
        let f_j = randvec(11, 3);
        let k = p.gated_combine(&f_i, &f_j);
        let mut cat = f_i.clone();
        cat.extend_from_slice(&f_j);
        for r in 0..3 {
            let mut pre1 = p.combine_bias[r];
            let mut pre2 = p.gate_bias[r];
            for c in 0..6 {
                pre1 += p.combine_weight.get(r, c) * cat[c];
                pre2 += p.gate_weight.get(r, c) * cat[c];
            }
            let expect = pre1.tanh() * (1.0 / (1.0 + (-pre2).exp())) + (f_i[r] + f_j[r]) / 2.0;
            assert!((k[r] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_readout_scores_the_bias() {
        let mut p = RelationNetParams::init(5, 3);
        p.readout_weight = vec![0.0; 5];
        p.readout_bias = -2.5;
        assert_eq!(p.score(&randvec(1, 5), &randvec(2, 5)), -2.5);
    }

    #[test]
    fn unit_readout_over_mean_combination() {
        let mut p = RelationNetParams::init(2, 4);
        p.combine_weight = Matrix::zeros(2, 4);
        p.combine_bias = vec![0.0; 2];
        p.readout_weight = vec![1.0, 1.0];
        p.readout_bias = 0.0;
        // K = mean = (2, 3); R = 5
        assert_eq!(p.score(&[1.0, 1.0], &[3.0, 5.0]), 5.0);
    }

    #[test]
    fn score_matches_formula_oracle() {
        let p = RelationNetParams::init(4, 9);
        let f_i = randvec(20, 4);
        let f_j = randvec(21, 4);
        let k = p.gated_combine(&f_i, &f_j);
        let mut expect = p.readout_bias;
        for r in 0..4 {
            expect += p.readout_weight[r] * k[r];
        }
        assert!((p.score(&f_i, &f_j) - expect).abs() < 1e-12);
    }

    #[test]
    fn raw_score_is_asymmetric_symmetrized_is_exact() {
        let p = RelationNetParams::init(6, 13);
        let f_i = randvec(30, 6);
        let f_j = randvec(31, 6);
        assert_ne!(p.score(&f_i, &f_j), p.score(&f_j, &f_i));
        let sym = RelationScorer {
            params: &p,
            symmetrize: true,
        };
        assert_eq!(sym.score(&f_i, &f_j), sym.score(&f_j, &f_i));
    }

    #[test]
    fn cosine_basics() {
        let f = [0.3, -0.4, 0.5];
        assert!((cosine_score(&f, &f) - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        assert!((cosine_score(&f, &neg) + 1.0).abs() < 1e-12);
        assert_eq!(cosine_score(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine_score(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn cosine_is_symmetric_and_scale_invariant() {
        let a = randvec(40, 5);
        let b = randvec(41, 5);
        assert_eq!(cosine_score(&a, &b), cosine_score(&b, &a));
        let scaled: Vec<f64> = a.iter().map(|v| 3.5 * v).collect();
        assert!((cosine_score(&scaled, &b) - cosine_score(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn pairwise_cost_is_negation() {
        assert_eq!(pairwise_cost(5.0), -5.0);
        assert_eq!(pairwise_cost(1.0), -1.0);
        let mut prev = f64::INFINITY;
        for score in [-3.0, -0.5, 0.0, 0.5, 3.0] {
            let cost = pairwise_cost(score);
            assert!(cost < prev);
            prev = cost;
        }
    }

    #[test]
    fn dead_readout_kills_branch_gradients() {
        let mut p = RelationNetParams::init(3, 5);
        p.readout_weight = vec![0.0; 3];
        let mut grads = RelationNetGrads::zeros(3);
        relation_backward(&p, &randvec(1, 3), &randvec(2, 3), 2.0, &mut grads);
        assert!(grads.combine_weight.data.iter().all(|g| *g == 0.0));
        assert!(grads.gate_weight.data.iter().all(|g| *g == 0.0));
        assert!(grads.combine_bias.iter().all(|g| *g == 0.0));
        assert!(grads.gate_bias.iter().all(|g| *g == 0.0));
        assert_eq!(grads.readout_bias, 2.0);
    }

    #[test]
    fn readout_gradient_is_scaled_combination() {
        let p = RelationNetParams::init(3, 5);
        let f_i = randvec(3, 3);
        let f_j = randvec(4, 3);
        let k = p.gated_combine(&f_i, &f_j);
        let mut grads = RelationNetGrads::zeros(3);
        relation_backward(&p, &f_i, &f_j, 1.5, &mut grads);
        for r in 0..3 {
            assert!((grads.readout_weight[r] - 1.5 * k[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences_over_seeds() {
        for seed in 0..10 {
            let report = grad_check(seed, 5);
            for group in &report.groups {
                assert!(
                    group.max_rel_error < 1e-4,
                    "seed {seed} {} rel error {}",
                    group.name,
                    group.max_rel_error
                );
            }
        }
    }

    #[test]
    fn sabotaged_gradient_is_detected() {
        let params = RelationNetParams::init(4, 77);
        let f_i = randvec(50, 4);
        let f_j = randvec(51, 4);
        let mut grads = RelationNetGrads::zeros(4);
        relation_backward(&params, &f_i, &f_j, 1.0, &mut grads);
        let clean = grads.readout_weight.clone();
        grads.readout_weight[0] += 0.5;
        assert!(max_rel_error(&grads.readout_weight, &clean) > 1e-2);
    }

    #[test]
    fn grad_check_report_is_deterministic() {
        let a = grad_check(123, 4);
        let b = grad_check(123, 4);
        for (ga, gb) in a.groups.iter().zip(b.groups.iter()) {
            assert_eq!(ga.name, gb.name);
            assert_eq!(ga.max_rel_error, gb.max_rel_error);
        }
    }

    #[test]
    fn mutual_cost_matrix_matches_scalar_kernel_bitwise() {
        let p = RelationNetParams::init(4, 99);
        for symmetrize in [false, true] {
            let scorer = RelationScorer {
                params: &p,
                symmetrize,
            };
            let a: Vec<Vec<f64>> = (0..3).map(|i| randvec(60 + i, 4)).collect();
            let b: Vec<Vec<f64>> = (0..4).map(|i| randvec(70 + i, 4)).collect();
            let m = scorer.mutual_cost_matrix(&a, &b);
            for i in 0..3 {
                for j in 0..4 {
                    assert_eq!(m.get(i, j), scorer.mutual_cost(&a[i], &b[j]));
                }
            }
        }
    }
}
