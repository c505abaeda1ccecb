use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::corpus::{EmbeddingTable, EncodedQuestion};
use crate::neural::{
    bce_with_logits, dense_backward, dense_forward, gru_backward_into, gru_encode, sigmoid_vec, DenseParams,
    GruParams, GruTrace, Matrix,
};

/// How the content vector `c` and the user vector `u` are fused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregationMode {
    /// `c + P·u`, with `P` a learned bias-free `d × user_dim` projection.
    Addition,
    /// `[c, u]`.
    Concatenation,
}

impl FromStr for AggregationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "add" | "addition" => Ok(Self::Addition),
            "concat" | "concatenation" => Ok(Self::Concatenation),
            other => Err(format!(
                "unknown aggregation mode {other:?} (expected add or concat)"
            )),
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Addition => "add",
            Self::Concatenation => "concat",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Word vector size `m`.
    pub input_dim: usize,
    /// GRU hidden size `d`.
    pub hidden_dim: usize,
    pub user_dim: usize,
    pub num_tags: usize,
    pub mode: AggregationMode,
    /// Use one GRU for both title and body.
    pub share_encoder: bool,
}

impl ModelConfig {
    /// 300-dimensional words, 1000 hidden units, 128-dimensional users,
    /// concatenation.
    pub fn new(num_tags: usize) -> Self {
        Self {
            input_dim: 300,
            hidden_dim: 1000,
            user_dim: 128,
            num_tags,
            mode: AggregationMode::Concatenation,
            share_encoder: false,
        }
    }

    pub fn fused_dim(&self) -> usize {
        match self.mode {
            AggregationMode::Addition => self.hidden_dim,
            AggregationMode::Concatenation => self.hidden_dim + self.user_dim,
        }
    }
}

/// All learned parameters.
///
/// `body` is `None` when the title encoder is shared with the body.
/// `projection` is present exactly in addition mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub title: GruParams,
    pub body: Option<GruParams>,
    pub projection: Option<Matrix>,
    pub dense: DenseParams,
    pub mode: AggregationMode,
    pub user_dim: usize,
    pub dropout: f64,
}

/// Intermediate values of one forward pass, enough for [`ModelParams::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub title_trace: GruTrace,
    pub body_trace: GruTrace,
    pub content: Vec<f64>,
    pub user: Vec<f64>,
    pub fused: Vec<f64>,
    pub mask: Option<Vec<f64>>,
    pub dense_input: Vec<f64>,
    pub logits: Vec<f64>,
}

impl ForwardCache {
    pub fn probabilities(&self) -> Vec<f64> {
        sigmoid_vec(&self.logits)
    }
}

/// Fuses content and user vectors.
pub fn aggregate(
    content: &[f64],
    user: &[f64],
    mode: AggregationMode,
    projection: Option<&Matrix>,
) -> Result<Vec<f64>, ModelError> {
    match (mode, projection) {
        (AggregationMode::Addition, Some(p)) => {
            if p.rows() != content.len() {
                return Err(ModelError::ModeMismatch);
            }
            if p.cols() != user.len() {
                return Err(ModelError::UserDim {
                    expected: p.cols(),
                    found: user.len(),
                });
            }
            let mut fused = content.to_vec();
            p.mul_vec_acc(user, &mut fused);
            Ok(fused)
        }
        (AggregationMode::Concatenation, None) => {
            let mut fused = Vec::with_capacity(content.len() + user.len());
            fused.extend_from_slice(content);
            fused.extend_from_slice(user);
            Ok(fused)
        }
        _ => Err(ModelError::ModeMismatch),
    }
}

/// Indices of the `k` highest probabilities, highest first; equal
/// probabilities are ordered by ascending tag index.
pub fn rank_tags(probs: &[f64], k: usize) -> Result<Vec<usize>, ModelError> {
    if k == 0 || k > probs.len() {
        return Err(ModelError::K { k, len: probs.len() });
    }
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    idx.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

impl ModelParams {
    /// Glorot-uniform weights, zero dense bias, seeded.
    pub fn init(config: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, d) = (config.input_dim, config.hidden_dim);
        let title = GruParams::glorot(m, d, &mut rng);
        let body = (!config.share_encoder).then(|| GruParams::glorot(m, d, &mut rng));
        let projection =
            (config.mode == AggregationMode::Addition).then(|| Matrix::glorot(d, config.user_dim, &mut rng));
        let dense = DenseParams::glorot(config.fused_dim(), config.num_tags, &mut rng);
        Self {
            title,
            body,
            projection,
            dense,
            mode: config.mode,
            user_dim: config.user_dim,
            dropout: 0.0,
        }
    }

    pub fn zeros(config: &ModelConfig) -> Self {
        let (m, d) = (config.input_dim, config.hidden_dim);
        Self {
            title: GruParams::zeros(m, d),
            body: (!config.share_encoder).then(|| GruParams::zeros(m, d)),
            projection: (config.mode == AggregationMode::Addition).then(|| Matrix::zeros(d, config.user_dim)),
            dense: DenseParams::zeros(config.fused_dim(), config.num_tags),
            mode: config.mode,
            user_dim: config.user_dim,
            dropout: 0.0,
        }
    }

    /// Zero-filled parameters of the same structure, used as a gradient buffer.
    pub fn zeros_like(&self) -> Self {
        let mut z = Self::zeros(&self.config());
        z.dropout = self.dropout;
        z
    }

    pub fn config(&self) -> ModelConfig {
        ModelConfig {
            input_dim: self.title.input_dim(),
            hidden_dim: self.title.hidden_dim(),
            user_dim: self.user_dim,
            num_tags: self.dense.output_dim(),
            mode: self.mode,
            share_encoder: self.body.is_none(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.title.hidden_dim()
    }

    pub fn num_tags(&self) -> usize {
        self.dense.output_dim()
    }

    pub fn body_encoder(&self) -> &GruParams {
        self.body.as_ref().unwrap_or(&self.title)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.title.validate()?;
        if let Some(body) = &self.body {
            body.validate()?;
            if body.input_dim() != self.title.input_dim() || body.hidden_dim() != self.title.hidden_dim() {
                return Err(ModelError::Config(
                    "title and body encoders differ in shape".into(),
                ));
            }
        }
        match (&self.projection, self.mode) {
            (Some(p), AggregationMode::Addition) => {
                if p.shape() != (self.hidden_dim(), self.user_dim) {
                    return Err(ModelError::Config(
                        "projection must be hidden_dim × user_dim".into(),
                    ));
                }
            }
            (None, AggregationMode::Concatenation) => {}
            _ => return Err(ModelError::ModeMismatch),
        }
        self.dense.validate()?;
        if self.dense.input_dim() != self.config().fused_dim() {
            return Err(ModelError::Config(format!(
                "dense input is {}, fused representation is {}",
                self.dense.input_dim(),
                self.config().fused_dim()
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Every tensor with a stable name and its `(rows, cols)` shape, in the
    /// canonical order used by the optimizer and checkpoints.
    pub fn named_tensors(&self) -> Vec<(String, (usize, usize), &[f64])> {
        let mut out = Vec::new();
        push_gru(&mut out, "title", &self.title);
        if let Some(body) = &self.body {
            push_gru(&mut out, "body", body);
        }
        if let Some(p) = &self.projection {
            out.push(("projection".into(), p.shape(), p.as_slice()));
        }
        out.push((
            "dense.weight".into(),
            self.dense.weight.shape(),
            self.dense.weight.as_slice(),
        ));
        out.push(("dense.bias".into(), (1, self.dense.bias.len()), &self.dense.bias));
        out
    }

    /// Mutable views in the same order as [`named_tensors`](Self::named_tensors).
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        out.extend(self.title.matrices_mut().into_iter().map(Matrix::as_mut_slice));
        if let Some(body) = &mut self.body {
            out.extend(body.matrices_mut().into_iter().map(Matrix::as_mut_slice));
        }
        if let Some(p) = &mut self.projection {
            out.push(p.as_mut_slice());
        }
        out.push(self.dense.weight.as_mut_slice());
        out.push(&mut self.dense.bias);
        out
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.named_tensors()
            .into_iter()
            .flat_map(|(_, _, v)| v.iter().copied())
            .collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<(), ModelError> {
        let total: usize = self.tensors_mut().iter().map(|t| t.len()).sum();
        if total != flat.len() {
            return Err(ModelError::Config(format!(
                "flat parameter vector has {} values, model has {total}",
                flat.len()
            )));
        }
        let mut off = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= factor;
            }
        }
    }

    fn embed<'a>(&self, ids: &[usize], emb: &'a EmbeddingTable) -> Result<Vec<&'a [f64]>, ModelError> {
        ids.iter()
            .map(|&id| {
                if id < emb.rows() {
                    Ok(emb.row(id))
                } else {
                    Err(ModelError::Token { id, rows: emb.rows() })
                }
            })
            .collect()
    }

    fn encode_traced(
        &self,
        encoded: &EncodedQuestion,
        emb: &EmbeddingTable,
    ) -> Result<(Vec<f64>, GruTrace, GruTrace), ModelError> {
        if emb.dim() != self.title.input_dim() {
            return Err(ModelError::EmbeddingDim {
                expected: self.title.input_dim(),
                found: emb.dim(),
            });
        }
        let d = self.hidden_dim();
        let title = self.embed(encoded.title_ids(), emb)?;
        let (c_title, title_trace) = gru_encode(&self.title, title, &vec![0.0; d])?;
        let body = self.embed(encoded.body_ids(), emb)?;
        let (c_body, body_trace) = gru_encode(self.body_encoder(), body, &c_title)?;
        Ok((c_body, title_trace, body_trace))
    }

    /// Content vector: the title is folded from a zero state, the body
    /// (including trailing padding) from the title's final state.
    pub fn encode_content(
        &self,
        encoded: &EncodedQuestion,
        emb: &EmbeddingTable,
    ) -> Result<Vec<f64>, ModelError> {
        Ok(self.encode_traced(encoded, emb)?.0)
    }

    /// Forward pass; `mask` is an inverted-dropout mask over the fused vector.
    pub fn forward(
        &self,
        encoded: &EncodedQuestion,
        user: &[f64],
        emb: &EmbeddingTable,
        mask: Option<Vec<f64>>,
    ) -> Result<ForwardCache, ModelError> {
        if user.len() != self.user_dim {
            return Err(ModelError::UserDim {
                expected: self.user_dim,
                found: user.len(),
            });
        }
        let (content, title_trace, body_trace) = self.encode_traced(encoded, emb)?;
        let fused = aggregate(&content, user, self.mode, self.projection.as_ref())?;
        let dense_input = match &mask {
            Some(m) => {
                crate::neural::check_len("dropout mask", fused.len(), m.len())?;
                fused.iter().zip(m).map(|(f, m)| f * m).collect()
            }
            None => fused.clone(),
        };
        let logits = dense_forward(&self.dense, &dense_input)?;
        Ok(ForwardCache {
            title_trace,
            body_trace,
            content,
            user: user.to_vec(),
            fused,
            mask,
            dense_input,
            logits,
        })
    }

    /// Tag probabilities at inference time (no dropout).
    pub fn predict(
        &self,
        encoded: &EncodedQuestion,
        user: &[f64],
        emb: &EmbeddingTable,
    ) -> Result<Vec<f64>, ModelError> {
        Ok(self.forward(encoded, user, emb, None)?.probabilities())
    }

    /// Prediction from the content vector alone, bypassing fusion: in
    /// addition mode `σ(dense(c))`, in concatenation mode `σ(dense([c, 0]))`.
    pub fn predict_content_only(
        &self,
        encoded: &EncodedQuestion,
        emb: &EmbeddingTable,
    ) -> Result<Vec<f64>, ModelError> {
        let mut input = self.encode_content(encoded, emb)?;
        if self.mode == AggregationMode::Concatenation {
            input.resize(input.len() + self.user_dim, 0.0);
        }
        Ok(sigmoid_vec(&dense_forward(&self.dense, &input)?))
    }

    /// Adds the gradient of the mean BCE loss for `cache` into `grads` and
    /// returns the loss.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        target: &[f64],
        grads: &mut ModelParams,
    ) -> Result<f64, ModelError> {
        if target.len() != self.num_tags() {
            return Err(ModelError::TargetLen {
                expected: self.num_tags(),
                found: target.len(),
            });
        }
        let (loss, d_logits) = bce_with_logits(&cache.logits, target)?;
        let mut d_fused = dense_backward(&self.dense, &cache.dense_input, &d_logits, &mut grads.dense)?;
        if let Some(mask) = &cache.mask {
            for (g, m) in d_fused.iter_mut().zip(mask) {
                *g *= m;
            }
        }
        let d = self.hidden_dim();
        match (&self.mode, &mut grads.projection) {
            (AggregationMode::Addition, Some(gp)) => gp.add_outer(&d_fused, &cache.user),
            (AggregationMode::Concatenation, None) => d_fused.truncate(d),
            _ => return Err(ModelError::ModeMismatch),
        }
        let body_grads = match &mut grads.body {
            Some(b) => b,
            None => &mut grads.title,
        };
        let d_title = gru_backward_into(self.body_encoder(), &cache.body_trace, &d_fused, body_grads)?;
        gru_backward_into(&self.title, &cache.title_trace, &d_title, &mut grads.title)?;
        Ok(loss)
    }

    /// Loss and flat gradient at the current parameters, inference mode.
    pub fn loss_and_gradient(
        &self,
        encoded: &EncodedQuestion,
        user: &[f64],
        emb: &EmbeddingTable,
    ) -> Result<(f64, Vec<f64>), ModelError> {
        let cache = self.forward(encoded, user, emb, None)?;
        let mut grads = self.zeros_like();
        let loss = self.backward(&cache, &encoded.target, &mut grads)?;
        Ok((loss, grads.to_flat()))
    }
}

fn push_gru<'a>(out: &mut Vec<(String, (usize, usize), &'a [f64])>, prefix: &str, g: &'a GruParams) {
    for (name, m) in GruParams::MATRIX_NAMES.iter().zip(g.matrices()) {
        out.push((format!("{prefix}.{name}"), m.shape(), m.as_slice()));
    }
}
