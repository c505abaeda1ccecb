use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AggregationMode, ModelConfig, ModelError, ModelParams};
use crate::corpus::{EmbeddingTable, EncodedQuestion};
use crate::neural::{grad_check, GradCheckReport};

/// Shape of a random gradient-check problem.
///
/// The default step of `2e-4` keeps float64 round-off in the loss below the
/// tolerance on coordinates whose true gradient is near zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckSetup {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub seq_len: usize,
    pub num_tags: usize,
    pub user_dim: usize,
    pub mode: AggregationMode,
    pub share_encoder: bool,
    pub seed: u64,
    pub eps: f64,
}

impl Default for GradCheckSetup {
    fn default() -> Self {
        Self {
            input_dim: 5,
            hidden_dim: 7,
            seq_len: 4,
            num_tags: 11,
            user_dim: 3,
            mode: AggregationMode::Addition,
            share_encoder: false,
            seed: 42,
            eps: 2e-4,
        }
    }
}

impl ModelParams {
    /// Compares [`loss_and_gradient`](Self::loss_and_gradient) against
    /// central differences over every parameter.
    pub fn grad_check(
        &self,
        encoded: &EncodedQuestion,
        user: &[f64],
        emb: &EmbeddingTable,
        eps: f64,
    ) -> Result<GradCheckReport, ModelError> {
        let (_, analytic) = self.loss_and_gradient(encoded, user, emb)?;
        let mut probe = self.clone();
        let mut failure = None;
        let report = grad_check(
            |theta| {
                let run = probe
                    .set_flat(theta)
                    .and_then(|()| probe.loss_and_gradient(encoded, user, emb));
                match run {
                    Ok((loss, _)) => loss,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &analytic,
            &self.to_flat(),
            eps,
        );
        match failure {
            Some(e) => Err(e),
            None => Ok(report),
        }
    }
}

/// Builds a random model, question, user vector and embedding table from
/// `setup` and gradient-checks the full model on them.
///
/// The sequence is split evenly between title and body (the title gets the
/// extra token when the length is odd); targets set roughly a third of the
/// tags, and always at least one.
pub fn random_grad_check(setup: &GradCheckSetup) -> Result<GradCheckReport, ModelError> {
    if setup.seq_len == 0 || setup.num_tags == 0 || setup.input_dim == 0 || setup.hidden_dim == 0 {
        return Err(ModelError::Config(
            "gradient check dimensions must be at least 1".into(),
        ));
    }
    let config = ModelConfig {
        input_dim: setup.input_dim,
        hidden_dim: setup.hidden_dim,
        user_dim: setup.user_dim,
        num_tags: setup.num_tags,
        mode: setup.mode,
        share_encoder: setup.share_encoder,
    };
    let model = ModelParams::init(&config, setup.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    rng.set_stream(7);

    let rows = setup.seq_len + 2;
    let mut emb = EmbeddingTable::zeros(rows, setup.input_dim);
    for v in emb.values_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let mut target: Vec<f64> = (0..setup.num_tags)
        .map(|_| if rng.gen_bool(1.0 / 3.0) { 1.0 } else { 0.0 })
        .collect();
    if !target.contains(&1.0) {
        target[0] = 1.0;
    }
    let question = EncodedQuestion {
        id: "gradcheck".into(),
        tokens: (0..setup.seq_len).map(|_| rng.gen_range(0..rows)).collect(),
        title_len: setup.seq_len.div_ceil(2),
        target,
        user_id: "gradcheck".into(),
        dropped_tags: 0,
    };
    let user: Vec<f64> = (0..setup.user_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    model.grad_check(&question, &user, &emb, setup.eps)
}
