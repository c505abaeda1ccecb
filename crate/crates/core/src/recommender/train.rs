use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ModelError, ModelParams, UserEmbeddings};
use crate::corpus::{EmbeddingTable, EncodedQuestion, DEFAULT_MAX_LEN};
use crate::neural::{bce_with_logits, dropout_mask, Optimizer, OptimizerState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub dropout: f64,
    pub batch_size: usize,
    /// Upper bound on epochs; early stopping may end training sooner.
    pub epochs: usize,
    pub seed: u64,
    pub max_len: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            dropout: 0.5,
            batch_size: 32,
            epochs: 20,
            seed: 42,
            max_len: DEFAULT_MAX_LEN,
            patience: 3,
            optimizer: Optimizer::adam(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(ModelError::Config(format!(
                "learning rate {} must be non-negative",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.batch_size == 0 {
            return Err(ModelError::Config("batch size must be at least 1".into()));
        }
        if self.max_len == 0 {
            return Err(ModelError::Config("max_len must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss of each epoch (with dropout active).
    pub loss_history: Vec<f64>,
    /// Mean validation loss after each epoch, when a validation set is given.
    pub validation_history: Vec<f64>,
    pub epochs_run: usize,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

/// Mini-batch training on mean BCE for `config.epochs` epochs.
pub fn train(
    model: &mut ModelParams,
    data: &[EncodedQuestion],
    emb: &EmbeddingTable,
    users: &UserEmbeddings,
    config: &TrainConfig,
) -> Result<TrainReport, ModelError> {
    train_with_validation(model, data, &[], emb, users, config)
}

/// Mean inference-mode BCE over `data`.
pub fn validation_loss(
    model: &ModelParams,
    data: &[EncodedQuestion],
    emb: &EmbeddingTable,
    users: &UserEmbeddings,
) -> Result<f64, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let mut total = 0.0;
    for q in data {
        let cache = model.forward(q, &users.vector(&q.user_id), emb, None)?;
        total += bce_with_logits(&cache.logits, &q.target)?.0;
    }
    Ok(total / data.len() as f64)
}

/// Like [`train`], with early stopping on `validation` when it is non-empty:
/// training ends after `patience` epochs without a new best validation loss
/// and the best parameters are restored.
///
/// Examples are reshuffled every epoch and dropout masks drawn from a
/// separate stream, both seeded from `config.seed`. Gradients are summed in
/// example order and averaged per batch, so runs are bit-reproducible.
pub fn train_with_validation(
    model: &mut ModelParams,
    data: &[EncodedQuestion],
    validation: &[EncodedQuestion],
    emb: &EmbeddingTable,
    users: &UserEmbeddings,
    config: &TrainConfig,
) -> Result<TrainReport, ModelError> {
    config.validate()?;
    if data.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if users.dim() != model.user_dim {
        return Err(ModelError::UserDim {
            expected: model.user_dim,
            found: users.dim(),
        });
    }
    model.dropout = config.dropout;
    model.validate()?;

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mask_rng = ChaCha8Rng::seed_from_u64(config.seed);
    mask_rng.set_stream(1);
    let mut optimizer = OptimizerState::new(config.optimizer, config.lr);
    let fused_dim = model.config().fused_dim();

    let mut report = TrainReport::default();
    let mut best: Option<(f64, ModelParams)> = None;
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = model.zeros_like();
            for &i in batch {
                let q = &data[i];
                let mask = (config.dropout > 0.0)
                    .then(|| dropout_mask(fused_dim, config.dropout, &mut mask_rng))
                    .transpose()?;
                let cache = model.forward(q, &users.vector(&q.user_id), emb, mask)?;
                epoch_loss += model.backward(&cache, &q.target, &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            let grad_views: Vec<&[f64]> = grads.named_tensors().into_iter().map(|(_, _, v)| v).collect();
            optimizer.step(&mut model.tensors_mut(), &grad_views)?;
        }
        let mean = epoch_loss / data.len() as f64;
        report.loss_history.push(mean);
        report.epochs_run = epoch;
        report.best_epoch = epoch;
        log::info!("epoch {epoch}: train loss {mean:.6}");

        if validation.is_empty() {
            continue;
        }
        let val = validation_loss(model, validation, emb, users)?;
        report.validation_history.push(val);
        match &best {
            Some((best_val, _)) if val >= *best_val => since_best += 1,
            _ => {
                best = Some((val, model.clone()));
                since_best = 0;
            }
        }
        if since_best >= config.patience.max(1) {
            log::info!("early stop after epoch {epoch}");
            break;
        }
    }
    if let Some((_, params)) = best {
        let best_epoch = report
            .validation_history
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map_or(report.epochs_run, |(i, _)| i + 1);
        *model = params;
        report.best_epoch = best_epoch;
    }
    Ok(report)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::recommender::{AggregationMode, ModelConfig};
    use rand::Rng;

    /// Eight questions over six words and four tags; tag `i % 4` follows the
    /// first title word.
    pub(crate) fn toy() -> (Vec<EncodedQuestion>, EmbeddingTable, UserEmbeddings, ModelConfig) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut emb = EmbeddingTable::zeros(8, 4);
        for v in emb.values_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let data = (0..8)
            .map(|i| {
                let mut target = vec![0.0; 4];
                target[i % 4] = 1.0;
                EncodedQuestion {
                    id: format!("q{i}"),
                    tokens: vec![i % 4, 4 + i % 2, (i + 1) % 6, 6],
                    title_len: 2,
                    target,
                    user_id: format!("u{}", i % 3),
                    dropped_tags: 0,
                }
            })
            .collect();
        let users = UserEmbeddings::from_vectors(
            2,
            (0..3).map(|u| (format!("u{u}"), vec![u as f64 * 0.5, 1.0 - u as f64])),
        )
        .unwrap();
        let config = ModelConfig {
            input_dim: 4,
            hidden_dim: 5,
            user_dim: 2,
            num_tags: 4,
            mode: AggregationMode::Concatenation,
            share_encoder: false,
        };
        (data, emb, users, config)
    }

    fn quick() -> TrainConfig {
        TrainConfig {
            lr: 0.01,
            dropout: 0.2,
            batch_size: 3,
            epochs: 5,
            ..Default::default()
        }
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let (data, emb, users, cfg) = toy();
        let before = ModelParams::init(&cfg, 1);
        let mut model = before.clone();
        train(
            &mut model,
            &data,
            &emb,
            &users,
            &TrainConfig { lr: 0.0, ..quick() },
        )
        .unwrap();
        assert_eq!(model.to_flat(), before.to_flat());
    }

    #[test]
    fn first_epoch_at_zero_head_is_ln2() {
        let (data, emb, users, cfg) = toy();
        let mut model = ModelParams::init(&cfg, 1);
        model.dense = crate::neural::DenseParams::zeros(7, 4);
        let config = TrainConfig {
            batch_size: data.len(),
            epochs: 1,
            ..quick()
        };
        let report = train(&mut model, &data, &emb, &users, &config).unwrap();
        assert!((report.loss_history[0] - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn runs_are_reproducible() {
        let (data, emb, users, cfg) = toy();
        let run = || {
            let mut m = ModelParams::init(&cfg, 3);
            let r = train(&mut m, &data, &emb, &users, &quick()).unwrap();
            (m, r)
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn loss_goes_down() {
        let (data, emb, users, cfg) = toy();
        let mut m = ModelParams::init(&cfg, 3);
        let config = TrainConfig {
            dropout: 0.0,
            epochs: 60,
            lr: 0.02,
            ..quick()
        };
        let r = train(&mut m, &data, &emb, &users, &config).unwrap();
        assert!(
            r.loss_history.last().unwrap() < &(0.5 * r.loss_history[0]),
            "{:?}",
            r.loss_history
        );
        assert_eq!(r.epochs_run, 60);
        assert!(r.validation_history.is_empty());
    }

    #[test]
    fn early_stopping_keeps_best() {
        let (data, emb, users, cfg) = toy();
        let mut m = ModelParams::init(&cfg, 3);
        let config = TrainConfig {
            lr: 0.5,
            epochs: 40,
            patience: 2,
            ..quick()
        };
        let (train_set, val) = data.split_at(6);
        let r = train_with_validation(&mut m, train_set, val, &emb, &users, &config).unwrap();
        let best = r.validation_history.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(r.validation_history[r.best_epoch - 1], best);
        assert!(r.epochs_run - r.best_epoch <= 2);
        let now = validation_loss(&m, val, &emb, &users).unwrap();
        assert_eq!(now, best);
    }

    #[test]
    fn config_errors() {
        let (data, emb, users, cfg) = toy();
        let mut m = ModelParams::init(&cfg, 3);
        for bad in [
            TrainConfig { lr: -1.0, ..quick() },
            TrainConfig {
                dropout: 1.0,
                ..quick()
            },
            TrainConfig {
                batch_size: 0,
                ..quick()
            },
        ] {
            assert!(matches!(
                train(&mut m, &data, &emb, &users, &bad),
                Err(ModelError::Config(_))
            ));
        }
        assert!(matches!(
            train(&mut m, &[], &emb, &users, &quick()),
            Err(ModelError::EmptyDataset)
        ));
        let wrong = UserEmbeddings::empty(3);
        assert!(matches!(
            train(&mut m, &data, &emb, &wrong, &quick()),
            Err(ModelError::UserDim { .. })
        ));
    }
}
