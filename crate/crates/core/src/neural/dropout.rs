use rand::Rng;

use super::NeuralError;

/// Inverted-dropout mask: each entry is `0` with probability `rate`, else
/// `1 / (1 - rate)`. A zero rate consumes no randomness.
pub fn dropout_mask<R: Rng>(len: usize, rate: f64, rng: &mut R) -> Result<Vec<f64>, NeuralError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NeuralError::DropoutRate(rate));
    }
    if rate == 0.0 {
        return Ok(vec![1.0; len]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..len)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect())
}

/// Applies inverted dropout in training mode; identity at inference.
pub fn dropout<R: Rng>(v: &[f64], rate: f64, rng: &mut R, training: bool) -> Result<Vec<f64>, NeuralError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NeuralError::DropoutRate(rate));
    }
    if !training {
        return Ok(v.to_vec());
    }
    let mask = dropout_mask(v.len(), rate, rng)?;
    Ok(v.iter().zip(mask).map(|(x, m)| x * m).collect())
}
