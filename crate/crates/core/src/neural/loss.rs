use super::{check_len, sigmoid, NeuralError};

/// Probabilities are clamped to `[BCE_EPS, 1 - BCE_EPS]` inside the loss.
pub const BCE_EPS: f64 = 1e-7;

/// Mean binary cross-entropy over tags and its gradient with respect to the
/// (unclamped) probabilities. Where clamping is active the gradient is zero.
pub fn bce_loss(probs: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>), NeuralError> {
    check_len("BCE target", probs.len(), target.len())?;
    let n = probs.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(probs.len());
    for (&p, &t) in probs.iter().zip(target) {
        let pc = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        loss -= t * pc.ln() + (1.0 - t) * (1.0 - pc).ln();
        let inside = p > BCE_EPS && p < 1.0 - BCE_EPS;
        grad.push(if inside {
            (-t / pc + (1.0 - t) / (1.0 - pc)) / n
        } else {
            0.0
        });
    }
    Ok((loss / n, grad))
}

/// Mean BCE of `sigmoid(logits)` with the gradient taken directly with
/// respect to the logits, `(σ(l) - t) / n`, zero where clamping is active.
pub fn bce_with_logits(logits: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>), NeuralError> {
    check_len("BCE target", logits.len(), target.len())?;
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&l, &t) in logits.iter().zip(target) {
        let p = sigmoid(l);
        let pc = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        loss -= t * pc.ln() + (1.0 - t) * (1.0 - pc).ln();
        let inside = p > BCE_EPS && p < 1.0 - BCE_EPS;
        grad.push(if inside { (p - t) / n } else { 0.0 });
    }
    Ok((loss / n, grad))
}
