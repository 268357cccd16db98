use super::AnnError;

/// Mean relative error in percent: `100/N Σ |t − y| / |t|`.
pub fn mre(targets: &[f64], predictions: &[f64]) -> Result<f64, AnnError> {
    if targets.len() != predictions.len() {
        return Err(AnnError::LengthMismatch(targets.len(), predictions.len()));
    }
    if targets.is_empty() {
        return Err(AnnError::Empty);
    }
    let mut sum = 0.0;
    for (i, (&t, &y)) in targets.iter().zip(predictions).enumerate() {
        if t == 0.0 {
            return Err(AnnError::ZeroTarget(i));
        }
        sum += (t - y).abs() / t.abs();
    }
    Ok(100.0 * sum / targets.len() as f64)
}

pub fn mse(targets: &[f64], predictions: &[f64]) -> Result<f64, AnnError> {
    if targets.len() != predictions.len() {
        return Err(AnnError::LengthMismatch(targets.len(), predictions.len()));
    }
    if targets.is_empty() {
        return Err(AnnError::Empty);
    }
    Ok(targets.iter().zip(predictions).map(|(t, y)| (t - y).powi(2)).sum::<f64>() / targets.len() as f64)
}
