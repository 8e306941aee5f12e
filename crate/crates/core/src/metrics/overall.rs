use super::MetricError;

/// Allowed gap between a stored overall score and one recomputed from its
/// components: 0.02 points on the 0-100 scale, i.e. two-decimal rounding slack.
pub const OVERALL_TOLERANCE: f64 = 0.0002;

/// Harmonic mean of entity accuracy and quality, both in `[0, 1]`.
/// Defined as 0 when both are 0.
pub fn overall(m_eta: f64, quality: f64) -> Result<f64, MetricError> {
    for (name, value) in [("m_eta", m_eta), ("quality", quality)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(MetricError::Domain { name, value });
        }
    }
    let sum = m_eta + quality;
    if sum == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * m_eta * quality / sum)
}
