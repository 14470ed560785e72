use super::{Result, TabularError};

/// Fraction of positions where `predicted` and `actual` agree exactly.
pub fn accuracy<A: AsRef<str>, B: AsRef<str>>(predicted: &[A], actual: &[B]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(TabularError::LengthMismatch { left: predicted.len(), right: actual.len() });
    }
    if predicted.is_empty() {
        return Err(TabularError::Empty);
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p.as_ref() == a.as_ref()).count();
    Ok(hits as f64 / predicted.len() as f64)
}
