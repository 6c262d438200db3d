use serde::Serialize;

use super::MetricsError;

fn positive(value: f64, name: &'static str) -> Result<f64, MetricsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(MetricsError::NonPositive(name))
    }
}

/// Intensifications per selection and repetition: `I / (S * R)`.
pub fn isr(total_intensifications: u64, selections: u64, nrs: u32) -> Result<f64, MetricsError> {
    if total_intensifications == 0 {
        return Err(MetricsError::NonPositive("intensifications"));
    }
    if selections == 0 {
        return Err(MetricsError::NonPositive("selections"));
    }
    if nrs == 0 {
        return Err(MetricsError::NonPositive("nrs"));
    }
    Ok(total_intensifications as f64 / (selections as f64 * f64::from(nrs)))
}

/// Output characters per minute.
pub fn ocm(characters: u64, seconds: f64) -> Result<f64, MetricsError> {
    Ok(characters as f64 * 60.0 / positive(seconds, "seconds")?)
}

/// Selections per minute.
pub fn sm(selections: u64, seconds: f64) -> Result<f64, MetricsError> {
    Ok(selections as f64 * 60.0 / positive(seconds, "seconds")?)
}

/// Accuracy: correct selections over all selections.
pub fn ac(correct: u64, total: u64) -> Result<f64, MetricsError> {
    Ok(correct as f64 / positive(total as f64, "total selections")?)
}

/// Errors per character of the spelled sentence.
pub fn ec(errors: u64, sentence_length: u64) -> Result<f64, MetricsError> {
    Ok(errors as f64 / positive(sentence_length as f64, "sentence length")?)
}

/// Aggregated throughput and accuracy of a session or experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub isr: f64,
    pub ocm: f64,
    pub sm: f64,
    pub ac: Option<f64>,
    pub ec: Option<f64>,
    pub total_time_s: f64,
    pub total_intensifications: u64,
    pub selections: u64,
    pub characters: u64,
    pub errors: u64,
}

impl MetricsReport {
    /// Builds a report from raw totals. AC and EC are only reported when
    /// the error count is known.
    pub fn from_totals(
        characters: u64,
        selections: u64,
        total_intensifications: u64,
        total_time_s: f64,
        nrs: u32,
        errors: Option<u64>,
    ) -> Result<Self, MetricsError> {
        if selections == 0 {
            return Err(MetricsError::EmptyLog);
        }
        let (ac_value, ec_value) = match errors {
            Some(e) => (
                Some(ac(selections.saturating_sub(e), selections)?),
                if characters > 0 { Some(ec(e, characters)?) } else { None },
            ),
            None => (None, None),
        };
        Ok(Self {
            isr: isr(total_intensifications, selections, nrs)?,
            ocm: ocm(characters, total_time_s)?,
            sm: sm(selections, total_time_s)?,
            ac: ac_value,
            ec: ec_value,
            total_time_s,
            total_intensifications,
            selections,
            characters,
            errors: errors.unwrap_or(0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(isr(144, 1, 12).unwrap(), 12.0);
        assert_eq!(isr(156, 1, 12).unwrap(), 13.0);
        assert!(isr(0, 1, 12).is_err());
        assert!(isr(10, 0, 12).is_err());
        assert!((ocm(23, 966.1).unwrap() - 1.428423).abs() < 1e-6);
        assert!((ac(272, 311).unwrap() - 0.874598).abs() < 1e-6);
        assert!((ec(41, 230).unwrap() - 0.178261).abs() < 1e-6);
        assert_eq!(ac(7, 7).unwrap(), 1.0);
        assert!((ec(2, 23).unwrap() - 2.0 / 23.0).abs() < 1e-15);
        assert!(sm(3, 0.0).is_err());
        assert!(ac(0, 0).is_err());
    }

    #[test]
    fn report_invariants() {
        let r = MetricsReport::from_totals(23, 23, 23 * 144, 23.0 * 41.875, 12, Some(0)).unwrap();
        assert_eq!(r.isr, 12.0);
        assert!((r.sm - 60.0 / 41.875).abs() < 1e-12);
        assert_eq!(r.ac, Some(1.0));
        assert_eq!(r.ec, Some(0.0));
        assert!(matches!(MetricsReport::from_totals(0, 0, 0, 0.0, 12, None), Err(MetricsError::EmptyLog)));
    }
}
