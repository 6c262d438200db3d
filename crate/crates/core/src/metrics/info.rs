use super::MetricsError;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> Result<f64, MetricsError> {
    if let Some(&bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(MetricsError::BadProbability(bad));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(MetricsError::NotNormalized(sum));
    }
    Ok(-p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>())
}

/// Bits per selection of a stationary memoryless selector with `n` objects
/// and probability `p` of a correct selection.
pub fn bit_rate(n: usize, p: f64) -> Result<f64, MetricsError> {
    if n < 2 {
        return Err(MetricsError::TooFewObjects(n));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(MetricsError::BadProbability(p));
    }
    let xlog = |x: f64, arg: f64| if x > 0.0 { x * arg.log2() } else { 0.0 };
    let n_f = n as f64;
    Ok(n_f.log2() + xlog(p, p) + xlog(1.0 - p, (1.0 - p) / (n_f - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(entropy(&[0.5, 0.25, 0.25]).unwrap(), 1.5);
        assert_eq!(entropy(&[1.0]).unwrap(), 0.0);
        assert_eq!(entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(entropy(&[0.5, 0.4]), Err(MetricsError::NotNormalized(_))));
        assert!(matches!(entropy(&[1.5, -0.5]), Err(MetricsError::BadProbability(_))));
    }

    #[test]
    fn bit_rate_examples() {
        assert!((bit_rate(36, 1.0).unwrap() - 36f64.log2()).abs() < 1e-12);
        // Evaluated independently: log2 36 + 0.9 log2 0.9 + 0.1 log2(0.1/35).
        assert!((bit_rate(36, 0.9).unwrap() - 4.188001).abs() < 1e-6);
        assert_eq!(bit_rate(2, 0.5).unwrap(), 0.0);
        assert!(matches!(bit_rate(1, 1.0), Err(MetricsError::TooFewObjects(1))));
        assert!(bit_rate(4, 1.2).is_err());
    }

    proptest! {
        #[test]
        fn entropy_bounded_by_uniform(weights in proptest::collection::vec(0.0f64..10.0, 1..12)) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-6);
            let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let h = entropy(&p).unwrap();
            let bound = (p.len() as f64).log2();
            prop_assert!(h <= bound + 1e-9);
            let uniform = vec![1.0 / p.len() as f64; p.len()];
            prop_assert!((entropy(&uniform).unwrap() - bound).abs() < 1e-9);
        }

        #[test]
        fn bit_rate_monotone_above_chance(n in 2usize..64, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let lo = 1.0 / n as f64;
            let (x, y) = if a < b { (a, b) } else { (b, a) };
            let x = lo + (1.0 - lo) * x;
            let y = lo + (1.0 - lo) * y;
            prop_assert!(bit_rate(n, x).unwrap() <= bit_rate(n, y).unwrap() + 1e-12);
        }
    }
}
