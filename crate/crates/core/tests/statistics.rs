use despeckle_core::*;

fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn speckle_moments_match_the_gamma_law() {
    for (looks, mu) in [(1u32, 1.0), (10, 1.0), (4, 2.0)] {
        let model = NoiseModel::new(looks, mu).unwrap();
        let sample = sample_speckle(&model, 200, 500, 42);
        let (mean, var) = moments(sample.as_slice());
        let n = sample.len() as f64;
        let sd = model.std_dev();
        assert!(
            (mean - mu).abs() < 4.0 * sd / n.sqrt(),
            "K={looks}: mean {mean}"
        );
        // standard error of the sample variance uses the fourth central moment 3(K+2)/K sigma^4
        let k = looks as f64;
        let m4 = 3.0 * (k + 2.0) / k * sd.powi(4);
        let var_se = ((m4 - sd.powi(4)) / n).sqrt();
        assert!((var - sd * sd).abs() < 4.0 * var_se, "K={looks}: var {var}");
    }
}

#[test]
fn log_speckle_moments_match_polygamma() {
    for (looks, mu) in [(1u32, 1.0), (3, 1.0), (10, 2.5)] {
        let model = NoiseModel::new(looks, mu).unwrap();
        let logs: Vec<f64> = sample_speckle(&model, 300, 300, 7)
            .as_slice()
            .iter()
            .map(|v| v.ln())
            .collect();
        let (mean, var) = moments(&logs);
        let stats = log_noise_stats(&model);
        let se = (stats.variance / logs.len() as f64).sqrt();
        assert!(
            (mean - stats.mean).abs() < 4.0 * se,
            "K={looks}: {mean} vs {}",
            stats.mean
        );
        assert!(
            (var - stats.variance).abs() < 0.02 * stats.variance,
            "K={looks}: {var} vs {}",
            stats.variance
        );
    }
}

#[test]
fn polygamma_recurrences() {
    for z in 1..=100 {
        let z = z as f64;
        assert!((digamma(z + 1.0).unwrap() - digamma(z).unwrap() - 1.0 / z).abs() <= 1e-12);
        assert!((trigamma(z).unwrap() - trigamma(z + 1.0).unwrap() - 1.0 / (z * z)).abs() <= 1e-12);
    }
}
