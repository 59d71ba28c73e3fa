use hgan_core::baseline::{next_sample_offset, run_baseline_episode, t_star, BaselineConfig};
use hgan_core::process::{sample_episode, OuParams, ParamRanges};
use hgan_core::rng::{stream, Domain};
use proptest::prelude::*;

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    for (rank, &i) in idx.iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn gaps_grow_with_distance_from_threshold() {
    let ranges = ParamRanges::default();
    let mut mean_abs = Vec::new();
    let mut mean_gap = Vec::new();
    for e in 0..1000 {
        let mut rng = stream(99, Domain::Scratch, e);
        let (params, series) = sample_episode(&ranges, 1000, &mut rng).unwrap();
        let cfg = BaselineConfig::new(0.1, params, 0.0).unwrap();
        let trace = run_baseline_episode(&series, &cfg);
        mean_abs.push(series.values().iter().map(|v| v.abs()).sum::<f64>() / series.len() as f64);
        let gaps = trace.times.windows(2).map(|w| (w[1] - w[0]) as f64);
        mean_gap.push(gaps.sum::<f64>() / (trace.len() - 1) as f64);
    }
    // σ also scales the slope, so the link is diluted; under independence
    // the rank correlation has standard error ≈ 1/sqrt(n) ≈ 0.032.
    let rho = spearman(&mean_abs, &mean_gap);
    assert!(rho > 0.2, "rank correlation {rho}");
}

proptest! {
    #[test]
    fn offset_is_increasing_in_distance_and_at_least_t_star(
        theta in 0.001f64..1.0,
        sigma in 0.05f64..3.0,
        c_s in 0.01f64..2.0,
        gamma in -2.0f64..2.0,
        d1 in 0.0f64..20.0,
        dd in 1e-6f64..5.0,
        above in any::<bool>(),
    ) {
        let cfg = BaselineConfig::new(c_s, OuParams::centered(theta, sigma).unwrap(), gamma).unwrap();
        let ts = t_star(c_s, sigma).unwrap();
        let sign = if above { 1.0 } else { -1.0 };
        let near = next_sample_offset(gamma + sign * d1, &cfg);
        let far = next_sample_offset(gamma - sign * (d1 + dd), &cfg);
        prop_assert!(near.is_finite() && near >= ts);
        prop_assert!(far > near);
        prop_assert_eq!(next_sample_offset(gamma, &cfg), ts);
    }
}
