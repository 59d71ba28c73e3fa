//! `find_crossings` and `score_trace` against a step-by-step brute-force
//! scorer that shares no code with the library.

use hgan_core::metrics::{aggregate, find_crossings, score_trace, EpisodeMetrics};
use proptest::prelude::*;

struct Brute {
    crossings: Vec<usize>,
    delays: Vec<usize>,
    missed: usize,
    cost: f64,
}

fn brute(x: &[f64], sampled: &[bool], gamma: f64) -> Brute {
    // Side per index with exact touches inheriting the last strict side.
    let mut sides: Vec<Option<i32>> = Vec::new();
    for &v in x {
        let s = if v > gamma {
            Some(1)
        } else if v < gamma {
            Some(-1)
        } else {
            sides.last().copied().flatten()
        };
        sides.push(s);
    }
    let crossings: Vec<usize> = (1..x.len())
        .filter(|&t| matches!((sides[t - 1], sides[t]), (Some(a), Some(b)) if a != b))
        .collect();
    let mut out = Brute {
        crossings: crossings.clone(),
        delays: vec![],
        missed: 0,
        cost: 0.0,
    };
    for (k, &c) in crossings.iter().enumerate() {
        let end = if k + 1 < crossings.len() {
            crossings[k + 1]
        } else {
            x.len()
        };
        let mut t = c;
        let mut detected = false;
        while t < end {
            if sampled[t] {
                detected = true;
                break;
            }
            out.cost += (x[t] - gamma).abs();
            t += 1;
        }
        if detected {
            out.delays.push(t - c);
        } else {
            out.missed += 1;
        }
    }
    out
}

/// Small xorshift so the oracle does not lean on the crate's RNG plumbing.
struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[test]
fn agrees_with_brute_force_on_random_walks() {
    let mut r = XorShift(0x9e37_79b9_7f4a_7c15);
    for _ in 0..2_000 {
        let len = 2 + (r.next() % 200) as usize;
        let mut x = Vec::with_capacity(len);
        let mut v = r.unit() * 2.0 - 1.0;
        for _ in 0..len {
            v = 0.97 * v + (r.unit() - 0.5);
            // occasional exact touches
            x.push(if r.next() % 50 == 0 { 0.0 } else { v });
        }
        let sampled: Vec<bool> = (0..len).map(|_| r.next() % 4 == 0).collect();
        let times: Vec<usize> = (0..len).filter(|&t| sampled[t]).collect();

        let want = brute(&x, &sampled, 0.0);
        let got = score_trace(&x, &times, 0.0).unwrap();
        let crossings: Vec<usize> = find_crossings(&x, 0.0).iter().map(|c| c.t_true).collect();
        assert_eq!(crossings, want.crossings);
        assert_eq!(got.n_crossings, want.crossings.len());
        assert_eq!(got.delays, want.delays);
        assert_eq!(got.n_missed, want.missed);
        assert!((got.error_cost - want.cost).abs() < 1e-9);
        assert_eq!(got.sampling_ratio, times.len() as f64 / len as f64);
    }
}

#[test]
fn aggregate_matches_concatenated_records() {
    let mut r = XorShift(42);
    let episodes: Vec<EpisodeMetrics> = (0..50)
        .map(|_| {
            let n = (r.next() % 6) as usize;
            let missed = (r.next() % (n as u64 + 1)) as usize;
            EpisodeMetrics {
                delays: (0..n - missed).map(|_| (r.next() % 9) as usize).collect(),
                n_crossings: n,
                n_missed: missed,
                error_cost: r.unit() * 10.0,
                samples: 10,
                length: 100,
                sampling_ratio: 0.1,
            }
        })
        .collect();
    let s = aggregate(&episodes).unwrap();
    let all_delays: Vec<usize> = episodes.iter().flat_map(|e| e.delays.clone()).collect();
    let total: usize = episodes.iter().map(|e| e.n_crossings).sum();
    let missed: usize = episodes.iter().map(|e| e.n_missed).sum();
    assert_eq!(s.n_crossings, total);
    assert_eq!(s.miss_rate, Some(missed as f64 / total as f64));
    assert_eq!(
        s.mean_delay,
        Some(all_delays.iter().sum::<usize>() as f64 / all_delays.len() as f64)
    );
    let cost: f64 = episodes.iter().map(|e| e.error_cost).sum::<f64>() / 50.0;
    assert!((s.mean_cost - cost).abs() < 1e-12);
}

fn series_and_times() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    prop::collection::vec(-2.0f64..2.0, 2..120).prop_flat_map(|x| {
        let n = x.len();
        (Just(x), prop::collection::btree_set(0..n, 0..n))
            .prop_map(|(x, s)| (x, s.into_iter().collect()))
    })
}

proptest! {
    #[test]
    fn delays_stay_inside_their_window((x, times) in series_and_times()) {
        let m = score_trace(&x, &times, 0.0).unwrap();
        let c: Vec<usize> = find_crossings(&x, 0.0).iter().map(|c| c.t_true).collect();
        prop_assert!(m.n_missed <= m.n_crossings);
        prop_assert_eq!(m.delays.len() + m.n_missed, m.n_crossings);
        prop_assert!(m.error_cost >= 0.0);
        prop_assert!((0.0..=1.0).contains(&m.sampling_ratio));
        // Detected crossings, in order, must fit before the next crossing.
        let mut d = m.delays.iter();
        for (k, &t) in c.iter().enumerate() {
            let end = c.get(k + 1).copied().unwrap_or(x.len());
            if let Some(first) = times.iter().find(|&&s| s >= t) {
                if *first < end {
                    prop_assert!(*d.next().unwrap() < end - t);
                }
            }
        }
    }

    #[test]
    fn cost_is_zero_iff_every_crossing_is_caught_immediately((x, times) in series_and_times()) {
        let m = score_trace(&x, &times, 0.0).unwrap();
        let perfect = m.n_missed == 0 && m.delays.iter().all(|&d| d == 0);
        prop_assert_eq!(m.error_cost == 0.0, perfect);
    }

    #[test]
    fn appending_late_samples_changes_nothing((x, times) in series_and_times(), extra in 0usize..20) {
        let a = score_trace(&x, &times, 0.0).unwrap();
        let mut more = times.clone();
        more.extend((0..extra).map(|k| x.len() + k));
        prop_assert_eq!(a, score_trace(&x, &more, 0.0).unwrap());
    }

    #[test]
    fn negation_preserves_crossings(x in prop::collection::vec(-2.0f64..2.0, 2..100)) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(find_crossings(&x, 0.0), find_crossings(&neg, 0.0));
    }
}
