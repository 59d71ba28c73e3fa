use hgan_core::gan::GanLevel;
use hgan_core::hierarchy::{train_hierarchy, TrainConfig};
use hgan_core::nn::{Adam, Params};
use hgan_core::process::{sample_episode, ParamRanges};
use hgan_core::rng::{stream, Domain};

#[test]
fn discriminator_step_moves_probabilities_the_right_way() {
    let mut good = 0;
    for seed in 0..100 {
        let mut rng = stream(seed, Domain::Scratch, 7);
        let mut level = GanLevel::new(1, &mut rng).unwrap();
        level.set_learning_rate(1e-4);
        let s = [0.8];
        let x_real = 0.75;
        let pred = level.predict(&s).unwrap();
        let (r0, f0) = (
            level.discriminator().probability(x_real),
            level.discriminator().probability(pred),
        );
        level.train_step(&s, x_real).unwrap();
        let (r1, f1) = (
            level.discriminator().probability(x_real),
            level.discriminator().probability(pred),
        );
        if r1 >= r0 && f1 <= f0 {
            good += 1;
        }
    }
    assert!(
        good > 50,
        "only {good}/100 steps moved in the descent direction"
    );
}

#[test]
fn each_update_touches_only_its_own_network() {
    let mut rng = stream(3, Domain::Scratch, 8);
    let mut level = GanLevel::new(2, &mut rng).unwrap();
    let (s, x) = ([0.5, 0.45], 0.41);

    // Replay the step by hand with the public building blocks.
    let mut disc = level.discriminator().clone();
    let mut gen = level.generator().clone();
    let (pred, gen_tape) = gen.forward(&s).unwrap();
    let (pr, tr) = disc.forward(x);
    let (pf, tf) = disc.forward(pred);
    let mut g = disc.backward(tr, -1.0 / pr).unwrap().params;
    for (a, b) in g
        .iter_mut()
        .zip(disc.backward(tf, 1.0 / (1.0 - pf)).unwrap().params)
    {
        *a += b;
    }
    Adam::new(disc.num_params(), 1e-3)
        .step(&mut disc, &g)
        .unwrap();
    let (pf2, tf2) = disc.forward(pred);
    let d_pred = disc.backward(tf2, -1.0 / (1.0 - pf2)).unwrap().input + 2.0 * (pred - x);
    let gg = gen.backward(gen_tape, d_pred).unwrap();
    Adam::new(gen.num_params(), 1e-3)
        .step(&mut gen, &gg.params)
        .unwrap();

    level.train_step(&s, x).unwrap();
    assert_eq!(level.discriminator().to_flat(), disc.to_flat());
    assert_eq!(level.generator().to_flat(), gen.to_flat());
}

#[test]
fn trained_first_level_contracts_toward_the_mean() {
    let cfg = TrainConfig::new(1, 600, 21);
    let (h, _) = train_hierarchy(&cfg).unwrap();
    let level = h.level(1).unwrap();
    // The adversarial term pulls the spread of predictions toward the real
    // marginal, so contraction only shows once training has settled.

    // 10^4 held-out (x(t), θ) draws: compare x̂(t+1) with e^(−θ)·x(t).
    let ranges = ParamRanges::default();
    let (mut abs_in, mut abs_out, mut dev) = (0.0, 0.0, 0.0);
    let mut n = 0;
    let mut episode = 0;
    while n < 10_000 {
        let mut rng = stream(21, Domain::Scratch, 1000 + episode);
        episode += 1;
        let (params, series) = sample_episode(&ranges, 1000, &mut rng).unwrap();
        for t in (0..series.len()).step_by(10) {
            let x = series[t];
            let pred = level.predict(&[x]).unwrap();
            abs_in += x.abs();
            abs_out += pred.abs();
            dev += (pred - (-params.theta()).exp() * x).abs();
            n += 1;
        }
    }
    assert!(abs_out < abs_in, "no contraction: {abs_out} vs {abs_in}");
    let dev = dev / n as f64;
    assert!(dev < 0.2, "mean deviation from conditional mean {dev}");
}
