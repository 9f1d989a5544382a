mod oracle;

use nbldpc_core::seed::frame_rng;
use nbldpc_core::{
    build_regular_2dc, decode, generate_priors, Algorithm, ChannelConfig, Decoder, DecoderConfig, Field,
    ParityCheckMatrix,
};

fn toy() -> (Field, ParityCheckMatrix) {
    let f = Field::with_order(4).unwrap();
    let h = build_regular_2dc(6, 3, &f, 7).unwrap();
    (f, h)
}

fn gf32() -> (Field, ParityCheckMatrix) {
    let f = Field::with_order(32).unwrap();
    let h = build_regular_2dc(192, 4, &f, 1).unwrap();
    (f, h)
}

#[test]
fn untruncated_matches_dense_reference() {
    let (f, h) = toy();
    let rate = h.rate().as_f64();
    for alg in [Algorithm::Ems, Algorithm::MinMax] {
        let cfg = DecoderConfig::new(alg, 4).with_max_iter(5);
        let dense = oracle::DenseDecoder { h: &h, field: &f, algorithm: alg, max_iter: 5 };
        let mut errors = 0;
        for i in 0..100 {
            let ch = ChannelConfig::new(-1.0 + (i % 5) as f64, rate).unwrap();
            let priors = generate_priors(&h, &ch, &cfg, &f, &mut frame_rng(3, i)).unwrap();
            let full: Vec<Vec<f64>> = priors.iter().map(|p| oracle::dense(p, 4)).collect();
            let got = decode(&h, &priors, &cfg, &f).unwrap();
            assert_eq!(got.decisions, dense.decode(&full), "{alg:?} frame {i}");
            errors += got.decisions.iter().any(|&d| d != 0) as usize;
        }
        // the comparison must exercise frames that are not trivially clean
        assert!(errors > 0, "{alg:?}: no noisy frame decoded wrongly");
    }
}

#[test]
fn noiseless_frames_decode_clean() {
    let (f, h) = gf32();
    let ch = ChannelConfig::new(20.0, 0.5).unwrap();
    for (alg, quant) in [(Algorithm::Ems, 0), (Algorithm::Ems, 5), (Algorithm::MinMax, 0)] {
        let cfg = DecoderConfig::new(alg, 8).with_quant_bits(quant);
        let dec = Decoder::new(&h, &f, cfg).unwrap();
        for i in 0..10 {
            let priors = generate_priors(&h, &ch, &cfg, &f, &mut frame_rng(1, i)).unwrap();
            let out = dec.decode(&priors).unwrap();
            assert!(out.decisions.iter().all(|&d| d == 0));
            assert!(out.converged);
        }
    }
}

#[test]
fn more_iterations_fix_frozen_frame() {
    // frame (42, 0) at 3.0 dB: found by search, kept as a regression fixture
    let (f, h) = gf32();
    let ch = ChannelConfig::new(3.0, 0.5).unwrap();
    let cfg = DecoderConfig::new(Algorithm::Ems, 8);
    let priors = generate_priors(&h, &ch, &cfg, &f, &mut frame_rng(42, 0)).unwrap();
    let one = decode(&h, &priors, &cfg.with_max_iter(1), &f).unwrap();
    let ten = decode(&h, &priors, &cfg.with_max_iter(10), &f).unwrap();
    assert!(one.decisions.iter().any(|&d| d != 0));
    assert!(ten.decisions.iter().all(|&d| d == 0));
}

#[test]
fn iteration_count_and_convergence_flag() {
    let (f, h) = gf32();
    let ch = ChannelConfig::new(2.0, 0.5).unwrap();
    let base = DecoderConfig::new(Algorithm::Ems, 8).with_max_iter(6);
    for i in 0..20 {
        let priors = generate_priors(&h, &ch, &base, &f, &mut frame_rng(5, i)).unwrap();
        let full = decode(&h, &priors, &base, &f).unwrap();
        assert_eq!(full.iterations, 6);
        assert_eq!(full.converged, h.is_codeword(&full.decisions, &f).unwrap());
        let early = decode(&h, &priors, &base.with_early_stop(true), &f).unwrap();
        assert!(early.iterations <= 6);
        if early.iterations < 6 {
            assert!(early.converged);
        }
        if early.converged {
            assert!(h.syndrome(&early.decisions, &f).unwrap().iter().all(|&s| s == 0));
        }
    }
}

#[test]
fn quantized_messages_stay_in_range() {
    let (f, h) = gf32();
    let ch = ChannelConfig::new(2.5, 0.5).unwrap();
    for alg in [Algorithm::Ems, Algorithm::MinMax] {
        let cfg = DecoderConfig::new(alg, 8).with_quant_bits(5).with_sorters(3, 2);
        let dec = Decoder::new(&h, &f, cfg).unwrap();
        for i in 0..5 {
            let priors = generate_priors(&h, &ch, &cfg, &f, &mut frame_rng(8, i)).unwrap();
            let (_, state) = dec.decode_with_state(&priors).unwrap();
            for m in state.vc_messages.iter().chain(&state.cv_messages) {
                m.validate().unwrap();
                assert!(m.len() <= 8);
                for e in m.entries() {
                    assert!(e.penalty <= 31.0 && e.penalty.fract() == 0.0, "{alg:?}: {}", e.penalty);
                }
            }
        }
    }
}

#[test]
fn sorter_lengths_do_not_change_decisions() {
    let (f, h) = gf32();
    let ch = ChannelConfig::new(2.5, 0.5).unwrap();
    let cfg = DecoderConfig::new(Algorithm::Ems, 8);
    for i in 0..5 {
        let priors = generate_priors(&h, &ch, &cfg, &f, &mut frame_rng(11, i)).unwrap();
        let want = decode(&h, &priors, &cfg, &f).unwrap();
        for (lv, lc) in [(1, 1), (3, 5), (8, 2)] {
            assert_eq!(decode(&h, &priors, &cfg.with_sorters(lv, lc), &f).unwrap(), want);
        }
    }
}

#[test]
fn decoding_is_deterministic() {
    let (f, h) = gf32();
    let ch = ChannelConfig::new(2.0, 0.5).unwrap();
    let cfg = DecoderConfig::new(Algorithm::MinMax, 8);
    let priors = generate_priors(&h, &ch, &cfg, &f, &mut frame_rng(77, 1)).unwrap();
    assert_eq!(decode(&h, &priors, &cfg, &f).unwrap(), decode(&h, &priors, &cfg, &f).unwrap());
}
