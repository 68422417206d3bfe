use cyclocorr::siggen::awgn;
use cyclocorr::{CyclicCorrelator, EstimatorConfig, Sample};
use proptest::prelude::*;

fn split_push(cfg: &EstimatorConfig, x: &[Sample], y: &[Sample], cuts: &[usize]) -> Vec<cyclocorr::CyclicFrame> {
    let mut est = CyclicCorrelator::new(cfg.clone()).unwrap();
    let mut out = Vec::new();
    let mut at = 0;
    for &c in cuts {
        let end = (at + c).min(x.len());
        out.extend(est.push(&x[at..end], &y[at..end]).unwrap());
        at = end;
    }
    out.extend(est.push(&x[at..], &y[at..]).unwrap());
    assert_eq!(est.consumed(), x.len() as u64);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn any_partition_gives_the_same_frames(
        full in any::<bool>(),
        conj in any::<bool>(),
        win_len in 8usize..48,
        len in 0usize..600,
        cuts in prop::collection::vec(0usize..90, 0..20),
        seed in any::<u64>(),
    ) {
        let m = (win_len - 1) / 2;
        let cfg = if full {
            EstimatorConfig::full(win_len, vec![-(m as i64), 0, 1], conj)
        } else {
            EstimatorConfig::set_from_values(win_len, m, &[0.0, 0.2, -0.45], conj).unwrap()
        };
        let x = awgn(len, 1.0, seed).unwrap();
        let y = awgn(len, 1.0, seed ^ 1).unwrap();
        let whole = split_push(&cfg, &x, &y, &[]);
        let parts = split_push(&cfg, &x, &y, &cuts);
        prop_assert_eq!(whole.len() as u64, CyclicCorrelator::new(cfg.clone()).unwrap().frames_for(len as u64));
        prop_assert_eq!(whole.len(), parts.len());
        for (a, b) in whole.iter().zip(&parts) {
            prop_assert_eq!(a.start_abs, b.start_abs);
            prop_assert_eq!(a.start_abs, cfg.first_window_start() as u64 + a.frame_index * win_len as u64);
            for (u, v) in a.values.iter().zip(&b.values) {
                prop_assert!((u - v).norm() <= 1e-12);
            }
        }
    }
}
