mod common;

use iht_core::signals::io::{read_binary, read_csv, read_path, write_binary, write_csv, write_path};
use iht_core::signals::{
    best_s_error, compressible_tail_bounds, epsilon_tilde, gen_compressible, hard_threshold,
    support, CompressibleSpec, Norm,
};
use iht_core::SignalVector;
use proptest::prelude::*;

fn signal(values: Vec<f64>) -> SignalVector {
    SignalVector::new(values).unwrap()
}

/// Smallest `‖v − w‖₂` over vectors `w` supported on at most `s` entries,
/// by trying every support of exactly `s` entries.
fn exhaustive_best_error(v: &[f64], s: usize) -> f64 {
    common::subsets(v.len(), s)
        .iter()
        .map(|keep| {
            v.iter()
                .enumerate()
                .filter(|(i, _)| !keep.contains(i))
                .map(|(_, x)| x * x)
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn compressible_magnitudes_follow_the_power_law() {
    for (p, r) in [(0.5, 1.0), (0.8, 2.5), (1.0, 0.3), (0.2, 1.0)] {
        let spec = CompressibleSpec { n: 40, p, r_const: r, seed: 12 };
        let y = gen_compressible(&spec).unwrap();
        let mut mags: Vec<f64> = y.as_slice().iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (i, m) in mags.iter().enumerate() {
            let expected = r * ((i + 1) as f64).powf(-1.0 / p);
            assert!((m - expected).abs() <= 1e-12 * expected.max(1.0));
        }
        assert_eq!(y, gen_compressible(&spec).unwrap());
        for s in [1, 5, 39, 40] {
            let tails = compressible_tail_bounds(&spec, s).unwrap();
            assert!((best_s_error(&y, s, Norm::L2).unwrap() - tails.l2).abs() <= 1e-12);
            assert!((best_s_error(&y, s, Norm::L1).unwrap() - tails.l1).abs() <= 1e-12);
        }
    }
}

#[test]
fn faster_decay_concentrates_energy() {
    let rel = |p: f64| {
        let y = gen_compressible(&CompressibleSpec { n: 64, p, r_const: 1.0, seed: 5 }).unwrap();
        best_s_error(&y, 1, Norm::L2).unwrap() / y.norm_l2()
    };
    assert!(rel(0.2) < rel(1.0));
}

#[test]
fn tail_sum_example() {
    let spec = CompressibleSpec { n: 4, p: 1.0, r_const: 1.0, seed: 0 };
    let t = compressible_tail_bounds(&spec, 2).unwrap();
    assert!((t.l1 - 7.0 / 12.0).abs() < 1e-15);
    let t = compressible_tail_bounds(&spec, 4).unwrap();
    assert_eq!((t.l1, t.l2), (0.0, 0.0));
}

#[test]
fn csv_and_binary_round_trip() {
    let values = vec![0.0, -1.5, 3.25e-12, f64::MAX, 1.0 / 3.0];
    let mut buf = Vec::new();
    write_csv(&mut buf, &values).unwrap();
    assert_eq!(read_csv(buf.as_slice()).unwrap(), values);

    let mut bin = Vec::new();
    write_binary(&mut bin, &values).unwrap();
    assert_eq!(bin.len(), 8 + 8 * values.len());
    assert_eq!(u64::from_le_bytes(bin[..8].try_into().unwrap()), values.len() as u64);
    assert_eq!(f64::from_le_bytes(bin[16..24].try_into().unwrap()), -1.5);
    assert_eq!(read_binary(bin.as_slice()).unwrap(), values);

    let dir = tempfile::tempdir().unwrap();
    for name in ["y.csv", "y.bin"] {
        let path = dir.path().join(name);
        write_path(&path, &values).unwrap();
        assert_eq!(read_path(&path).unwrap(), values);
    }
    assert!(read_binary(&bin[..bin.len() - 3]).is_err());
}

proptest! {
    #[test]
    fn thresholding_is_idempotent_and_sparse(v in proptest::collection::vec(-5.0f64..5.0, 1..40), s in 0usize..40) {
        let s = s.min(v.len());
        let y = signal(v);
        let once = hard_threshold(&y, s).unwrap();
        let twice = hard_threshold(&once, s).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(support(&once).len() <= s);
        for (a, b) in once.as_slice().iter().zip(y.as_slice()) {
            prop_assert!(*a == 0.0 || a == b);
        }
    }

    #[test]
    fn thresholding_is_optimal(v in proptest::collection::vec(-3i32..4, 1..10), s in 0usize..10) {
        // small integers force plenty of ties
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let s = s.min(v.len());
        let err = best_s_error(&signal(v.clone()), s, Norm::L2).unwrap();
        prop_assert!((err - exhaustive_best_error(&v, s)).abs() <= 1e-12);
    }

    #[test]
    fn epsilon_tilde_is_non_increasing(v in proptest::collection::vec(-5.0f64..5.0, 2..30), e in 0.0f64..3.0) {
        let y = signal(v);
        let values: Vec<f64> = (1..=y.len()).map(|s| epsilon_tilde(&y, s, e).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!((values[y.len() - 1] - e).abs() <= 1e-12);
    }
}
