//! Frequency tests for the k-wise family and the phase states.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use unclone_core::primitives::KwiseFunction;
use unclone_core::prs::{prs_setup, prs_state};
use unclone_core::rng::lab_rng;

fn chi_square_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn pairs_of_outputs_are_uniform() {
    // Joint distribution of the top two output bits at two points.
    let mut rng = lab_rng(31);
    let (x, y) = (17u64, 200u64);
    let mut counts = [0u64; 16];
    for _ in 0..20_000 {
        let f = KwiseFunction::random(2, 8, 2, &mut rng).unwrap();
        counts[(f.eval(x).unwrap() * 4 + f.eval(y).unwrap()) as usize] += 1;
    }
    let p = chi_square_p(&counts);
    assert!(p > 0.001, "p = {p}, counts {counts:?}");
}

#[test]
fn low_nibble_pairs_are_uniform() {
    let mut rng = lab_rng(32);
    let mut counts = vec![0u64; 256];
    for _ in 0..25_600 {
        let f = KwiseFunction::random(2, 8, 8, &mut rng).unwrap();
        counts[((f.eval(3).unwrap() & 0xf) << 4 | (f.eval(250).unwrap() & 0xf)) as usize] += 1;
    }
    let p = chi_square_p(&counts);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn phase_state_measures_uniformly() {
    let state = prs_state(&prs_setup(4, &mut lab_rng(33)).unwrap()).unwrap();
    let mut rng = lab_rng(34);
    let mut counts = [0u64; 16];
    for _ in 0..10_000 {
        counts[state.measure_all(&mut rng).0] += 1;
    }
    let p = chi_square_p(&counts);
    assert!(p > 0.001, "p = {p}");
}
