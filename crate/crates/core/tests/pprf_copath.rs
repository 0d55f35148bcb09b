//! Punctured keys against a brute-force copath built from the tree itself.

use std::collections::BTreeSet;

use unclone_core::primitives::hash::child;
use unclone_core::primitives::{PprfKey, Prf};
use unclone_core::rng::{lab_rng, Rng};

fn node_seed(root: &[u8; 32], depth: usize, index: u64) -> [u8; 32] {
    (0..depth).rev().fold(*root, |s, i| child(&s, (index >> i) & 1 == 1))
}

/// Maximal subtrees free of punctured leaves, as `(depth, index)`.
fn oracle_copath(bits: usize, set: &[u64]) -> BTreeSet<(usize, u64)> {
    let hit = |depth: usize, index: u64| set.iter().any(|&x| x >> (bits - depth) == index);
    let mut out = BTreeSet::new();
    for depth in 1..=bits {
        for index in 0..1u64 << depth {
            if !hit(depth, index) && hit(depth - 1, index >> 1) {
                out.insert((depth, index));
            }
        }
    }
    out
}

fn check(key: &PprfKey, bits: usize, set: &[u64]) {
    let pk = key.puncture(set).unwrap();
    let got: BTreeSet<_> = pk.copath().iter().map(|n| (n.depth, n.index)).collect();
    assert_eq!(got, oracle_copath(bits, set), "set {set:?}");
    for n in pk.copath() {
        assert_eq!(n.seed, node_seed(key.root(), n.depth, n.index));
    }
    let order: Vec<_> = pk.copath().iter().map(|n| (n.depth, n.index)).collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "nodes sorted by (depth, index)");
    for x in 0..1u64 << bits {
        match pk.eval(x) {
            Ok(v) => assert_eq!(v, key.eval(x).unwrap()),
            Err(_) => assert!(set.contains(&x)),
        }
    }
}

#[test]
fn every_small_set_at_four_bits() {
    let key = PprfKey::generate(4, 64, &mut lab_rng(21)).unwrap();
    for a in 0..16 {
        check(&key, 4, &[a]);
        for b in a + 1..16 {
            check(&key, 4, &[a, b]);
            for c in b + 1..16 {
                check(&key, 4, &[a, b, c]);
            }
        }
    }
}

#[test]
fn random_sets_at_eight_bits() {
    let mut rng = lab_rng(22);
    let key = PprfKey::generate(8, 128, &mut rng).unwrap();
    for _ in 0..300 {
        let size = rng.random_range(1..=3);
        let set: BTreeSet<u64> = (0..size).map(|_| rng.random_range(0..256)).collect();
        check(&key, 8, &set.into_iter().collect::<Vec<_>>());
    }
}

#[test]
fn siblings_at_the_bottom_share_a_path() {
    let key = PprfKey::generate(8, 128, &mut lab_rng(23)).unwrap();
    let pk = key.puncture(&[0x40, 0x41]).unwrap();
    assert_eq!(pk.copath().len(), 7);
    assert_eq!(key.puncture(&[0x40]).unwrap().copath().len(), 8);
}
