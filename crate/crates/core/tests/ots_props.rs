use proptest::prelude::*;

use unclone_core::primitives::OtsKeypair;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn signatures_verify(seed in any::<[u8; 32]>(), msg in proptest::collection::vec(any::<u8>(), 0..64)) {
        let kp = OtsKeypair::from_seed(&seed, 32).unwrap();
        let sig = kp.sk.sign(&msg);
        prop_assert!(kp.vk.verify(&msg, &sig));
        prop_assert_eq!(sig, kp.sk.sign(&msg));
    }

    #[test]
    fn tampering_is_rejected(
        seed in any::<[u8; 32]>(),
        msg in proptest::collection::vec(any::<u8>(), 1..64),
        pos in any::<prop::sample::Index>(),
        bit in 0u8..8,
    ) {
        let kp = OtsKeypair::from_seed(&seed, 32).unwrap();
        let mut sig = kp.sk.sign(&msg);
        let i = pos.index(sig.len());
        sig[i] ^= 1 << bit;
        prop_assert!(!kp.vk.verify(&msg, &sig));
    }

    #[test]
    fn other_messages_are_rejected(seed in any::<[u8; 32]>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        let kp = OtsKeypair::from_seed(&seed, 256).unwrap();
        let sig = kp.sk.sign(&a.to_be_bytes());
        prop_assert!(!kp.vk.verify(&b.to_be_bytes(), &sig));
    }
}
