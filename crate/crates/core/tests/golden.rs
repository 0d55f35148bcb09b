//! Frozen outputs. Any change here changes every downstream report.

use sha2::{Digest, Sha256};

use unclone_core::detsig::{self, TreeParams};
use unclone_core::minischeme::mini_gen;
use unclone_core::primitives::hash::{child, expand};
use unclone_core::primitives::{KwiseFunction, OtsKeypair, PprfKey, Prf};
use unclone_core::prs::prs_setup;
use unclone_core::rng::lab_rng;

fn sha(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn check(name: &str, got: String, want: &str) {
    assert_eq!(got, want, "{name}");
}

#[test]
fn ggm_children_and_expand() {
    check("left", hex::encode(child(&[0; 32], false)), "7f9c9e31ac8256ca2f258583df262dbc7d6f68f2a03043d5c99a4ae5a7396ce9");
    check("right", hex::encode(child(&[0; 32], true)), "1a7dfdeaffeedac489287e85be5e9c049a2ff6470f55cf30260f55395ac1b159");
    check("expand", hex::encode(expand(&[0; 32], 40)), "22689034dd7977d019ec4fc2606eddaad978a0e5e7cba9a2712a549341c46ca9738eba0d0fdf7511");
}

#[test]
fn pprf_at_zero() {
    let key = PprfKey::generate(8, 128, &mut lab_rng(1)).unwrap();
    check("root", hex::encode(key.root()), "9a3744504560639ec670b7a17d492b273e077b0a96bef58ba7760779e544546e");
    check("eval 0x00", hex::encode(key.eval(0).unwrap()), "fd3fa5c94790947f4a56e1f20c7da742");
    let fixed = PprfKey::new([7; 32], 8, 128).unwrap();
    check("fixed root eval 0x00", hex::encode(fixed.eval(0).unwrap()), "6a6428fc831c72303a1853439746ca5f");
    check("punctured", sha(fixed.puncture(&[0x10, 0x11]).unwrap().to_bytes()), "c4885bce44c10bcfbb23180f4a81cfd69fa2523206a5c7b752c02f67446765ff");
}

#[test]
fn ots_keys_and_signature() {
    let kp = OtsKeypair::from_seed(&[1; 32], 16).unwrap();
    check("vk", sha(kp.vk.as_bytes()), "a20a578ef6aa6a84b360e2d6ba4382436152e8cfdac9c882f4874edb7af1b95b");
    check("sig", sha(kp.sk.sign(b"abc")), "37541bbb1b1106fb5e9e45c714244a1f2c6d24f32da0909466483e82c8644cc4");
}

#[test]
fn tree_signature() {
    let (vk, sk) = detsig::setup(TreeParams::new(8, 128, 16).unwrap(), &mut lab_rng(1)).unwrap();
    check("vk", sha(vk.to_bytes()), "15cc29be8cbc6ab00d043f82f705cbcd1bcedfd394c6488d6800fd3a3ec6bf4c");
    check("sig 0x5a", sha(sk.sign(0x5a).unwrap().as_bytes()), "be2364c7ad1b8a875301289cb644c46a8c84b9c7cbc84a4ba55e232e53a3758e");
}

#[test]
fn prs_phases_and_note() {
    let key = prs_setup(4, &mut lab_rng(1)).unwrap();
    let bits: String = (0..16).map(|x| if key.phase_bit(x).unwrap() { '1' } else { '0' }).collect();
    check("phases", bits, "0001000101100111");
    let note = mini_gen(4, &[3; 32]).unwrap();
    check("serial", hex::encode(note.subspace.to_bytes()), "040907");
}

#[test]
fn kwise_fixed_coefficients() {
    let f = KwiseFunction::new(1, 8, vec![1, 2], 8).unwrap();
    let vals: Vec<u64> = (0..6).map(|x| f.eval(x).unwrap()).collect();
    // 1 + 2x in GF(2^8): doubling is a shift, addition is xor.
    assert_eq!(vals, [1, 3, 5, 7, 9, 11]);
}
