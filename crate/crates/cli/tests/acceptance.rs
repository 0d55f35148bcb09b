//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::cmp::Ordering;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use unclone_cli::report::json_body;
use unclone_core::coin::{coin_setup, counterfeit_game, gen_banknote, run_attack, CoinAttack, CoinParams, CoinVariant, Verifier};
use unclone_core::detsig::{self, TreeParams};
use unclone_core::hilbert::{hermitian_eigen, haar_sample, projective_implementation, BinaryPovm};
use unclone_core::primitives::{PprfKey, Prf};
use unclone_core::purify::{self, StateGenerator, SmallRangeParams, TypeHaarMethod};
use unclone_core::report::Estimate;
use unclone_core::rng::{lab_rng, random_bytes, LabRng, Rng, SeedStream};
use unclone_core::sde_ue::{self, one_enc, one_keygen, pk_len, re_eval, OnePk, ReInput, TAG_LEN};
use unclone_core::Complex64;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Check {
    ensure(elapsed <= limit, format!("{detail}; {:.1}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()))
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn type_state_bound() -> Check {
    let start = Instant::now();
    let mut rng = lab_rng(0);
    let mut tds = Vec::new();
    for n in 3..=6 {
        let r = purify::type_vs_haar_distance(n, 2, TypeHaarMethod::Symmetric, &mut rng).map_err(e)?;
        if r.td_estimate > r.bound {
            return Err(format!("n={n}: td {} > bound {}", r.td_estimate, r.bound));
        }
        tds.push(r.td_estimate);
    }
    let monotone = tds.windows(2).all(|w| w[1] < w[0]);
    let detail = format!("td at n=3..6: {tds:.5?}");
    ensure(monotone, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(30), detail)
}

fn compiler_equivalence() -> Check {
    let start = Instant::now();
    let stream = SeedStream::new(2);
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let mut rng = stream.trial(i);
        let n = 2 + (i % 3) as usize;
        let t = 1 + ((i / 3) % 3) as usize;
        let q = 1 + ((i / 9) % 2) as usize;
        let generator = StateGenerator::seeded_haar(random_bytes::<16>(&mut rng).to_vec(), q).map_err(e)?;
        let r = purify::compiler_equivalence_check(&generator, n, t, &mut rng).map_err(e)?;
        worst = worst.max(r.exact_gap);
    }
    let detail = format!("max exact_gap {worst:.2e} over 50 configurations");
    ensure(worst <= 1e-9, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(60), detail)
}

fn small_range_overlap() -> Check {
    let start = Instant::now();
    let params = SmallRangeParams { k: 2, ell: 32, accuracy: 0.0, x_bits: 6 };
    let est = purify::small_range_overlap_experiment(&params, 1, 1000, &mut lab_rng(3)).map_err(e)?;
    let bound = 1.0 - 4.0 / 32.0;
    let detail = format!("mean overlap {:.4} ± {:.4}, bound {bound}", est.mean, est.stderr);
    ensure(est.mean >= bound - 3.0 * est.stderr, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(120), detail)
}

fn subsets(universe: u64, max: usize, mut f: impl FnMut(&[u64])) {
    fn go(start: u64, universe: u64, max: usize, cur: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == max {
            return;
        }
        for x in start..universe {
            cur.push(x);
            go(x + 1, universe, max, cur, f);
            cur.pop();
        }
    }
    go(0, universe, max, &mut Vec::new(), &mut f);
}

fn pprf_punctured() -> Check {
    let mut rng = lab_rng(4);
    let mut sets = 0u64;
    let mut violations = 0u64;
    let mut check = |key: &PprfKey, table: &[Vec<u8>], set: &[u64]| -> Result<(), String> {
        let pk = key.puncture(set).map_err(e)?;
        for (x, want) in table.iter().enumerate() {
            let x = x as u64;
            let ok = match pk.eval(x) {
                Ok(v) => !set.contains(&x) && &v == want,
                Err(_) => set.contains(&x),
            };
            violations += u64::from(!ok);
        }
        sets += 1;
        Ok(())
    };
    // Every subset of size ≤ 3 at ℓ₁ = 4; at ℓ₁ = 8 every subset of size
    // ≤ 2 plus a random sample of size-3 subsets.
    for bits in [4usize, 8] {
        let key = PprfKey::generate(bits, 128, &mut rng).map_err(e)?;
        let table: Vec<Vec<u8>> = (0..1u64 << bits).map(|x| key.eval(x)).collect::<Result<_, _>>().map_err(e)?;
        let mut failure = None;
        subsets(1 << bits, if bits == 4 { 3 } else { 2 }, |s| {
            if failure.is_none() {
                failure = check(&key, &table, s).err();
            }
        });
        if let Some(f) = failure {
            return Err(f);
        }
        if bits == 8 {
            for _ in 0..2000 {
                let mut s: Vec<u64> = Vec::new();
                while s.len() < 3 {
                    let x = rng.random_range(0..256);
                    if !s.contains(&x) {
                        s.push(x);
                    }
                }
                check(&key, &table, &s)?;
            }
        }
    }
    ensure(violations == 0, format!("{violations} violations over {sets} puncture sets, every input evaluated"))
}

fn detsig_criteria() -> Check {
    let start = Instant::now();
    let mut rng = lab_rng(5);
    let params = TreeParams::new(16, 128, 24).map_err(e)?;
    let (vk, sk) = detsig::setup(params, &mut rng).map_err(e)?;
    let (mut round, mut det, mut flips, mut flip_total) = (0, 0, 0, 0);
    let mut first = None;
    for _ in 0..100 {
        let m = rng.random_range(0..1u64 << 16);
        let sig = sk.sign(m).map_err(e)?;
        round += u32::from(detsig::verify(&vk, m, sig.as_bytes()));
        det += u32::from(sk.sign(m).map_err(e)?.as_bytes() == sig.as_bytes());
        for b in 0..16 {
            flip_total += 1;
            flips += u32::from(!detsig::verify(&vk, m ^ (1 << b), sig.as_bytes()));
        }
        first.get_or_insert((m, sig.as_bytes().to_vec()));
    }
    let (m, mut sig) = first.expect("100 messages");
    let bits = sig.len() * 8;
    let mut tamper_rejected = 0;
    for p in 0..bits {
        sig[p / 8] ^= 1 << (p % 8);
        tamper_rejected += usize::from(!detsig::verify(&vk, m, &sig));
        sig[p / 8] ^= 1 << (p % 8);
    }
    let detail = format!(
        "round trip {round}/100, deterministic {det}/100, tamper rejected {tamper_rejected}/{bits}, message flips rejected {flips}/{flip_total}"
    );
    ensure(round == 100 && det == 100 && tamper_rejected == bits && flips == flip_total, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(30), detail)
}

fn coin_correctness() -> Check {
    let stream = SeedStream::new(6);
    let params = CoinParams::default();
    let (mut worst_accept, mut worst_inner) = (1.0f64, 1.0f64);
    for variant in [CoinVariant::Prs, CoinVariant::Eqsup] {
        for i in 0..50 {
            let mut rng = stream.trial(i + if variant == CoinVariant::Prs { 0 } else { 1000 });
            let (vk, sk) = coin_setup(variant, params, &mut rng).map_err(e)?;
            let a = gen_banknote(&sk).map_err(e)?;
            let b = gen_banknote(&sk).map_err(e)?;
            let p = Verifier::new(&vk).accept_probability(&a.state).map_err(e)?;
            worst_accept = worst_accept.min(p);
            worst_inner = worst_inner.min(a.state.inner(&b.state).map_err(e)?.re);
        }
    }
    let detail = format!("min honest accept {worst_accept:.15}, min coin overlap {worst_inner:.15} over 2×50 setups");
    ensure(1.0 - worst_accept <= 1e-12 && (1.0 - worst_inner).abs() <= 1e-12, detail)
}

fn counterfeit_envelopes() -> Check {
    let stream = SeedStream::new(7);
    let mini_n = 8;
    let params = CoinParams { id_bits: 4, mini_n, digest_bits: 32, lambda: 128 };
    let mut root = stream.root();
    let (vk, sk) = coin_setup(CoinVariant::Eqsup, params, &mut root).map_err(e)?;
    let coin = gen_banknote(&sk).map_err(e)?;
    let mut verifier = Verifier::new(&vk);
    let envelope = 0.5f64.powi(mini_n as i32 / 2);
    let mut rate = |attack: CoinAttack, offset: u64| -> Result<Estimate, String> {
        let trials = 10_000u64;
        let mut wins = 0;
        for i in 0..trials {
            let mut r: LabRng = stream.trial(offset + i);
            let out = counterfeit_game(&mut verifier, &coin, 1, |c, rr| run_attack(attack, c, mini_n, rr), &mut r)
                .map_err(e)?;
            wins += u64::from(out.success);
        }
        Ok(Estimate::bernoulli(wins, trials))
    };
    let zero = rate(CoinAttack::ZeroPad, 0)?;
    let clone = rate(CoinAttack::MeasureClone, 100_000)?;
    let detail = format!(
        "zero-pad {:.4} ± {:.4}, measure-clone {:.4} ± {:.4}, envelope {envelope}",
        zero.mean, zero.stderr, clone.mean, clone.stderr
    );
    ensure((zero.mean - envelope).abs() <= 3.0 * zero.stderr && clone.mean <= envelope + 3.0 * clone.stderr, detail)
}

fn random_povm(rng: &mut LabRng) -> Result<BinaryPovm, String> {
    let dim = 1usize << rng.random_range(1..=4);
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = Complex64::new(rng.random::<f64>() - 0.5, if i == j { 0.0 } else { rng.random::<f64>() - 0.5 });
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    let (_, vecs) = hermitian_eigen(&h);
    // Few distinct eigenvalues so that degenerate eigenspaces occur.
    let levels: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
    let mut p = DMatrix::<Complex64>::zeros(dim, dim);
    for v in &vecs {
        let lambda = levels[rng.random_range(0..levels.len())];
        p += v * v.adjoint() * Complex64::from(lambda);
    }
    BinaryPovm::new(p).map_err(e)
}

fn measurement_theory() -> Check {
    let mut rng = lab_rng(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let povm = random_povm(&mut rng)?;
        let pi = projective_implementation(&povm);
        worst = worst.max((pi.reconstruct() - povm.operator()).norm());
    }
    let mut repeatable = 0;
    for _ in 0..100 {
        let povm = random_povm(&mut rng)?;
        let pi = projective_implementation(&povm);
        let state = haar_sample(povm.dim().trailing_zeros() as usize, &mut rng).map_err(e)?;
        let t = rng.random::<f64>();
        let (first, post) = pi.threshold(t, &state, &mut rng).map_err(e)?;
        let (second, _) = pi.threshold(t, &post, &mut rng).map_err(e)?;
        repeatable += u32::from(first == second);
    }
    let detail = format!("max reconstruction error {worst:.2e} over 100 POVMs, TI repeatable {repeatable}/100");
    ensure(worst <= 1e-8 && repeatable == 100, detail)
}

/// Straight-line mode table for the re-encryption circuit.
fn re_oracle(pk: &OnePk, m: u64, k: &PprfKey, mode: u8, pk_prime: &[u8], ct_star: &[u8]) -> Vec<u8> {
    let h = Sha256::digest(pk.to_bytes());
    let rho = k.eval(u64::from_be_bytes(h[..8].try_into().unwrap())).unwrap();
    let ours = &pk.tau()[..];
    let theirs = &pk_prime[..TAG_LEN];
    if mode == 0 {
        return one_enc(pk, m, &rho);
    }
    if mode == 1 {
        return if ours <= theirs { one_enc(pk, 0, &rho) } else { one_enc(pk, m, &rho) };
    }
    if ours < theirs {
        one_enc(pk, 0, &rho)
    } else if ours == theirs {
        ct_star.to_vec()
    } else {
        one_enc(pk, m, &rho)
    }
}

/// A public key whose tag compares to `tau` as `want`.
fn neighbour_pk(tau: &[u8; TAG_LEN], want: Ordering, rng: &mut LabRng) -> Vec<u8> {
    let mut bytes: Vec<u8> = (0..pk_len()).map(|_| rng.random()).collect();
    let mut t = *tau;
    match want {
        Ordering::Equal => {}
        Ordering::Less => t[TAG_LEN - 1] = t[TAG_LEN - 1].wrapping_sub(1),
        Ordering::Greater => t[TAG_LEN - 1] = t[TAG_LEN - 1].wrapping_add(1),
    }
    if t[..].cmp(&tau[..]) != want {
        // Last byte wrapped; move the first byte instead.
        t = *tau;
        t[0] = if want == Ordering::Less { 0 } else { 0xff };
        if t[..].cmp(&tau[..]) != want {
            t = if want == Ordering::Less { [0; TAG_LEN] } else { [0xff; TAG_LEN] };
        }
    }
    bytes[..TAG_LEN].copy_from_slice(&t);
    bytes
}

fn sde_ue_wiring() -> Check {
    let mut rng = lab_rng(9);
    let (pk, msk) = sde_ue::sde_setup(4, &mut rng).map_err(e)?;
    let keys = (0..5).map(|_| sde_ue::sde_kg_random(&msk, &mut rng)).collect::<Result<Vec<_>, _>>().map_err(e)?;
    let mut sde_ok = 0;
    for m in 0..16 {
        let ct = sde_ue::sde_enc(&pk, m, &mut rng).map_err(e)?;
        sde_ok += keys.iter().filter(|k| sde_ue::sde_dec(k, &ct) == Some(m)).count();
    }

    let mut table_ok = 0;
    for mode in 0..3u8 {
        for want in [Ordering::Less, Ordering::Equal, Ordering::Greater] {
            for _ in 0..16 {
                let (one_pk, _) = one_keygen(&random_bytes::<32>(&mut rng)).map_err(e)?;
                let m = rng.random_range(0..16);
                let k = PprfKey::generate(64, 256, &mut rng).map_err(e)?;
                let pk_prime = neighbour_pk(one_pk.tau(), want, &mut rng);
                let ct_star: Vec<u8> = (0..sde_ue::one_ct_len()).map(|_| rng.random()).collect();
                let want_ct = re_oracle(&one_pk, m, &k, mode, &pk_prime, &ct_star);
                let input = ReInput { m, k, mode, pk_prime, ct_star };
                table_ok += u32::from(re_eval(&one_pk, &input.to_bytes()).map_err(e)? == want_ct);
            }
        }
    }

    let (mut ue_ok, mut padded_ok, mut determined) = (0, 0, 0);
    for _ in 0..100 {
        let (ek, dk) = sde_ue::ue_kg(4, &mut rng).map_err(e)?;
        let m = rng.random_range(0..16);
        let r = random_bytes::<32>(&mut rng);
        let ct = sde_ue::ue_enc(&ek, m, &r).map_err(e)?;
        ue_ok += u32::from(sde_ue::ue_dec(&dk, &ct) == Some(m));
        let again = sde_ue::ue_enc(&ek, m, &r).map_err(e)?;
        determined += u32::from(again == ct && again.sk.one.note.amplitudes() == ct.sk.one.note.amplitudes());
        let (ekp, dkp) = sde_ue::ue_ekdk_kg(&mut rng);
        let pct = sde_ue::ue_ekdk_enc(&ekp, 4, m, &mut rng).map_err(e)?;
        padded_ok += u32::from(ekp == dkp && sde_ue::ue_ekdk_dec(&dkp, &pct) == Some(m));
    }
    let detail = format!(
        "SDE {sde_ok}/80, mode table {table_ok}/144, UE {ue_ok}/100, identical-key UE {padded_ok}/100, classically determined {determined}/100"
    );
    ensure(sde_ok == 80 && table_ok == 144 && ue_ok == 100 && padded_ok == 100 && determined == 100, detail)
}

const EXPERIMENTS: &[&str] = &[
    "coin demo --trials 200",
    "coin demo --variant prs --attack measure-clone --trials 100",
    "detsig demo --trials 20 --tamper-bits 256",
    "detsig vectors",
    "purify type-haar --n 3",
    "purify type-haar --method monte-carlo --samples 200",
    "purify equivalence --trials 3",
    "purify small-range --trials 100",
    "purify srd --trials 500",
    "prs sample",
    "prs sample --kwise 3",
    "mini demo --trials 200",
    "sde demo",
    "ue demo --trials 20",
    "game run strong-anti-piracy --trials 5",
    "game run strong-search --trials 5",
    "game run identical-challenge --trials 5",
    "game run multi-challenge-ue --trials 5",
    "game run multi-copy-ue --adversary junk --trials 5",
    "vectors",
];

fn reproducibility() -> Check {
    let bin = env!("CARGO_BIN_EXE_unclone");
    for cmd in EXPERIMENTS {
        let run = || -> Result<serde_json::Value, String> {
            let out = Command::new(bin).args(cmd.split_whitespace()).args(["--seed", "11"]).output().map_err(e)?;
            let text = String::from_utf8(out.stdout).map_err(e)?;
            json_body(&text).ok_or_else(|| format!("`{cmd}` printed no report: {}", String::from_utf8_lossy(&out.stderr)))
        };
        if run()? != run()? {
            return Err(format!("`{cmd}` differs between runs"));
        }
    }
    Ok(format!("{} experiments, identical report bodies", EXPERIMENTS.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("type-state bound", type_state_bound),
        ("compiler equivalence", compiler_equivalence),
        ("small-range overlap", small_range_overlap),
        ("PPRF punctured correctness", pprf_punctured),
        ("detsig", detsig_criteria),
        ("coin correctness", coin_correctness),
        ("counterfeit envelopes", counterfeit_envelopes),
        ("measurement theory", measurement_theory),
        ("SDE/UE wiring", sde_ue_wiring),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail} [{:.1}s]", i + 1, start.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
