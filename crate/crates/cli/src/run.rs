use serde_json::json;
use sha2::{Digest, Sha256};

use unclone_core::coin::{self, coin_setup, counterfeit_game, gen_banknote, run_attack, CoinAttack, CoinParams, Verifier};
use unclone_core::detsig::{self, TreeParams};
use unclone_core::hilbert::swap_test;
use unclone_core::minischeme::{self, CloneStrategy};
use unclone_core::primitives::{Gf2m, KwiseFunction, OtsKeypair, PprfKey, Prf};
use unclone_core::prs::{self, prs_setup, prs_setup_kwise};
use unclone_core::purify::{self, StateGenerator, SmallRangeParams, TypeHaarMethod};
use unclone_core::report::Estimate;
use unclone_core::rng::{random_bytes, Rng, SeedStream};
use unclone_core::sde_ue::{self, run_builtin, GameParams};

use crate::args::*;
use crate::report::Report;
use crate::CliError;

type Outcome = Result<Report, CliError>;

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Is the estimate above `bound` by more than three standard errors?
fn exceeds(e: &Estimate, bound: f64) -> bool {
    e.mean > bound && !e.consistent_with(bound, 3.0)
}

pub fn execute(command: &Command) -> Outcome {
    match command {
        Command::Coin(CoinCmd::Demo(a)) => coin_demo(a),
        Command::Detsig(DetsigCmd::Demo(a)) => detsig_demo(a),
        Command::Detsig(DetsigCmd::Vectors(a)) => detsig_vectors(a),
        Command::Purify(PurifyCmd::TypeHaar(a)) => type_haar(a),
        Command::Purify(PurifyCmd::Equivalence(a)) => equivalence(a),
        Command::Purify(PurifyCmd::SmallRange(a)) => small_range(a),
        Command::Purify(PurifyCmd::Srd(a)) => srd(a),
        Command::Prs(PrsCmd::Sample(a)) => prs_sample(a),
        Command::Mini(MiniCmd::Demo(a)) => mini_demo(a),
        Command::Sde(SdeCmd::Demo(a)) => sde_demo(a),
        Command::Ue(UeCmd::Demo(a)) => ue_demo(a),
        Command::Game(GameCmd::Run(a)) => game_run(a),
        Command::Vectors(a) => vectors(a),
    }
}

fn coin_demo(a: &CoinDemo) -> Outcome {
    let stream = SeedStream::new(a.seed);
    let mut rng = stream.root();
    let params = CoinParams { id_bits: a.id_bits, mini_n: a.mini_n, digest_bits: a.digest_bits, ..CoinParams::default() };
    let (vk, sk) = coin_setup(a.variant, params, &mut rng).map_err(run_err)?;
    let coin = gen_banknote(&sk).map_err(run_err)?;
    let mut verifier = Verifier::new(&vk);
    let honest = verifier.accept_probability(&coin.state).map_err(run_err)?;

    let mut wins = 0u64;
    let mut accept = vec![Vec::with_capacity(a.trials as usize); a.t + 1];
    for i in 0..a.trials {
        let mut r = stream.trial(i);
        let attack = a.attack;
        let out = counterfeit_game(&mut verifier, &coin, a.t, |c, rr| run_attack(attack, c, a.mini_n, rr), &mut r)
            .map_err(run_err)?;
        wins += u64::from(out.success);
        for (slot, p) in accept.iter_mut().zip(out.accept_probabilities) {
            slot.push(p);
        }
    }
    let rate = Estimate::bernoulli(wins, a.trials);
    let envelope = 0.5f64.powi(a.mini_n as i32 / 2);
    let per_note: Vec<Estimate> = accept.iter().map(|s| Estimate::from_samples(s)).collect();
    let violated = (1.0 - honest) > 1e-12 || (a.attack != CoinAttack::Null && exceeds(&rate, envelope));
    let results = json!({
        "honest_accept_probability": honest,
        "branches": coin.state.len(),
        "success_rate": rate,
        "envelope": envelope,
        "accept_probability_per_note": per_note,
    });
    Report::new("coin demo", a, Some(a.seed), results, violated)
}

fn detsig_demo(a: &DetsigDemo) -> Outcome {
    let stream = SeedStream::new(a.seed);
    let mut rng = stream.root();
    let params = TreeParams::new(a.n, a.lambda, a.digest_bits).map_err(run_err)?;
    let (vk, sk) = detsig::setup(params, &mut rng).map_err(run_err)?;
    let mask = if a.n == 64 { u64::MAX } else { (1u64 << a.n) - 1 };

    let (mut round_trips, mut deterministic, mut flips_rejected) = (0u64, 0u64, 0u64);
    let mut first = None;
    for i in 0..a.trials {
        let mut r = stream.trial(i);
        let m = r.random::<u64>() & mask;
        let sig = sk.sign(m).map_err(run_err)?;
        round_trips += u64::from(detsig::verify(&vk, m, sig.as_bytes()));
        deterministic += u64::from(sk.sign(m).map_err(run_err)? == sig);
        let flipped = m ^ (1u64 << r.random_range(0..a.n));
        flips_rejected += u64::from(!detsig::verify(&vk, flipped, sig.as_bytes()));
        first.get_or_insert((m, sig));
    }

    let mut tamper = json!(null);
    let mut tamper_ok = true;
    if let Some((m, sig)) = first {
        let total = sig.as_bytes().len() as u64 * 8;
        let positions: Vec<u64> = if a.tamper_bits == 0 || a.tamper_bits >= total {
            (0..total).collect()
        } else {
            (0..a.tamper_bits).map(|_| rng.random_range(0..total)).collect()
        };
        let mut bad = sig.as_bytes().to_vec();
        let mut rejected = 0u64;
        for &p in &positions {
            let (byte, bit) = ((p / 8) as usize, p % 8);
            bad[byte] ^= 1 << bit;
            rejected += u64::from(!detsig::verify(&vk, m, &bad));
            bad[byte] ^= 1 << bit;
        }
        tamper_ok = rejected == positions.len() as u64;
        tamper = json!({
            "exhaustive": positions.len() as u64 == total,
            "positions": positions.len(),
            "rejected": rejected,
        });
    }
    let violated = round_trips != a.trials || deterministic != a.trials || flips_rejected != a.trials || !tamper_ok;
    let results = json!({
        "signature_bytes": params.signature_len(),
        "round_trips": round_trips,
        "deterministic": deterministic,
        "message_flips_rejected": flips_rejected,
        "tamper": tamper,
    });
    Report::new("detsig demo", a, Some(a.seed), results, violated)
}

fn detsig_vectors(a: &DetsigVectors) -> Outcome {
    let mut rng = SeedStream::new(a.seed).root();
    let params = TreeParams::new(a.n, a.lambda, a.digest_bits).map_err(run_err)?;
    let (vk, sk) = detsig::setup(params, &mut rng).map_err(run_err)?;
    let top = if a.n == 64 { u64::MAX } else { (1u64 << a.n) - 1 };
    let mut messages = vec![0, 1, top];
    messages.push(rng.random::<u64>() & top);
    let entries = messages
        .into_iter()
        .map(|m| {
            let sig = sk.sign(m).map_err(run_err)?;
            Ok(json!({
                "message": m,
                "signature_len": sig.as_bytes().len(),
                "signature_sha256": sha256_hex(sig.as_bytes()),
                "tag": hex::encode(sig.tag()),
                "verifies": detsig::verify(&vk, m, sig.as_bytes()),
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let results = json!({
        "verify_key": hex::encode(vk.to_bytes()),
        "signatures": entries,
    });
    Ok(Report::new("detsig vectors", a, Some(a.seed), results, false)?.untimed())
}

fn type_haar(a: &TypeHaarArgs) -> Outcome {
    let method = match a.method {
        Method::Symmetric => TypeHaarMethod::Symmetric,
        Method::Dense => TypeHaarMethod::Dense,
        Method::MonteCarlo => TypeHaarMethod::MonteCarlo(a.samples),
    };
    let seed = match (a.method, a.seed) {
        (Method::MonteCarlo, None) => return Err(CliError::Usage("--seed is required for --method monte-carlo".into())),
        (_, s) => s,
    };
    let mut rng = SeedStream::new(seed.unwrap_or(0)).root();
    let report = purify::type_vs_haar_distance(a.n, a.t, method, &mut rng).map_err(run_err)?;
    let violated = report.td_estimate > report.bound;
    let results = json!({
        "td_estimate": report.td_estimate,
        "bound": report.bound,
        "method": report.method,
    });
    Report::new("purify type-haar", a, seed, results, violated)
}

fn equivalence(a: &EquivalenceArgs) -> Outcome {
    let stream = SeedStream::new(a.seed);
    let mut gaps = Vec::with_capacity(a.trials as usize);
    for i in 0..a.trials {
        let mut r = stream.trial(i);
        let generator = StateGenerator::seeded_haar(random_bytes::<16>(&mut r).to_vec(), a.q).map_err(run_err)?;
        gaps.push(purify::compiler_equivalence_check(&generator, a.n, a.t, &mut r).map_err(run_err)?.exact_gap);
    }
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let results = json!({
        "max_gap": max_gap,
        "gap": Estimate::from_samples(&gaps),
        "tolerance": 1e-9,
    });
    Report::new("purify equivalence", a, Some(a.seed), results, max_gap > 1e-9)
}

fn small_range(a: &SmallRangeArgs) -> Outcome {
    let mut rng = SeedStream::new(a.seed).root();
    let params = SmallRangeParams { k: a.k, ell: a.ell, accuracy: 0.0, x_bits: a.x_bits };
    let overlap = purify::small_range_overlap_experiment(&params, a.q, a.trials, &mut rng).map_err(run_err)?;
    let bound = 1.0 - (a.k * a.k) as f64 / a.ell as f64;
    let violated = overlap.mean + 3.0 * overlap.stderr < bound;
    let results = json!({ "overlap": overlap, "bound": bound });
    Report::new("purify small-range", a, Some(a.seed), results, violated)
}

fn srd(a: &SrdArgs) -> Outcome {
    let mut rng = SeedStream::new(a.seed).root();
    let r = purify::classical_srd_experiment(a.k, a.ell, a.domain_bits, a.output_bits, a.trials, &mut rng)
        .map_err(run_err)?;
    let violated = r.advantage - 3.0 * r.advantage_stderr > r.envelope;
    Report::new("purify srd", a, Some(a.seed), serde_json::to_value(&r).map_err(run_err)?, violated)
}

fn prs_sample(a: &PrsSample) -> Outcome {
    let mut rng = SeedStream::new(a.seed).root();
    let key = match a.kwise {
        Some(k) => prs_setup_kwise(a.n, k, &mut rng),
        None => prs_setup(a.n, &mut rng),
    }
    .map_err(run_err)?;
    let bits: String = (0..1u64 << a.n)
        .map(|x| key.phase_bit(x).map(|b| if b { '1' } else { '0' }))
        .collect::<Result<_, _>>()
        .map_err(run_err)?;
    let state = prs::prs_state(&key).map_err(run_err)?;
    let again = prs::prs_state(&key).map_err(run_err)?;
    let overlap = swap_test(&state, &again).map_err(run_err)?;
    let results = json!({
        "phase_bits": bits,
        "state_sha256": sha256_hex(&state.to_bytes()),
        "regenerated_swap_accept": overlap,
    });
    Report::new("prs sample", a, Some(a.seed), results, (overlap - 1.0).abs() > 1e-12)
}

fn mini_demo(a: &MiniDemo) -> Outcome {
    let stream = SeedStream::new(a.seed);
    let mut wins = 0u64;
    for i in 0..a.trials {
        let mut r = stream.trial(i);
        let note = minischeme::mini_gen(a.n, &random_bytes::<32>(&mut r)).map_err(run_err)?;
        let (x, y) = minischeme::mini_counterfeit(a.strategy, &note.note, &mut r).map_err(run_err)?;
        let (ok1, _) = minischeme::mini_verify(&note.subspace, &x, &mut r).map_err(run_err)?;
        let (ok2, _) = minischeme::mini_verify(&note.subspace, &y, &mut r).map_err(run_err)?;
        wins += u64::from(ok1 && ok2);
    }
    let rate = Estimate::bernoulli(wins, a.trials);
    let envelope = 0.5f64.powi(a.n as i32 / 2);
    let expected = match a.strategy {
        CloneStrategy::ZeroPad => envelope,
        CloneStrategy::MeasureClone | CloneStrategy::HadamardClone => envelope * envelope,
    };
    let results = json!({ "success_rate": rate, "envelope": envelope, "expected": expected });
    Report::new("mini demo", a, Some(a.seed), results, exceeds(&rate, envelope))
}

fn sde_demo(a: &SdeDemo) -> Outcome {
    let mut rng = SeedStream::new(a.seed).root();
    let (pk, msk) = sde_ue::sde_setup(a.msg_bits, &mut rng).map_err(run_err)?;
    let keys = (0..a.keys).map(|_| sde_ue::sde_kg_random(&msk, &mut rng)).collect::<Result<Vec<_>, _>>().map_err(run_err)?;
    let (mut cases, mut correct) = (0u64, 0u64);
    for m in 0..1u64 << a.msg_bits {
        let ct = sde_ue::sde_enc(&pk, m, &mut rng).map_err(run_err)?;
        for k in &keys {
            cases += 1;
            correct += u64::from(sde_ue::sde_dec(k, &ct) == Some(m));
        }
    }
    let taus: std::collections::BTreeSet<_> = keys.iter().map(|k| *k.tau()).collect();
    let (foreign_pk, _) = sde_ue::sde_setup(a.msg_bits, &mut rng).map_err(run_err)?;
    let foreign = sde_ue::sde_enc(&foreign_pk, 0, &mut rng).map_err(run_err)?;
    let foreign_rejected = keys.iter().all(|k| sde_ue::sde_dec(k, &foreign).is_none());
    let violated = correct != cases || taus.len() != keys.len() || !foreign_rejected;
    let results = json!({
        "cases": cases,
        "correct": correct,
        "distinct_tags": taus.len(),
        "foreign_ciphertext_rejected": foreign_rejected,
        "ciphertext_bytes": sde_ue::sde_ct_len(),
    });
    Report::new("sde demo", a, Some(a.seed), results, violated)
}

fn ue_demo(a: &UeDemo) -> Outcome {
    let stream = SeedStream::new(a.seed);
    let (mut plain, mut padded, mut determined) = (0u64, 0u64, 0u64);
    for i in 0..a.trials {
        let mut r = stream.trial(i);
        let (ek, dk) = sde_ue::ue_kg(a.msg_bits, &mut r).map_err(run_err)?;
        let m = r.random::<u64>() & ((1u64 << a.msg_bits) - 1);
        let seed = random_bytes::<32>(&mut r);
        let ct = sde_ue::ue_enc(&ek, m, &seed).map_err(run_err)?;
        plain += u64::from(sde_ue::ue_dec(&dk, &ct) == Some(m));
        determined += u64::from(sde_ue::ue_enc(&ek, m, &seed).map_err(run_err)? == ct);
        let (e, d) = sde_ue::ue_ekdk_kg(&mut r);
        let pct = sde_ue::ue_ekdk_enc(&e, a.msg_bits, m, &mut r).map_err(run_err)?;
        padded += u64::from(e == d && sde_ue::ue_ekdk_dec(&d, &pct) == Some(m));
    }
    let violated = [plain, padded, determined].iter().any(|&c| c != a.trials);
    let results = json!({
        "round_trips": plain,
        "identical_key_round_trips": padded,
        "classically_determined": determined,
    });
    Report::new("ue demo", a, Some(a.seed), results, violated)
}

fn game_run(a: &GameRun) -> Outcome {
    let stream = SeedStream::new(a.seed);
    let params = GameParams { q: a.q, gamma: a.gamma, msg_bits: a.msg_bits, enc_samples: a.enc_samples };
    let mut wins = 0u64;
    let mut party_passes = vec![0u64; a.q + 1];
    let mut transcript = Vec::new();
    for i in 0..a.trials {
        let mut r = stream.trial(i);
        let report = run_builtin(a.name, a.adversary, params, &mut r).map_err(run_err)?;
        wins += u64::from(report.game_bit);
        for (slot, b) in party_passes.iter_mut().zip(&report.party_bits) {
            *slot += u64::from(*b);
        }
        if i == 0 {
            transcript = report.transcript;
        }
    }
    let per_party: Vec<Estimate> = party_passes.iter().map(|&p| Estimate::bernoulli(p, a.trials)).collect();
    let results = json!({
        "game_win_rate": Estimate::bernoulli(wins, a.trials),
        "party_pass_rates": per_party,
        "uniform_guess_rate": 0.5f64.powi((a.msg_bits * (a.q + 1)) as i32),
        "transcript": transcript,
    });
    Report::new("game run", a, Some(a.seed), results, false)
}

fn vectors(a: &VectorsArgs) -> Outcome {
    let mut rng = SeedStream::new(a.seed).root();
    let pprf = PprfKey::generate(8, 128, &mut rng).map_err(run_err)?;
    let punctured = pprf.puncture(&[0x10, 0x11]).map_err(run_err)?;
    let field = Gf2m::new(8).map_err(run_err)?;
    let kwise = KwiseFunction::random(2, 8, 8, &mut rng).map_err(run_err)?;
    let kwise_values = (0..8u64).map(|x| kwise.eval(x)).collect::<Result<Vec<_>, _>>().map_err(run_err)?;
    let ots = OtsKeypair::from_seed(&random_bytes::<32>(&mut rng), 16).map_err(run_err)?;
    let note = minischeme::mini_gen(8, &random_bytes::<32>(&mut rng)).map_err(run_err)?;
    let coin_params = CoinParams { id_bits: 2, mini_n: 4, digest_bits: 16, lambda: 64 };
    let (_, coin_sk) = coin_setup(coin::CoinVariant::Eqsup, coin_params, &mut rng).map_err(run_err)?;
    let (sub, _, sig) = coin_sk.branch(0).map_err(run_err)?;
    let results = json!({
        "pprf": {
            "root": hex::encode(pprf.root()),
            "eval_0x00": hex::encode(pprf.eval(0).map_err(run_err)?),
            "eval_0xff": hex::encode(pprf.eval(0xff).map_err(run_err)?),
            "punctured_0x10_0x11": hex::encode(punctured.to_bytes()),
        },
        "gf2m": { "m": 8, "modulus": field.modulus() },
        "kwise": { "k": 2, "m": 8, "values_0_to_7": kwise_values },
        "ots": {
            "digest_bits": 16,
            "verify_key_sha256": sha256_hex(ots.vk.as_bytes()),
            "signature_sha256": sha256_hex(&ots.sk.sign(b"unclone")),
        },
        "mini": { "n": 8, "serial": hex::encode(&note.sn), "state_sha256": sha256_hex(&note.note.to_bytes()) },
        "coin_branch_0": { "serial": hex::encode(sub.to_bytes()), "signature_sha256": sha256_hex(&sig) },
    });
    Ok(Report::new("vectors", a, Some(a.seed), results, false)?.untimed())
}
