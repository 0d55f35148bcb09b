use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use unclone_core::coin::{CoinAttack, CoinVariant};
use unclone_core::minischeme::CloneStrategy;
use unclone_core::sde_ue::{BuiltinAdversary, Game};

#[derive(Parser, Debug)]
#[command(name = "unclone", version, about = "Run unclone experiments and emit reports")]
pub struct Cli {
    /// `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quantum coin bank and counterfeiting attacks.
    #[command(subcommand)]
    Coin(CoinCmd),
    /// Deterministic tree signatures.
    #[command(subcommand)]
    Detsig(DetsigCmd),
    /// Purification compiler and small-range experiments.
    #[command(subcommand)]
    Purify(PurifyCmd),
    /// Binary-phase pseudorandom states.
    #[command(subcommand)]
    Prs(PrsCmd),
    /// Subspace-state mini-scheme.
    #[command(subcommand)]
    Mini(MiniCmd),
    /// Collusion-resistant single-decryptor encryption wiring.
    #[command(subcommand)]
    Sde(SdeCmd),
    /// Unclonable encryption by role swap.
    #[command(subcommand)]
    Ue(UeCmd),
    /// Anti-piracy and unclonability games.
    #[command(subcommand)]
    Game(GameCmd),
    /// Golden vectors for the classical primitives.
    Vectors(VectorsArgs),
}

#[derive(Subcommand, Debug)]
pub enum CoinCmd {
    Demo(CoinDemo),
}

#[derive(Args, Debug, Serialize)]
pub struct CoinDemo {
    #[arg(long, default_value = "eqsup")]
    pub variant: CoinVariant,
    #[arg(long, default_value_t = 4)]
    pub id_bits: usize,
    #[arg(long, default_value_t = 8)]
    pub mini_n: usize,
    #[arg(long, default_value = "zero-pad")]
    pub attack: CoinAttack,
    /// Coins handed to the attacker.
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    #[arg(long, default_value_t = 32)]
    pub digest_bits: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum DetsigCmd {
    /// Round trips, determinism, message flips, and signature tampering.
    Demo(DetsigDemo),
    /// Deterministic key and signature vectors.
    Vectors(DetsigVectors),
}

#[derive(Args, Debug, Serialize)]
pub struct DetsigDemo {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 128)]
    pub lambda: usize,
    #[arg(long, default_value_t = 32)]
    pub digest_bits: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Signature bits to flip on the first message; 0 flips every bit.
    #[arg(long, default_value_t = 4096)]
    pub tamper_bits: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct DetsigVectors {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 128)]
    pub lambda: usize,
    #[arg(long, default_value_t = 16)]
    pub digest_bits: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum PurifyCmd {
    /// Distance between the Haar t-copy average and the type-state average.
    TypeHaar(TypeHaarArgs),
    /// Gap between the two compiler constructions on random inputs.
    Equivalence(EquivalenceArgs),
    /// Overlap of the small-range state with its distinct-image part.
    SmallRange(SmallRangeArgs),
    /// Classical collision distinguisher against a small-range table.
    Srd(SrdArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Symmetric,
    Dense,
    MonteCarlo,
}

#[derive(Args, Debug, Serialize)]
pub struct TypeHaarArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, value_enum, default_value_t = Method::Symmetric)]
    pub method: Method,
    /// Haar samples for the Monte Carlo method.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Required for the Monte Carlo method.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct EquivalenceArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    /// Payload qubits of the seeded Haar generator.
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SmallRangeArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 32)]
    pub ell: usize,
    #[arg(long, default_value_t = 6)]
    pub x_bits: usize,
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SrdArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 64)]
    pub ell: usize,
    #[arg(long, default_value_t = 16)]
    pub domain_bits: usize,
    #[arg(long, default_value_t = 16)]
    pub output_bits: usize,
    #[arg(long, default_value_t = 10000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum PrsCmd {
    /// Sample a key and print the phase pattern.
    Sample(PrsSample),
}

#[derive(Args, Debug, Serialize)]
pub struct PrsSample {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Use a k-wise independent phase function instead of the PPRF.
    #[arg(long)]
    pub kwise: Option<usize>,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum MiniCmd {
    /// Cloning attacks on a single banknote.
    Demo(MiniDemo),
}

#[derive(Args, Debug, Serialize)]
pub struct MiniDemo {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value = "zero-pad")]
    pub strategy: CloneStrategy,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum SdeCmd {
    /// Exhaustive round trips over every message and issued key.
    Demo(SdeDemo),
}

#[derive(Args, Debug, Serialize)]
pub struct SdeDemo {
    #[arg(long, default_value_t = 4)]
    pub msg_bits: usize,
    #[arg(long, default_value_t = 5)]
    pub keys: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum UeCmd {
    /// Round trips for the role-swap scheme and its identical-key wrapper.
    Demo(UeDemo),
}

#[derive(Args, Debug, Serialize)]
pub struct UeDemo {
    #[arg(long, default_value_t = 8)]
    pub msg_bits: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum GameCmd {
    Run(GameRun),
}

#[derive(Args, Debug, Serialize)]
pub struct GameRun {
    /// One of strong-anti-piracy, strong-search, identical-challenge, multi-challenge-ue, multi-copy-ue
    #[arg(value_name = "GAME")]
    pub name: Game,
    #[arg(long, default_value = "honest-forwarder")]
    pub adversary: BuiltinAdversary,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub msg_bits: usize,
    #[arg(long, default_value_t = 4)]
    pub enc_samples: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct VectorsArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
