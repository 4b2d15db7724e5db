//! `hppk` command-line tool.
//!
//! Exit codes: 0 success, 1 cryptographic rejection (bad signature, failed
//! decapsulation, KAT mismatch), 2 usage or format error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hppk_qpp::codec::{self, Kind, Object, QppKey, QPP_NONCE_LEN, QPP_SEED_LEN};
use hppk_qpp::keystream::TAG_HPPK_ENTROPY;
use hppk_qpp::qpp::{self, PadKind, DEFAULT_BLOCK_BITS, DEFAULT_PAD_SIZE};
use hppk_qpp::{
    hppk_ds, hppk_kem, kat, DispatchMode, Error, HppkParams, Keystream, ParamSet, SecurityLevel,
};
use rand_core::{OsRng, RngCore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hppk",
    version,
    about = "HPPK key triple and QPP file encryption"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SeedArgs {
    /// Deterministic entropy for reproducible output. Never use for real keys.
    #[arg(long, value_name = "HEX")]
    seed_hex: Option<String>,
    /// Required alongside --seed-hex.
    #[arg(long)]
    unsafe_deterministic: bool,
}

#[derive(Args, Debug)]
struct ParamArgs {
    /// Security level; selects the signature row of that level.
    #[arg(long, default_value = "III", conflicts_with = "config")]
    level: SecurityLevel,
    /// Explicit parameter set, e.g. `KEM-(32,1,1,2)` or `ds-64-1-1-1`.
    #[arg(long)]
    config: Option<ParamSet>,
}

impl ParamArgs {
    fn set(&self) -> ParamSet {
        self.config
            .unwrap_or_else(|| ParamSet::signature_set(self.level))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Random,
    Sequential,
}

impl From<ModeArg> for DispatchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Random => DispatchMode::Random,
            ModeArg::Sequential => DispatchMode::Sequential,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PadKindArg {
    Matrix,
    Arithmetic,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a private key with its encapsulation and verification keys.
    Keygen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        vk: PathBuf,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Encapsulate a fresh shared secret to a public key.
    Encaps {
        #[arg(long)]
        pk: PathBuf,
        /// Ciphertext output.
        #[arg(long)]
        out: PathBuf,
        /// Shared-secret output.
        #[arg(long)]
        ss: PathBuf,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Recover the shared secret from a ciphertext.
    Decaps {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Shared-secret output.
        #[arg(long, alias = "out")]
        ss: PathBuf,
    },
    /// Sign a file.
    Sign {
        #[arg(long)]
        sk: PathBuf,
        /// Verification key, used to check the signature before writing it.
        #[arg(long)]
        vk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Verify a file signature.
    Verify {
        #[arg(long)]
        vk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Generate a permutation-pad key.
    QppKeygen {
        #[arg(long)]
        out: PathBuf,
        /// Block width in bits.
        #[arg(long, default_value_t = DEFAULT_BLOCK_BITS)]
        n: u32,
        /// Number of permutations.
        #[arg(long = "M", default_value_t = DEFAULT_PAD_SIZE)]
        pad_size: usize,
        /// Also write the expanded pad tables here.
        #[arg(long)]
        pad: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Encrypt a file with a pad key.
    QppEncrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "random")]
        mode: ModeArg,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Decrypt a file with a pad key.
    QppDecrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Known-answer test files.
    Kat {
        #[command(subcommand)]
        action: KatAction,
    },
    /// Print derived figures.
    Info {
        #[command(subcommand)]
        topic: InfoTopic,
    },
}

#[derive(Subcommand, Debug)]
enum KatAction {
    /// Write vectors for the given sets (all nine by default).
    Emit {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_name = "HEX", default_value = "00")]
        seed_hex: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        config: Vec<ParamSet>,
    },
    /// Re-run every vector in a file.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum InfoTopic {
    /// Key-space entropy of a pad.
    Entropy {
        #[arg(long, default_value_t = DEFAULT_BLOCK_BITS)]
        n: u32,
        #[arg(long = "M", default_value_t = DEFAULT_PAD_SIZE)]
        pad_size: usize,
        #[arg(long, value_enum, default_value = "matrix")]
        kind: PadKindArg,
    },
    /// Estimated brute-force cost of recovering both hidden rings.
    Complexity {
        /// Ring width L; defaults to the selected parameter set's.
        #[arg(long)]
        bits: Option<u32>,
        #[command(flatten)]
        params: ParamArgs,
    },
}

enum Failure {
    Usage(String),
    Reject(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Decapsulation(_) => Failure::Reject(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path, kind: Kind) -> std::result::Result<Object, Failure> {
    let bytes = read(path)?;
    codec::decode_kind(&bytes, kind).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn rng_for(seed: &SeedArgs) -> std::result::Result<Box<dyn RngCore>, Failure> {
    match &seed.seed_hex {
        None => Ok(Box::new(OsRng)),
        Some(_) if !seed.unsafe_deterministic => Err(Failure::Usage(
            "--seed-hex is for testing only and requires --unsafe-deterministic".into(),
        )),
        Some(h) => {
            let bytes = hex::decode(h).map_err(|e| Failure::Usage(format!("--seed-hex: {e}")))?;
            Ok(Box::new(Keystream::new(&bytes, TAG_HPPK_ENTROPY)))
        }
    }
}

fn same_params(a: &HppkParams, b: &HppkParams, what: &str) -> Outcome {
    if a != b {
        return Err(Failure::Usage(format!(
            "{what} were made for different parameters"
        )));
    }
    Ok(())
}

fn execute(cmd: Command) -> Outcome {
    match cmd {
        Command::Keygen {
            params,
            sk,
            pk,
            vk,
            seed,
        } => {
            let set = params.set();
            let p = set.params();
            let mut rng = rng_for(&seed)?;
            let t = hppk_ds::ds_keygen(&p, &mut rng)?;
            write(
                &sk,
                &codec::encode(&Object::KemPrivateKey(p.clone(), t.sk))?,
            )?;
            write(&pk, &codec::encode(&Object::KemPublicKey(p.clone(), t.pk))?)?;
            write(&vk, &codec::encode(&Object::DsVerificationKey(p, t.vk))?)?;
            eprintln!("generated {set} key triple");
        }
        Command::Encaps { pk, out, ss, seed } => {
            let Object::KemPublicKey(p, pk) = load(&pk, Kind::KemPublicKey)? else {
                unreachable!()
            };
            let mut rng = rng_for(&seed)?;
            let (x, ct) = hppk_kem::encapsulate(&pk, &p, &mut rng)?;
            write(&out, &codec::encode(&Object::KemCiphertext(p.clone(), ct))?)?;
            write(&ss, &codec::encode_shared_secret(&p, &x)?)?;
        }
        Command::Decaps { sk, input, ss } => {
            let Object::KemPrivateKey(p, sk) = load(&sk, Kind::KemPrivateKey)? else {
                unreachable!()
            };
            let Object::KemCiphertext(cp, ct) = load(&input, Kind::KemCiphertext)? else {
                unreachable!()
            };
            same_params(&p, &cp, "key and ciphertext")?;
            let x = hppk_kem::decapsulate(&sk, &ct, &p)?;
            write(&ss, &codec::encode_shared_secret(&p, &x)?)?;
        }
        Command::Sign {
            sk,
            vk,
            input,
            out,
            seed,
        } => {
            let Object::KemPrivateKey(p, sk) = load(&sk, Kind::KemPrivateKey)? else {
                unreachable!()
            };
            let Object::DsVerificationKey(vp, vk) = load(&vk, Kind::DsVerificationKey)? else {
                unreachable!()
            };
            same_params(&p, &vp, "private and verification keys")?;
            let msg = read(&input)?;
            let mut rng = rng_for(&seed)?;
            let sig = hppk_ds::sign(&sk, &vk, &p, &msg, &mut rng)?;
            write(&out, &codec::encode(&Object::DsSignature(p, sig))?)?;
        }
        Command::Verify { vk, input, sig } => {
            let Object::DsVerificationKey(p, vk) = load(&vk, Kind::DsVerificationKey)? else {
                unreachable!()
            };
            let Object::DsSignature(sp, sig) = load(&sig, Kind::DsSignature)? else {
                unreachable!()
            };
            same_params(&p, &sp, "verification key and signature")?;
            let msg = read(&input)?;
            if !hppk_ds::verify(&vk, &p, &msg, &sig)? {
                return Err(Failure::Reject("signature rejected".into()));
            }
            println!("signature accepted");
        }
        Command::QppKeygen {
            out,
            n,
            pad_size,
            pad,
            seed,
        } => {
            let mut rng = rng_for(&seed)?;
            let mut key_seed = [0u8; QPP_SEED_LEN];
            rng.fill_bytes(&mut key_seed);
            let key = QppKey {
                bits: n,
                size: pad_size,
                seed: key_seed,
            };
            // Validates the shape before anything is written.
            let tables = key.pad()?;
            write(&out, &codec::encode(&Object::QppKey(key))?)?;
            if let Some(path) = pad {
                write(&path, &codec::encode(&Object::QppPad(tables))?)?;
            }
        }
        Command::QppEncrypt {
            key,
            input,
            out,
            mode,
            seed,
        } => {
            let Object::QppKey(key) = load(&key, Kind::QppKey)? else {
                unreachable!()
            };
            let mut rng = rng_for(&seed)?;
            let mut nonce = [0u8; QPP_NONCE_LEN];
            rng.fill_bytes(&mut nonce);
            let stream = codec::seal_stream(&key, nonce, mode.into(), &read(&input)?)?;
            write(&out, &codec::encode(&Object::QppStream(stream))?)?;
        }
        Command::QppDecrypt { key, input, out } => {
            let Object::QppKey(key) = load(&key, Kind::QppKey)? else {
                unreachable!()
            };
            let Object::QppStream(stream) = load(&input, Kind::QppStream)? else {
                unreachable!()
            };
            let plain = codec::open_stream(&key, &stream)?;
            write(&out, &plain)?;
        }
        Command::Kat { action } => match action {
            KatAction::Emit {
                out,
                seed_hex,
                count,
                config,
            } => {
                let seed = hex::decode(&seed_hex)
                    .map_err(|e| Failure::Usage(format!("--seed-hex: {e}")))?;
                let sets = if config.is_empty() {
                    ParamSet::ALL.to_vec()
                } else {
                    config
                };
                write(&out, kat::emit_kat(&seed, &sets, count)?.as_bytes())?;
            }
            KatAction::Check { input } => {
                let text = String::from_utf8(read(&input)?)
                    .map_err(|_| Failure::Usage(format!("{} is not UTF-8", input.display())))?;
                match kat::check_kat(&text) {
                    Ok(n) => println!("{n} vectors passed"),
                    Err(f) if f.vector.is_some() => {
                        return Err(Failure::Reject(format!("kat mismatch: {f}")))
                    }
                    Err(f) => return Err(Failure::Usage(format!("{}: {f}", input.display()))),
                }
            }
        },
        Command::Info { topic } => match topic {
            InfoTopic::Entropy { n, pad_size, kind } => {
                let kind = match kind {
                    PadKindArg::Matrix => PadKind::Matrix,
                    PadKindArg::Arithmetic => PadKind::Arithmetic,
                };
                let bits = qpp::pad_entropy(n, pad_size, kind)?;
                println!("{:.0}", bits);
            }
            InfoTopic::Complexity { bits, params } => {
                let l = bits.unwrap_or_else(|| params.set().params().ring_bits);
                println!("{:.3}", hppk_kem::attack_complexity(l));
            }
        },
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Reject(msg)) => {
            eprintln!("rejected: {msg}");
            EXIT_REJECT
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}
