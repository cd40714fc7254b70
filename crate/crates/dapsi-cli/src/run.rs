//! The `run` subcommand: one protocol session, in-process or over TCP.

use std::fmt;
use std::fs;
use std::net::TcpListener;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, ValueEnum};
use dapsi::bits::BitVector;
use dapsi::hamming::{self, HamParams, SampleConfig};
use dapsi::intpsi::{self, Augmentation, IntParams, DEFAULT_MAX_BIT_LEN};
use dapsi::psi_backend::Backend;
use dapsi::session::{party_rng, run_dealer, Link};
use dapsi::transport::{phase_report, Channel, Tag, TcpChannel, Transcript};

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::inputs::{pairs_csv, read_int_set, read_vector_set, write_file};

/// How long a connecting party keeps retrying before giving up.
const CONNECT_TIMEOUT: Duration = Duration::from_secs(30);

/// Protocol selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    /// Integer distance PSI.
    Intpsi,
    /// Binned Hamming distance PSI.
    Hampsi,
    /// Sub-sampled Hamming distance PSI.
    HampsiSample,
}

/// Which endpoint this process plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Role {
    /// Every party on threads of this process.
    Both,
    /// The querying party; connects to Bob.
    Alice,
    /// The responding party; listens for Alice.
    Bob,
    /// The correlation dealer; listens for both parties.
    Dealer,
}

/// Set augmentation for integer PSI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AugmentArg {
    /// Dyadic subtries and prefix ladder.
    Dyadic,
    /// Every integer of the interval.
    Naive,
}

/// PSI engine for integer PSI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    /// Plaintext ideal functionality.
    Oracle,
    /// Diffie-Hellman blinding.
    Dh,
}

macro_rules! from_str_via_value_enum {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, false)
            }
        }
    )*};
}
from_str_via_value_enum!(Protocol, Role, AugmentArg, BackendArg);

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Oracle => Backend::Oracle,
            BackendArg::Dh => Backend::Dh,
        }
    }
}

impl From<AugmentArg> for Augmentation {
    fn from(a: AugmentArg) -> Self {
        match a {
            AugmentArg::Dyadic => Augmentation::Dyadic,
            AugmentArg::Naive => Augmentation::Naive,
        }
    }
}

/// Flags of the `run` subcommand. Every flag may also be given in the
/// `--config` file under its long name; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// key = value file supplying defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// intpsi, hampsi or hampsi-sample.
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// both (in-process), alice, bob or dealer.
    #[arg(long, visible_alias = "mode")]
    pub role: Option<Role>,
    /// Distance threshold.
    #[arg(long, visible_alias = "threshold")]
    pub d: Option<u64>,
    /// Target false-positive rate of the binned Hamming protocol.
    #[arg(long)]
    pub fpr: Option<f64>,
    /// Vector length; inferred from the input when omitted.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Samples per vector of the sub-sampled protocol.
    #[arg(long = "T")]
    pub big_t: Option<usize>,
    /// Required sample agreements of the sub-sampled protocol.
    #[arg(long = "t")]
    pub t: Option<usize>,
    /// Integer bit length.
    #[arg(long = "L")]
    pub bit_len: Option<u32>,
    /// PSI engine for integer PSI.
    #[arg(long)]
    pub backend: Option<BackendArg>,
    /// Set augmentation for integer PSI.
    #[arg(long)]
    pub augmentation: Option<AugmentArg>,
    /// Coordinates per sub-sampling mask.
    #[arg(long)]
    pub mask_weight: Option<usize>,
    /// Probe budget per query of the sub-sampled protocol.
    #[arg(long)]
    pub compute_cap: Option<u128>,
    /// Address to listen on (Bob and the dealer).
    #[arg(long)]
    pub listen: Option<String>,
    /// Bob's address (Alice).
    #[arg(long)]
    pub connect: Option<String>,
    /// Dealer address (Alice and Bob in the Hamming protocols).
    #[arg(long)]
    pub dealer: Option<String>,
    /// Seed for all randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Alice's input set.
    #[arg(long)]
    pub in_a: Option<PathBuf>,
    /// Bob's input set.
    #[arg(long)]
    pub in_b: Option<PathBuf>,
    /// Output directory for pairs.csv and phases.csv; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "protocol",
    "role",
    "mode",
    "d",
    "threshold",
    "fpr",
    "ell",
    "T",
    "t",
    "L",
    "backend",
    "augmentation",
    "mask-weight",
    "compute-cap",
    "listen",
    "connect",
    "dealer",
    "seed",
    "in-a",
    "in-b",
    "out",
];

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Protocol to run.
    pub protocol: Protocol,
    /// Endpoint played by this process.
    pub role: Role,
    /// Distance threshold.
    pub d: u64,
    /// Target false-positive rate.
    pub fpr: f64,
    /// Vector length, when fixed by the user.
    pub ell: Option<usize>,
    /// Samples per vector.
    pub big_t: usize,
    /// Required agreements.
    pub t: usize,
    /// Integer bit length.
    pub bit_len: u32,
    /// PSI engine.
    pub backend: Backend,
    /// Set augmentation.
    pub augmentation: Augmentation,
    /// Mask weight override.
    pub mask_weight: Option<usize>,
    /// Compute cap override.
    pub compute_cap: Option<u128>,
    /// Listen address.
    pub listen: Option<String>,
    /// Bob's address.
    pub connect: Option<String>,
    /// Dealer address.
    pub dealer: Option<String>,
    /// Seed.
    pub seed: u64,
    /// Alice's input.
    pub in_a: Option<PathBuf>,
    /// Bob's input.
    pub in_b: Option<PathBuf>,
    /// Output directory.
    pub out: Option<PathBuf>,
}

fn required<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing {what}")))
}

impl RunConfig {
    /// Merges flags with the optional config file and checks the result.
    pub fn resolve(args: RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => {
                ConfigFile::parse(&fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)?
            }
            None => ConfigFile::default(),
        };
        if let Some(k) = file.keys().find(|k| !CONFIG_KEYS.contains(k)) {
            return Err(CliError::Config(format!("unknown config key `{k}`")));
        }
        let role: Option<Role> = file.pick(args.role, "role")?.or(file.pick(None, "mode")?);
        let d: Option<u64> = file.pick(args.d, "d")?.or(file.pick(None, "threshold")?);
        let cfg = Self {
            protocol: required(file.pick(args.protocol, "protocol")?, "--protocol")?,
            role: role.unwrap_or(Role::Both),
            d: required(d, "--d")?,
            fpr: file.pick(args.fpr, "fpr")?.unwrap_or(0.1),
            ell: file.pick(args.ell, "ell")?,
            big_t: file.pick(args.big_t, "T")?.unwrap_or(16),
            t: file.pick(args.t, "t")?.unwrap_or(2),
            bit_len: file.pick(args.bit_len, "L")?.unwrap_or(DEFAULT_MAX_BIT_LEN),
            backend: file.pick(args.backend, "backend")?.map_or(Backend::default(), Backend::from),
            augmentation: file.pick(args.augmentation, "augmentation")?.map_or(Augmentation::default(), Into::into),
            mask_weight: file.pick(args.mask_weight, "mask-weight")?,
            compute_cap: file.pick(args.compute_cap, "compute-cap")?,
            listen: file.pick(args.listen, "listen")?,
            connect: file.pick(args.connect, "connect")?,
            dealer: file.pick(args.dealer, "dealer")?,
            seed: file.pick(args.seed, "seed")?.unwrap_or(0),
            in_a: file.pick(args.in_a, "in-a")?,
            in_b: file.pick(args.in_b, "in-b")?,
            out: file.pick(args.out, "out")?,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(CliError::Config(format!("missing {what}"))) };
        match self.protocol {
            Protocol::Intpsi => {
                IntParams::new(self.d, self.bit_len)?;
            }
            Protocol::Hampsi => {
                if !(self.fpr > 0.0 && self.fpr < 0.5) {
                    return Err(CliError::Config(format!("--fpr must lie in (0, 0.5), got {}", self.fpr)));
                }
            }
            Protocol::HampsiSample => {
                if self.t == 0 || self.t > self.big_t {
                    return Err(CliError::Config(format!("need 0 < t <= T, got t = {}, T = {}", self.t, self.big_t)));
                }
            }
        }
        let hamming = self.protocol != Protocol::Intpsi;
        match self.role {
            Role::Both => {
                need(self.in_a.is_some(), "--in-a")?;
                need(self.in_b.is_some(), "--in-b")
            }
            Role::Alice => {
                need(self.in_a.is_some(), "--in-a")?;
                need(self.connect.is_some(), "--connect")?;
                need(!hamming || self.dealer.is_some(), "--dealer")
            }
            Role::Bob => {
                need(self.in_b.is_some(), "--in-b")?;
                need(self.listen.is_some(), "--listen")?;
                need(!hamming || self.dealer.is_some(), "--dealer")
            }
            Role::Dealer => {
                need(hamming, "a Hamming protocol (integer PSI has no dealer)")?;
                need(self.listen.is_some(), "--listen")
            }
        }
    }

    fn int_params(&self) -> Result<IntParams, CliError> {
        Ok(IntParams::new(self.d, self.bit_len)?)
    }

    fn ell_of(&self, sets: &[&[BitVector]]) -> Result<usize, CliError> {
        let inferred = sets.iter().find_map(|s| s.first()).map(BitVector::len);
        match (self.ell, inferred) {
            (Some(l), Some(i)) if l != i => {
                Err(CliError::Config(format!("--ell {l} but input vectors have length {i}")))
            }
            (Some(l), _) | (None, Some(l)) => Ok(l),
            (None, None) => Err(CliError::Config("cannot infer --ell from empty inputs".into())),
        }
    }

    fn ham_params(&self, ell: usize) -> Result<HamParams, CliError> {
        Ok(HamParams::new(ell, self.d as usize, self.fpr)?)
    }

    fn sample_config(&self, ell: usize) -> SampleConfig {
        let mut c = SampleConfig::new(ell, self.big_t, self.t);
        if let Some(w) = self.mask_weight {
            c.mask_weight = w;
        }
        if let Some(cap) = self.compute_cap {
            c.compute_cap = cap;
        }
        c
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutput {
    /// Matched pairs: values for integer PSI, indices for Hamming PSI.
    pub pairs: Vec<(u64, u64)>,
    /// Traffic seen by this process.
    pub transcript: Transcript,
    /// Free-form summary line.
    pub note: Option<String>,
}

impl fmt::Display for RunOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\n{}", pairs_csv(&self.pairs), phase_report(&self.transcript))?;
        if let Some(n) = &self.note {
            writeln!(f, "# {n}")?;
        }
        Ok(())
    }
}

fn index_pairs(p: &[(usize, usize)]) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = p.iter().map(|&(i, j)| (i as u64, j as u64)).collect();
    out.sort_unstable();
    out
}

/// Executes a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let out = match cfg.role {
        Role::Both => run_both(cfg)?,
        Role::Alice => run_party(cfg, true)?,
        Role::Bob => run_party(cfg, false)?,
        Role::Dealer => run_dealer_endpoint(cfg)?,
    };
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        write_file(&dir.join("pairs.csv"), pairs_csv(&out.pairs).as_bytes())?;
        write_file(&dir.join("phases.csv"), phase_report(&out.transcript).as_bytes())?;
    }
    Ok(out)
}

fn run_both(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (pa, pb) = (cfg.in_a.as_deref().expect("checked"), cfg.in_b.as_deref().expect("checked"));
    match cfg.protocol {
        Protocol::Intpsi => {
            let (a, b) = (read_int_set(pa)?, read_int_set(pb)?);
            let run = intpsi::int_psi(&a, &b, &cfg.int_params()?, cfg.backend, cfg.augmentation, cfg.seed)?;
            Ok(RunOutput { pairs: run.pairs, transcript: run.transcript, note: None })
        }
        Protocol::Hampsi => {
            let (a, b) = (read_vector_set(pa)?, read_vector_set(pb)?);
            let params = cfg.ham_params(cfg.ell_of(&[&a, &b])?)?;
            let run = hamming::ham_psi(&a, &b, &params, cfg.seed)?;
            let note = format!(
                "bins = {}, recovered = {}, rejected = {}",
                params.n_bins,
                run.alice.hits.len(),
                run.alice.rejected.len()
            );
            Ok(RunOutput { pairs: index_pairs(&run.pairs), transcript: run.transcript, note: Some(note) })
        }
        Protocol::HampsiSample => {
            let (a, b) = (read_vector_set(pa)?, read_vector_set(pb)?);
            let sc = cfg.sample_config(cfg.ell_of(&[&a, &b])?);
            let run = hamming::ham_psi_sample(&a, &b, &sc, cfg.seed)?;
            Ok(RunOutput { pairs: index_pairs(&run.pairs), transcript: run.transcript, note: None })
        }
    }
}

fn hello(ch: &mut dyn Channel, name: &str) -> Result<(), CliError> {
    ch.set_phase("connect");
    ch.send(Tag::Raw, name.as_bytes())?;
    Ok(())
}

fn open_link(cfg: &RunConfig, alice: bool) -> Result<Link, CliError> {
    let (me, other) = if alice { ("alice", "bob") } else { ("bob", "alice") };
    let peer = if alice {
        TcpChannel::connect(cfg.connect.as_deref().expect("checked"), me, other, CONNECT_TIMEOUT)?
    } else {
        let addr = cfg.listen.as_deref().expect("checked");
        let listener = TcpListener::bind(addr).map_err(|e| CliError::Io(format!("bind {addr}: {e}")))?;
        TcpChannel::accept(&listener, me, other)?
    };
    let dealer = match (&cfg.dealer, cfg.protocol) {
        (Some(addr), Protocol::Hampsi | Protocol::HampsiSample) => {
            let mut ch = TcpChannel::connect(addr.as_str(), me, "dealer", CONNECT_TIMEOUT)?;
            hello(&mut ch, me)?;
            Some(Box::new(ch) as Box<dyn Channel>)
        }
        _ => None,
    };
    Ok(Link::new(Box::new(peer), dealer))
}

fn run_party(cfg: &RunConfig, alice: bool) -> Result<RunOutput, CliError> {
    let input = if alice { cfg.in_a.as_deref() } else { cfg.in_b.as_deref() }.expect("checked");
    let mut rng = party_rng(cfg.seed, if alice { "alice" } else { "bob" });
    // Inputs are read before connecting so a bad file never leaves the peer waiting.
    match cfg.protocol {
        Protocol::Intpsi => {
            let set = read_int_set(input)?;
            let params = cfg.int_params()?;
            let mut link = open_link(cfg, alice)?;
            let pairs = if alice {
                intpsi::int_psi_alice(&mut link, &set, &params, cfg.backend, cfg.augmentation, &mut rng)?
            } else {
                intpsi::int_psi_bob(&mut link, &set, &params, cfg.backend, cfg.augmentation, &mut rng)?
            };
            Ok(RunOutput { pairs, transcript: link.transcript(), note: None })
        }
        Protocol::Hampsi => {
            let set = read_vector_set(input)?;
            let params = cfg.ham_params(cfg.ell_of(&[&set])?)?;
            let mut link = open_link(cfg, alice)?;
            let pairs = if alice {
                let o = hamming::ham_psi_alice(&mut link, &set, &params, &mut rng)?;
                o.matches.iter().map(|m| (m.i, m.j)).collect::<Vec<_>>()
            } else {
                hamming::ham_psi_bob(&mut link, &set, &params, &mut rng)?.released
            };
            Ok(RunOutput { pairs: index_pairs(&pairs), transcript: link.transcript(), note: None })
        }
        Protocol::HampsiSample => {
            let set = read_vector_set(input)?;
            let sc = cfg.sample_config(cfg.ell_of(&[&set])?);
            let mut link = open_link(cfg, alice)?;
            let pairs = if alice {
                let m = hamming::ham_psi_sample_alice(&mut link, &set, &sc, &mut rng)?;
                m.iter().map(|m| (m.i, m.j)).collect::<Vec<_>>()
            } else {
                hamming::ham_psi_sample_bob(&mut link, &set, &sc, &mut rng)?.1
            };
            Ok(RunOutput { pairs: index_pairs(&pairs), transcript: link.transcript(), note: None })
        }
    }
}

fn run_dealer_endpoint(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let addr = cfg.listen.as_deref().expect("checked");
    let listener = TcpListener::bind(addr).map_err(|e| CliError::Io(format!("bind {addr}: {e}")))?;
    let (mut alice, mut bob) = (None, None);
    while alice.is_none() || bob.is_none() {
        let mut ch = TcpChannel::accept(&listener, "dealer", "party")?;
        ch.set_phase("connect");
        let name = ch.recv_expect(Tag::Raw)?;
        let slot = match name.as_slice() {
            b"alice" => &mut alice,
            b"bob" => &mut bob,
            _ => return Err(CliError::Protocol("unknown party at the dealer".into())),
        };
        if slot.replace(ch).is_some() {
            return Err(CliError::Protocol("party connected to the dealer twice".into()));
        }
    }
    let (mut alice, mut bob) = (alice.expect("loop exit"), bob.expect("loop exit"));
    let stats = run_dealer(&mut alice, &mut bob)?;
    let mut transcript = alice.transcript().clone();
    transcript.merge(bob.transcript());
    let note = format!(
        "vole batches = {}, ole evaluations = {}, subsample requests = {}",
        stats.vole_batches, stats.ole_evaluations, stats.subsample_requests
    );
    Ok(RunOutput { pairs: Vec::new(), transcript, note: Some(note) })
}
