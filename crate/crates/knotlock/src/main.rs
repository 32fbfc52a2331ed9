//! Command-line interface: encode/decode on the spot, run either side of a
//! challenge-response session from config files, re-randomize a carrier, or
//! drive full sessions over TCP.
//!
//! Exit codes: 0 success/accepted, 1 protocol rejection, 2 usage or input
//! errors, 3 transport failures.

use clap::{Parser, Subcommand};
use knotlock::codec::{self, EncodingPayload};
use knotlock::harness::{self, PartyConfig, SessionTranscript, ADDR_ENV_VAR};
use knotlock::numeric::Integer;
use knotlock::protocol::PartyState;
use knotlock::wire::{self, WireMessage};
use std::io::Read;
use std::net::TcpListener;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "knotlock",
    version,
    about = "prime-factorization messaging over framed braids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode primes and twist counts; prints N, M and beta.
    Encode {
        /// Comma-separated distinct primes, one per strand (e.g. 2,3)
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<Integer>,
        /// Comma-separated half-twist counts, one per strand (e.g. 3,1)
        #[arg(long, value_delimiter = ',', required = true)]
        twists: Vec<u32>,
        #[arg(long)]
        alpha: u32,
        /// Also print the SHARE wire document.
        #[arg(long)]
        emit: bool,
    },
    /// Factor an encoded invariant back into (prime, twists) pairs.
    Decode {
        #[arg(long)]
        n: Integer,
        #[arg(long)]
        alpha: u32,
    },
    /// Build a CHALLENGE document from a config file.
    Challenge {
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Answer a CHALLENGE document (path or - for stdin) with a RESPONSE.
    Respond {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify a RESPONSE document against the challenger's own config.
    Verify {
        #[arg(long = "in")]
        input: String,
        /// The challenger's config file (holds the private key material).
        #[arg(long)]
        state: String,
    },
    /// Re-emit a document with its carrier braid obfuscated.
    Equiv {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        moves: u32,
        #[arg(long)]
        seed: u64,
    },
    /// Serve challenge-response sessions over TCP (challenger side).
    Serve {
        /// addr:port; defaults to $KNOTLOCK_ADDR
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stop after this many sessions (serves forever when omitted).
        #[arg(long)]
        sessions: Option<usize>,
    },
    /// Connect to a serving challenger and respond (responder side).
    Connect {
        /// addr:port; defaults to $KNOTLOCK_ADDR
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum CliError {
    Usage(String),
    Rejected(String),
    Transport(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Rejected(_) => 1,
            CliError::Transport(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Rejected(m) | CliError::Transport(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Usage(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))
    }
}

fn load_config(path: &str) -> Result<PartyConfig, CliError> {
    PartyConfig::parse(&read_input(path)?)
        .map_err(|e| CliError::Usage(format!("config {path}: {e}")))
}

fn resolve_addr(flag: Option<String>, what: &str) -> Result<String, CliError> {
    flag.or_else(|| std::env::var(ADDR_ENV_VAR).ok())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "no {what} address: pass the flag or set {ADDR_ENV_VAR}"
            ))
        })
}

fn print_transcript(t: &SessionTranscript) {
    for e in &t.entries {
        let arrow = match e.direction {
            harness::Direction::ChallengerToResponder => "-> responder",
            harness::Direction::ResponderToChallenger => "-> challenger",
        };
        println!("# {arrow}");
        print!("{}", e.document);
    }
    match &t.outcome {
        harness::SessionOutcome::Verdict(v) => {
            println!("# outcome: {}", wire::reason_token(v.reason()))
        }
        harness::SessionOutcome::Failed(msg) => println!("# outcome: failed: {msg}"),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode {
            primes,
            twists,
            alpha,
            emit,
        } => {
            if primes.len() != twists.len() {
                return Err(CliError::Usage(
                    "--primes and --twists must list the same number of values".into(),
                ));
            }
            let payload = EncodingPayload::new(primes.into_iter().zip(twists).collect(), alpha)
                .map_err(usage)?;
            let pkg = codec::encode(&payload).map_err(usage)?;
            if pkg.m() % 2 != 0 {
                eprintln!(
                    "note: M={} is odd; the closed ribbon is a non-orientable surface",
                    pkg.m()
                );
            }
            println!(
                "N={} M={} beta={}",
                pkg.n(),
                pkg.m(),
                pkg.beta().decimal().to_wire_string()
            );
            if emit {
                let mut party = PartyState::challenger(payload, 0).map_err(usage)?;
                let msg = party.make_share(0);
                print!("{}", wire::emit(&WireMessage::Share(msg)));
            }
            Ok(())
        }
        Command::Decode { n, alpha } => {
            let payload = codec::decode(&n, alpha).map_err(usage)?;
            let rendered: Vec<String> = payload
                .entries()
                .iter()
                .map(|(p, d)| format!("({p},{d})"))
                .collect();
            println!("{}", rendered.join(" "));
            Ok(())
        }
        Command::Challenge { config, seed } => {
            let cfg = load_config(&config)?;
            let payload = cfg.to_payload().map_err(usage)?;
            let mut party = PartyState::challenger(payload, cfg.moves()).map_err(usage)?;
            let msg = party
                .make_challenge(seed.or(cfg.seed).unwrap_or(0))
                .map_err(usage)?;
            if !msg.carrier.is_orientable() {
                eprintln!("note: carrier M is odd; the closed ribbon is a non-orientable surface");
            }
            print!("{}", wire::emit(&WireMessage::Share(msg)));
            Ok(())
        }
        Command::Respond {
            input,
            config,
            seed,
        } => {
            let doc = read_input(&input)?;
            let challenge = match wire::parse(&doc).map_err(usage)? {
                WireMessage::Share(share) => share,
                other => {
                    return Err(CliError::Usage(format!(
                        "expected a SHARE/CHALLENGE document, found {other:?}"
                    )))
                }
            };
            let cfg = load_config(&config)?;
            let payload = cfg.to_payload().map_err(usage)?;
            let mut party = PartyState::responder(payload, cfg.moves()).map_err(usage)?;
            let response = party
                .respond(&challenge, seed.or(cfg.seed).unwrap_or(0))
                .map_err(|e| CliError::Rejected(e.to_string()))?;
            print!("{}", wire::emit(&WireMessage::Response(response)));
            Ok(())
        }
        Command::Verify { input, state } => {
            let doc = read_input(&input)?;
            let response = match wire::parse(&doc).map_err(usage)? {
                WireMessage::Response(r) => r,
                other => {
                    return Err(CliError::Usage(format!(
                        "expected a RESPONSE document, found {other:?}"
                    )))
                }
            };
            let cfg = load_config(&state)?;
            let payload = cfg.to_payload().map_err(usage)?;
            let mut party = PartyState::challenger(payload, cfg.moves()).map_err(usage)?;
            let verdict = party.verify(&response);
            print!("{}", wire::emit(&WireMessage::Verdict(verdict)));
            if verdict.accepted() {
                Ok(())
            } else {
                Err(CliError::Rejected(format!(
                    "rejected: {}",
                    wire::reason_token(verdict.reason())
                )))
            }
        }
        Command::Equiv { input, moves, seed } => {
            let doc = read_input(&input)?;
            let reissued = match wire::parse(&doc).map_err(usage)? {
                WireMessage::Share(mut share) => {
                    share.carrier = share.carrier.obfuscate(seed, moves);
                    WireMessage::Share(share)
                }
                WireMessage::Response(mut resp) => {
                    resp.link_carrier = resp.link_carrier.obfuscate(seed, moves);
                    WireMessage::Response(resp)
                }
                WireMessage::Verdict(_) => {
                    return Err(CliError::Usage(
                        "a VERDICT document carries no braid to obfuscate".into(),
                    ))
                }
            };
            print!("{}", wire::emit(&reissued));
            Ok(())
        }
        Command::Serve {
            listen,
            config,
            seed,
            sessions,
        } => {
            let addr = resolve_addr(listen, "listen")?;
            let cfg = load_config(&config)?;
            let listener = TcpListener::bind(&addr)
                .map_err(|e| CliError::Transport(format!("bind {addr}: {e}")))?;
            eprintln!("listening on {}", listener.local_addr().unwrap());
            harness::serve(listener, &cfg, seed, sessions, |t| print_transcript(&t))
                .map_err(|e| CliError::Transport(e.to_string()))?;
            Ok(())
        }
        Command::Connect { to, config, seed } => {
            let addr = resolve_addr(to, "connect")?;
            let cfg = load_config(&config)?;
            let transcript = harness::connect(&addr, &cfg, seed)
                .map_err(|e| CliError::Transport(e.to_string()))?;
            print_transcript(&transcript);
            match &transcript.outcome {
                harness::SessionOutcome::Verdict(v) if v.accepted() => Ok(()),
                harness::SessionOutcome::Verdict(v) => Err(CliError::Rejected(format!(
                    "rejected: {}",
                    wire::reason_token(v.reason())
                ))),
                harness::SessionOutcome::Failed(msg) => {
                    Err(CliError::Rejected(format!("session failed: {msg}")))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("knotlock: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
