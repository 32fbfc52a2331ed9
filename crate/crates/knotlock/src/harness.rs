//! Session harness: party configs, transcripts, an in-process loopback
//! runner, and a TCP runner where documents are self-delimiting via their
//! `END` line. Loopback and socket sessions with the same configs and seed
//! produce byte-identical document sequences.

use crate::codec::{CodecError, EncodingPayload};
use crate::protocol::{PartyState, Verdict};
use crate::rng;
use crate::wire::{self, WireError, WireMessage};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::time::SystemTime;
use thiserror::Error;

/// Default obfuscation move count when a config does not say otherwise.
pub const DEFAULT_MOVES: u32 = 16;

/// Environment variable consulted for a default listen/connect address.
pub const ADDR_ENV_VAR: &str = "KNOTLOCK_ADDR";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("config line {line}: {reason}")]
    BadConfig { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn bad_config(line: usize, reason: impl Into<String>) -> HarnessError {
    HarnessError::BadConfig {
        line,
        reason: reason.into(),
    }
}

/// One party's standing configuration, stored in the same line-oriented
/// grammar as the wire format:
///
/// ```text
/// %KNOTWIRE 1
/// TYPE CONFIG
/// PRIMES 2 3
/// TWISTS 3 1
/// ALPHA 2
/// SEED 7        (optional)
/// MOVES 16      (optional)
/// END
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyConfig {
    pub primes: Vec<crate::numeric::Integer>,
    pub twists: Vec<u32>,
    pub alpha: u32,
    pub seed: Option<u64>,
    pub moves: Option<u32>,
}

impl PartyConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut lines: Vec<&str> = text.split('\n').collect();
        if lines.pop() != Some("") {
            return Err(WireError::TruncatedDocument.into());
        }
        let mut it = lines.iter().enumerate().map(|(i, l)| (i + 1, *l));
        let (_, magic) = it.next().ok_or(WireError::TruncatedDocument)?;
        if magic != format!("{} {}", wire::MAGIC, wire::VERSION) {
            return Err(WireError::BadMagic.into());
        }
        let (no, ty) = it.next().ok_or(WireError::TruncatedDocument)?;
        if ty != "TYPE CONFIG" {
            return Err(bad_config(no, "expected TYPE CONFIG"));
        }
        let mut primes = None;
        let mut twists = None;
        let mut alpha = None;
        let mut seed = None;
        let mut moves = None;
        let mut ended = false;
        for (no, line) in it {
            if ended {
                return Err(bad_config(no, "content after END"));
            }
            if line == "END" {
                ended = true;
                continue;
            }
            let (key, rest) = line
                .split_once(' ')
                .ok_or_else(|| bad_config(no, "expected <KEY> <values>"))?;
            match key {
                "PRIMES" => {
                    let v: Result<Vec<_>, _> = rest
                        .split(' ')
                        .map(|t| {
                            t.parse::<crate::numeric::Integer>()
                                .map_err(|_| bad_config(no, format!("bad prime {t:?}")))
                        })
                        .collect();
                    primes = Some(v?);
                }
                "TWISTS" => {
                    let v: Result<Vec<_>, _> = rest
                        .split(' ')
                        .map(|t| {
                            t.parse::<u32>()
                                .map_err(|_| bad_config(no, format!("bad twist count {t:?}")))
                        })
                        .collect();
                    twists = Some(v?);
                }
                "ALPHA" => {
                    alpha = Some(
                        rest.parse::<u32>()
                            .map_err(|_| bad_config(no, "bad alpha"))?,
                    )
                }
                "SEED" => {
                    seed = Some(
                        rest.parse::<u64>()
                            .map_err(|_| bad_config(no, "bad seed"))?,
                    )
                }
                "MOVES" => {
                    moves = Some(
                        rest.parse::<u32>()
                            .map_err(|_| bad_config(no, "bad move count"))?,
                    )
                }
                other => return Err(bad_config(no, format!("unknown key {other:?}"))),
            }
        }
        if !ended {
            return Err(WireError::TruncatedDocument.into());
        }
        Ok(PartyConfig {
            primes: primes.ok_or_else(|| bad_config(0, "missing PRIMES"))?,
            twists: twists.ok_or_else(|| bad_config(0, "missing TWISTS"))?,
            alpha: alpha.ok_or_else(|| bad_config(0, "missing ALPHA"))?,
            seed,
            moves,
        })
    }

    pub fn emit(&self) -> String {
        use std::fmt::Write as _;
        let mut out = format!("{} {}\nTYPE CONFIG\n", wire::MAGIC, wire::VERSION);
        out.push_str("PRIMES");
        for p in &self.primes {
            write!(out, " {p}").unwrap();
        }
        out.push_str("\nTWISTS");
        for t in &self.twists {
            write!(out, " {t}").unwrap();
        }
        writeln!(out, "\nALPHA {}", self.alpha).unwrap();
        if let Some(seed) = self.seed {
            writeln!(out, "SEED {seed}").unwrap();
        }
        if let Some(moves) = self.moves {
            writeln!(out, "MOVES {moves}").unwrap();
        }
        out.push_str("END\n");
        out
    }

    pub fn to_payload(&self) -> Result<EncodingPayload, CodecError> {
        if self.primes.len() != self.twists.len() {
            return Err(CodecError::InvalidInput(
                "PRIMES and TWISTS must list the same number of values".into(),
            ));
        }
        EncodingPayload::new(
            self.primes
                .iter()
                .cloned()
                .zip(self.twists.iter().copied())
                .collect(),
            self.alpha,
        )
    }

    pub fn moves(&self) -> u32 {
        self.moves.unwrap_or(DEFAULT_MOVES)
    }

    /// The seed this party uses in a session: its own SEED line if present,
    /// otherwise a stream derived from the session seed and its role tag.
    pub fn effective_seed(&self, session_seed: u64, role_tag: u64) -> u64 {
        self.seed
            .unwrap_or_else(|| rng::mix(session_seed, role_tag))
    }
}

const CHALLENGER_TAG: u64 = 0xA11C;
const RESPONDER_TAG: u64 = 0xB0B0;

/// Direction of a transcript entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ChallengerToResponder,
    ResponderToChallenger,
}

#[derive(Debug, Clone)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub document: String,
    pub at: SystemTime,
}

/// How a session ended: a verdict delivered by the challenger, or a local
/// failure before any verdict was produced.
#[derive(Debug, Clone)]
pub enum SessionOutcome {
    Verdict(Verdict),
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct SessionTranscript {
    pub entries: Vec<TranscriptEntry>,
    pub outcome: SessionOutcome,
}

impl SessionTranscript {
    /// The determinism view: directions and document bytes, no timestamps.
    pub fn comparable(&self) -> Vec<(Direction, &str)> {
        self.entries
            .iter()
            .map(|e| (e.direction, e.document.as_str()))
            .collect()
    }

    pub fn accepted(&self) -> bool {
        matches!(&self.outcome, SessionOutcome::Verdict(v) if v.accepted())
    }
}

fn entry(direction: Direction, document: String) -> TranscriptEntry {
    TranscriptEntry {
        direction,
        document,
        at: SystemTime::now(),
    }
}

fn challenger_state(cfg: &PartyConfig) -> Result<PartyState, HarnessError> {
    let payload = cfg.to_payload()?;
    PartyState::challenger(payload, cfg.moves()).map_err(|e| HarnessError::BadConfig {
        line: 0,
        reason: e.to_string(),
    })
}

fn responder_state(cfg: &PartyConfig) -> Result<PartyState, HarnessError> {
    let payload = cfg.to_payload()?;
    PartyState::responder(payload, cfg.moves()).map_err(|e| HarnessError::BadConfig {
        line: 0,
        reason: e.to_string(),
    })
}

/// Run challenge -> response -> verdict entirely in process. Deterministic
/// in `(configs, seed)`.
pub fn run_loopback_session(
    alice: &PartyConfig,
    bob: &PartyConfig,
    seed: u64,
) -> Result<SessionTranscript, HarnessError> {
    let mut challenger = challenger_state(alice)?;
    let mut responder = responder_state(bob)?;
    let mut entries = Vec::new();

    let challenge = match challenger.make_challenge(alice.effective_seed(seed, CHALLENGER_TAG)) {
        Ok(c) => c,
        Err(e) => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed(format!("challenger: {e}")),
            })
        }
    };
    let challenge_doc = wire::emit(&WireMessage::Share(challenge.clone()));
    entries.push(entry(Direction::ChallengerToResponder, challenge_doc));

    let response = match responder.respond(&challenge, bob.effective_seed(seed, RESPONDER_TAG)) {
        Ok(r) => r,
        Err(e) => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed(format!("responder: {e}")),
            })
        }
    };
    let response_doc = wire::emit(&WireMessage::Response(response.clone()));
    entries.push(entry(Direction::ResponderToChallenger, response_doc));

    let verdict = challenger.verify(&response);
    let verdict_doc = wire::emit(&WireMessage::Verdict(verdict));
    entries.push(entry(Direction::ChallengerToResponder, verdict_doc));

    Ok(SessionTranscript {
        entries,
        outcome: SessionOutcome::Verdict(verdict),
    })
}

/// Read one `END`-delimited document from the stream. `Ok(None)` on a clean
/// EOF at a document boundary.
pub fn read_document<R: BufRead>(reader: &mut R) -> std::io::Result<Option<String>> {
    let mut doc = String::new();
    loop {
        let mut line = String::new();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            if doc.is_empty() {
                return Ok(None);
            }
            return Err(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "stream ended mid-document",
            ));
        }
        let is_end = line == "END\n" || line == "END";
        doc.push_str(&line);
        if is_end {
            if !doc.ends_with('\n') {
                doc.push('\n');
            }
            return Ok(Some(doc));
        }
    }
}

/// Drive one session as the challenger over a byte stream.
pub fn run_server_session<S: Read + Write>(
    stream: S,
    cfg: &PartyConfig,
    seed: u64,
) -> Result<SessionTranscript, HarnessError> {
    let mut challenger = challenger_state(cfg)?;
    let mut entries = Vec::new();
    let mut stream = BufReader::new(stream);

    let challenge = match challenger.make_challenge(cfg.effective_seed(seed, CHALLENGER_TAG)) {
        Ok(c) => c,
        Err(e) => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed(format!("challenger: {e}")),
            })
        }
    };
    let challenge_doc = wire::emit(&WireMessage::Share(challenge));
    stream.get_mut().write_all(challenge_doc.as_bytes())?;
    stream.get_mut().flush()?;
    entries.push(entry(Direction::ChallengerToResponder, challenge_doc));

    let response_doc = match read_document(&mut stream)? {
        Some(doc) => doc,
        None => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed("peer closed before responding".into()),
            })
        }
    };
    entries.push(entry(
        Direction::ResponderToChallenger,
        response_doc.clone(),
    ));
    let verdict = match wire::parse(&response_doc) {
        Ok(WireMessage::Response(response)) => challenger.verify(&response),
        Ok(_) => Verdict::reject(crate::protocol::VerdictReason::MalformedMessage),
        Err(_) => Verdict::reject(crate::protocol::VerdictReason::MalformedMessage),
    };
    let verdict_doc = wire::emit(&WireMessage::Verdict(verdict));
    stream.get_mut().write_all(verdict_doc.as_bytes())?;
    stream.get_mut().flush()?;
    entries.push(entry(Direction::ChallengerToResponder, verdict_doc));

    Ok(SessionTranscript {
        entries,
        outcome: SessionOutcome::Verdict(verdict),
    })
}

/// Drive one session as the responder over a byte stream.
pub fn run_client_session<S: Read + Write>(
    stream: S,
    cfg: &PartyConfig,
    seed: u64,
) -> Result<SessionTranscript, HarnessError> {
    let mut responder = responder_state(cfg)?;
    let mut entries = Vec::new();
    let mut stream = BufReader::new(stream);

    let challenge_doc = match read_document(&mut stream)? {
        Some(doc) => doc,
        None => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed("peer closed before challenging".into()),
            })
        }
    };
    entries.push(entry(
        Direction::ChallengerToResponder,
        challenge_doc.clone(),
    ));
    let challenge = match wire::parse(&challenge_doc) {
        Ok(WireMessage::Share(share)) => share,
        other => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed(format!("unexpected challenge: {other:?}")),
            })
        }
    };
    let response = match responder.respond(&challenge, cfg.effective_seed(seed, RESPONDER_TAG)) {
        Ok(r) => r,
        Err(e) => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed(format!("responder: {e}")),
            })
        }
    };
    let response_doc = wire::emit(&WireMessage::Response(response));
    stream.get_mut().write_all(response_doc.as_bytes())?;
    stream.get_mut().flush()?;
    entries.push(entry(Direction::ResponderToChallenger, response_doc));

    let verdict_doc = match read_document(&mut stream)? {
        Some(doc) => doc,
        None => {
            return Ok(SessionTranscript {
                entries,
                outcome: SessionOutcome::Failed("peer closed before the verdict".into()),
            })
        }
    };
    entries.push(entry(Direction::ChallengerToResponder, verdict_doc.clone()));
    match wire::parse(&verdict_doc) {
        Ok(WireMessage::Verdict(v)) => Ok(SessionTranscript {
            entries,
            outcome: SessionOutcome::Verdict(v),
        }),
        other => Ok(SessionTranscript {
            entries,
            outcome: SessionOutcome::Failed(format!("unexpected verdict: {other:?}")),
        }),
    }
}

/// Accept sessions on `listener`, one thread per connection, until
/// `max_sessions` have been accepted (or forever when `None`). Each
/// transcript is handed to `sink` as its session completes, so a
/// run-forever server still reports finished sessions; per-session failures
/// become transcripts with a `Failed` outcome rather than stopping the
/// server. Only listener-level errors abort.
pub fn serve<F: FnMut(SessionTranscript)>(
    listener: TcpListener,
    cfg: &PartyConfig,
    seed: u64,
    max_sessions: Option<usize>,
    mut sink: F,
) -> Result<(), HarnessError> {
    let (tx, rx) = std::sync::mpsc::channel();
    let mut accepted = 0usize;
    listener.set_nonblocking(true)?;
    loop {
        while let Ok(t) = rx.try_recv() {
            sink(t);
        }
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false)?;
                let cfg = cfg.clone();
                let tx = tx.clone();
                std::thread::spawn(move || {
                    let transcript = run_server_session(stream, &cfg, seed).unwrap_or_else(|e| {
                        SessionTranscript {
                            entries: Vec::new(),
                            outcome: SessionOutcome::Failed(e.to_string()),
                        }
                    });
                    let _ = tx.send(transcript);
                });
                accepted += 1;
                if let Some(max) = max_sessions {
                    if accepted >= max {
                        break;
                    }
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                std::thread::sleep(std::time::Duration::from_millis(25));
            }
            Err(e) => return Err(e.into()),
        }
    }
    drop(tx);
    for t in rx {
        sink(t);
    }
    Ok(())
}

/// [`serve`] collecting the transcripts into a vector; handy when the
/// session count is bounded.
pub fn serve_collect(
    listener: TcpListener,
    cfg: &PartyConfig,
    seed: u64,
    max_sessions: Option<usize>,
) -> Result<Vec<SessionTranscript>, HarnessError> {
    let mut transcripts = Vec::new();
    serve(listener, cfg, seed, max_sessions, |t| transcripts.push(t))?;
    Ok(transcripts)
}

/// Connect to a serving challenger and run one session as the responder.
pub fn connect<A: ToSocketAddrs>(
    addr: A,
    cfg: &PartyConfig,
    seed: u64,
) -> Result<SessionTranscript, HarnessError> {
    let stream = TcpStream::connect(addr)?;
    run_client_session(stream, cfg, seed)
}
