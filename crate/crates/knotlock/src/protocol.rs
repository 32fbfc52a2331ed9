//! Party state machines for the two exchanges: plain sharing (send a framed
//! knot plus `(alpha, beta)`, receiver decodes) and challenge-response
//! authentication (responder links a second knot, verifier checks the
//! multiplicative invariant and a Fermat-Euler witness).
//!
//! The totients `phi(N_A)` and `phi(N_B)` act as private keys: they are
//! computed locally from each party's own payload and never serialized into
//! any outbound message.

use crate::braid::{standard_carrier, FramedBraid};
use crate::codec::{self, CodecError, EncodedPackage, EncodingPayload};
use crate::linkage::{self, LinkageError};
use crate::numeric::{gcd, mod_pow, smallest_coprime_prime, BigReal, Integer};
use crate::rng;
use rug::ops::Pow;
use rug::Complete;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Linkage(#[from] LinkageError),
    #[error("responder prime {0} collides with a challenger prime")]
    PrimeCollision(Integer),
    #[error("responder prime {prime} does not satisfy the bound p < N = {n}")]
    NoValidPrime { prime: Integer, n: Integer },
    #[error("challenge alpha {challenge} does not match this party's alpha {own}")]
    AlphaMismatch { challenge: u32, own: u32 },
    #[error("operation requires the {0:?} role")]
    WrongRole(Role),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Challenger,
    Responder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Sent,
    Done,
}

/// Message kind carried on the wire: the sharing scheme and the
/// authentication challenge use the same payload shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareKind {
    Share,
    Challenge,
}

/// A framed knot plus the pair `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareMessage {
    pub kind: ShareKind,
    pub carrier: FramedBraid,
    pub alpha: u32,
    pub beta: BigReal,
}

/// The responder's answer: the link carrier, `beta'` (his knot), `beta''`
/// (the link), and optionally the Fermat-Euler witness `gamma` with its base
/// `b`. When `gamma` is present `b` must be too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseMessage {
    pub link_carrier: FramedBraid,
    pub beta_prime: BigReal,
    pub beta_double_prime: BigReal,
    pub gamma: Option<Integer>,
    pub b: Option<Integer>,
}

/// Outcome of verification; `accepted` holds exactly when `reason` is `Ok`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    accepted: bool,
    reason: VerdictReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    Ok,
    NotDivisible,
    NotCoprime,
    GammaCheckFailed,
    PrecisionBreach,
    MalformedMessage,
}

impl Verdict {
    pub fn ok() -> Verdict {
        Verdict {
            accepted: true,
            reason: VerdictReason::Ok,
        }
    }

    pub fn reject(reason: VerdictReason) -> Verdict {
        assert!(
            reason != VerdictReason::Ok,
            "rejections need a failure reason"
        );
        Verdict {
            accepted: false,
            reason,
        }
    }

    pub fn accepted(&self) -> bool {
        self.accepted
    }

    pub fn reason(&self) -> VerdictReason {
        self.reason
    }
}

/// One party: its payload, the encoded package (own `N`, `M`, `beta`), the
/// private totient, and session bookkeeping.
#[derive(Debug, Clone)]
pub struct PartyState {
    role: Role,
    payload: EncodingPayload,
    package: EncodedPackage,
    phi: Integer,
    obfuscation_moves: u32,
    phase: Phase,
}

/// phi(N) for N = prod p^(alpha^d), straight from the payload:
/// prod p^(alpha^d - 1) * (p - 1). No factorization needed on one's own key.
fn phi_from_payload(payload: &EncodingPayload) -> Integer {
    let alpha = payload.alpha() as u64;
    let mut phi = Integer::from(1);
    for (p, d) in payload.entries() {
        let e = alpha.pow(*d) as u32;
        if e > 1 {
            phi *= p.pow(e - 1).complete();
        }
        phi *= (p - 1u32).complete();
    }
    phi
}

impl PartyState {
    pub fn challenger(
        payload: EncodingPayload,
        obfuscation_moves: u32,
    ) -> Result<Self, ProtocolError> {
        Self::new(Role::Challenger, payload, obfuscation_moves)
    }

    pub fn responder(
        payload: EncodingPayload,
        obfuscation_moves: u32,
    ) -> Result<Self, ProtocolError> {
        Self::new(Role::Responder, payload, obfuscation_moves)
    }

    fn new(
        role: Role,
        payload: EncodingPayload,
        obfuscation_moves: u32,
    ) -> Result<Self, ProtocolError> {
        let package = codec::encode(&payload)?;
        let phi = phi_from_payload(&payload);
        Ok(PartyState {
            role,
            payload,
            package,
            phi,
            obfuscation_moves,
            phase: Phase::Idle,
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn payload(&self) -> &EncodingPayload {
        &self.payload
    }

    pub fn package(&self) -> &EncodedPackage {
        &self.package
    }

    /// The private key. Not serialized anywhere; exposed for tests asserting
    /// exactly that.
    pub fn phi(&self) -> &Integer {
        &self.phi
    }

    fn build_share(&mut self, kind: ShareKind, seed: u64) -> ShareMessage {
        let carrier =
            standard_carrier(&self.payload.twists()).obfuscate(seed, self.obfuscation_moves);
        self.phase = Phase::Sent;
        ShareMessage {
            kind,
            carrier,
            alpha: self.package.alpha(),
            beta: self.package.beta().decimal().clone(),
        }
    }

    /// Plain sharing: emit the carrier knot and `(alpha, beta)`.
    pub fn make_share(&mut self, seed: u64) -> ShareMessage {
        self.build_share(ShareKind::Share, seed)
    }

    /// Open a challenge-response session (challenger role).
    pub fn make_challenge(&mut self, seed: u64) -> Result<ShareMessage, ProtocolError> {
        if self.role != Role::Challenger {
            return Err(ProtocolError::WrongRole(Role::Challenger));
        }
        Ok(self.build_share(ShareKind::Challenge, seed))
    }

    /// Answer a challenge (responder role): reconstruct the challenger's
    /// invariant, check the prime conditions, link the own knot onto it, and
    /// attach the Fermat-Euler witness.
    pub fn respond(
        &mut self,
        challenge: &ShareMessage,
        seed: u64,
    ) -> Result<ResponseMessage, ProtocolError> {
        if self.role != Role::Responder {
            return Err(ProtocolError::WrongRole(Role::Responder));
        }
        if challenge.alpha != self.payload.alpha() {
            return Err(ProtocolError::AlphaMismatch {
                challenge: challenge.alpha,
                own: self.payload.alpha(),
            });
        }
        let payload_a = share_decode(challenge)?;
        // local rejections before anything is sent
        for p in self.payload.primes() {
            if payload_a.primes().any(|q| q == p) {
                return Err(ProtocolError::PrimeCollision(p.clone()));
            }
        }
        let pkg_a = codec::encode(&payload_a)?;
        for p in self.payload.primes() {
            if p >= pkg_a.n() {
                return Err(ProtocolError::NoValidPrime {
                    prime: p.clone(),
                    n: pkg_a.n().clone(),
                });
            }
        }
        let link = linkage::link_encode(&pkg_a, &self.payload)?;
        let link_carrier = link
            .carrier()
            .obfuscate(rng::mix(seed, 0x11_4B), self.obfuscation_moves);
        let b = smallest_coprime_prime(link.n_link());
        let gamma = mod_pow(&b, &self.phi, link.n_link()).expect("modulus >= 2");
        self.phase = Phase::Sent;
        Ok(ResponseMessage {
            link_carrier,
            beta_prime: self.package.beta().decimal().clone(),
            beta_double_prime: link.beta_link().clone(),
            gamma: Some(gamma),
            b: Some(b),
        })
    }

    /// Verify a response against this challenger's own `N`, `M`, `phi`:
    /// reconstruct the link invariant from `beta''` and the carrier's total
    /// framing, require exact divisibility by the own invariant, cross-check
    /// `beta'` against the quotient, require coprimality, and check whichever
    /// witness fields are present.
    pub fn verify(&mut self, response: &ResponseMessage) -> Verdict {
        self.phase = Phase::Done;
        if response.gamma.is_some() != response.b.is_some() {
            return Verdict::reject(VerdictReason::MalformedMessage);
        }
        let alpha = self.package.alpha();
        let m_link = match u32::try_from(response.link_carrier.total_framing()) {
            Ok(m) => m,
            Err(_) => return Verdict::reject(VerdictReason::MalformedMessage),
        };
        let n_link = match codec::reconstruct_n(alpha, &response.beta_double_prime, m_link) {
            Ok(n) => n,
            Err(CodecError::PrecisionBreach) => {
                return Verdict::reject(VerdictReason::PrecisionBreach)
            }
            Err(_) => return Verdict::reject(VerdictReason::MalformedMessage),
        };
        // (2) own invariant must divide the link invariant exactly
        let (quotient, remainder) = n_link.clone().div_rem(self.package.n().clone());
        if remainder != 0 {
            return Verdict::reject(VerdictReason::NotDivisible);
        }
        // (3) the claimed beta' must describe the same quotient
        let m_b = match m_link.checked_sub(self.package.m()) {
            Some(m) => m,
            None => return Verdict::reject(VerdictReason::MalformedMessage),
        };
        match codec::reconstruct_n(alpha, &response.beta_prime, m_b) {
            Ok(n_b) if n_b == quotient => {}
            Ok(_) => return Verdict::reject(VerdictReason::MalformedMessage),
            Err(CodecError::PrecisionBreach) => {
                return Verdict::reject(VerdictReason::PrecisionBreach)
            }
            Err(_) => return Verdict::reject(VerdictReason::MalformedMessage),
        }
        // (4) no own prime may divide the quotient
        for p in self.payload.primes() {
            if quotient.is_divisible(p) {
                return Verdict::reject(VerdictReason::NotCoprime);
            }
        }
        // (5) Fermat-Euler fast path when the witness is present:
        // gamma = b^phi(N_B) mod N_link, so gamma^phi(N_A) = 1 mod N_link
        if let (Some(gamma), Some(b)) = (&response.gamma, &response.b) {
            if gcd(b, &n_link) != 1 {
                return Verdict::reject(VerdictReason::GammaCheckFailed);
            }
            match mod_pow(gamma, &self.phi, &n_link) {
                Ok(one) if one == 1 => {}
                _ => return Verdict::reject(VerdictReason::GammaCheckFailed),
            }
        }
        Verdict::ok()
    }
}

/// Decode a received share: `M` from the carrier's total framing, `N` via
/// the invariant, the payload via factorization.
pub fn share_decode(msg: &ShareMessage) -> Result<EncodingPayload, ProtocolError> {
    let m = u32::try_from(msg.carrier.total_framing())
        .map_err(|_| CodecError::TooLarge("carrier framing exceeds u32".into()))?;
    let n = codec::reconstruct_n(msg.alpha, &msg.beta, m)?;
    Ok(codec::decode(&n, msg.alpha)?)
}
