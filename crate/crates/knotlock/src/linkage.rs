//! Framed links: composing two carriers side by side and the multiplicative
//! invariant `N_link = N_A * N_B`, which holds exactly when the two knots
//! share no prime factor.

use crate::braid::{standard_carrier, FramedBraid, Generator};
use crate::codec::{self, CodecError, EncodedPackage, EncodingPayload};
use crate::numeric::{self, BigReal, Integer};
use rug::Complete;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkageError {
    #[error("prime {0} appears on both sides of the link")]
    PrimeCollision(Integer),
    #[error("both sides of a link must use the same alpha")]
    AlphaMismatch,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// A composed link: the union carrier plus the combined invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedPackage {
    carrier: FramedBraid,
    n_link: Integer,
    m_link: u32,
    beta_link: BigReal,
}

impl LinkedPackage {
    pub fn carrier(&self) -> &FramedBraid {
        &self.carrier
    }

    pub fn n_link(&self) -> &Integer {
        &self.n_link
    }

    pub fn m_link(&self) -> u32 {
        self.m_link
    }

    /// beta'' rendered at the link's contract precision.
    pub fn beta_link(&self) -> &BigReal {
        &self.beta_link
    }
}

/// Side-by-side union: `b`'s generator indices shift up by `a`'s strand
/// count, framing vectors concatenate, and the closure components are the
/// union of both closures' components.
pub fn disjoint_union(a: &FramedBraid, b: &FramedBraid) -> FramedBraid {
    let strands = a.strands() + b.strands();
    let mut word = a.word().to_vec();
    word.extend(
        b.word()
            .iter()
            .map(|g| Generator::new(g.index() + a.strands(), g.sign())),
    );
    let mut framing = a.framing().to_vec();
    framing.extend_from_slice(b.framing());
    FramedBraid::new(strands, word, framing).expect("shifted indices stay in range")
}

/// Inserts `pairs` trivial crossing pairs `sigma_at sigma_at^-1` into the
/// word. Purely cosmetic: the permutation and every closure invariant are
/// untouched, but a link carrier stops looking like two unrelated braids.
pub fn interleave(
    braid: &FramedBraid,
    at: u32,
    pairs: u32,
) -> Result<FramedBraid, crate::braid::BraidError> {
    let mut word = braid.word().to_vec();
    for _ in 0..pairs {
        word.push(Generator::positive(at));
        word.push(Generator::negative(at));
    }
    FramedBraid::new(braid.strands(), word, braid.framing().to_vec())
}

/// Compose package A with payload B into a framed link.
///
/// The prime sets must be disjoint; this is checked eagerly because a
/// collision would only surface much later as a failed power-of-alpha check
/// on the decode side. The A-side carrier is synthesized from the decoded
/// payload (an equivalent braid representation, which is all the closure
/// determines anyway).
pub fn link_encode(
    pkg_a: &EncodedPackage,
    payload_b: &EncodingPayload,
) -> Result<LinkedPackage, LinkageError> {
    let alpha = pkg_a.alpha();
    if payload_b.alpha() != alpha {
        return Err(LinkageError::AlphaMismatch);
    }
    let payload_a = codec::decode(pkg_a.n(), alpha)?;
    for p in payload_b.primes() {
        if payload_a.primes().any(|q| q == p) {
            return Err(LinkageError::PrimeCollision(p.clone()));
        }
    }
    let pkg_b = codec::encode(payload_b)?;
    let carrier_a = standard_carrier(&payload_a.twists());
    let carrier_b = standard_carrier(&payload_b.twists());
    let carrier = disjoint_union(&carrier_a, &carrier_b);

    let n_link = (pkg_a.n() * pkg_b.n()).complete();
    let m_link = pkg_a.m() + pkg_b.m();
    let precision = codec::contract_precision(&n_link, alpha, m_link)?;
    let beta_link = numeric::real_root_tower(&n_link, alpha, m_link, precision);
    Ok(LinkedPackage {
        carrier,
        n_link,
        m_link,
        beta_link,
    })
}
