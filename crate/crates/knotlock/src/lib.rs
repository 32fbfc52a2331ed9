//! Secure information exchange and challenge-response authentication built on
//! framed braids.
//!
//! A message is a set of per-strand half-twist counts `{d_k}`. Assigning a
//! distinct prime `p_k` to each strand encodes the message in the natural
//! number `N = prod p_k^(alpha^d_k)`, which is transmitted indirectly as the
//! pair `(alpha, beta)` together with a framed braid carrying the total twist
//! count `M`: the receiver recovers `N = beta^(alpha^M)` and factors it.
//! Linking two such framed knots multiplies their invariants, which is the
//! basis of the challenge-response handshake implemented in [`protocol`]:
//! the verifier checks divisibility of the link invariant and, on the fast
//! path, a Fermat-Euler witness `gamma^phi(N_A) = 1 (mod N_link)`.
//!
//! Module map:
//! - [`braid`]: framed braids, closures, and invariant-preserving equivalence
//!   moves (conjugation, stabilization, twist slides, seeded obfuscation).
//! - [`numeric`]: arbitrary-precision naturals (factorization, totient,
//!   modular exponentiation) and decimal floating-point reals with explicit
//!   precision control.
//! - [`codec`]: the twist-vector <-> `(N, beta, M)` encoding itself.
//! - [`linkage`]: disjoint unions of carriers and the multiplicative link
//!   invariant.
//! - [`protocol`]: party state machines for sharing and challenge-response.
//! - [`wire`]: canonical text serialization of every protocol message.
//! - [`harness`]: loopback and TCP session runners plus transcripts.

pub mod braid;
pub mod codec;
pub mod harness;
pub mod linkage;
pub mod numeric;
pub mod protocol;
pub mod wire;

pub(crate) mod rng;
