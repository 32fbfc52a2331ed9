//! Canonical text serialization of protocol messages.
//!
//! The format is line-oriented, UTF-8, LF-only, with fields in fixed order
//! and no trailing whitespace; `emit` followed by `parse` is the identity in
//! both directions on canonical documents. Grammar:
//!
//! ```text
//! %KNOTWIRE 1
//! TYPE SHARE|CHALLENGE|RESPONSE|VERDICT
//! BRAID s=<int>                  (SHARE/CHALLENGE/RESPONSE)
//! WORD <tok>...                  tokens +i / -i, 1-based; empty word: WORD -
//! FRAME <v>...                   non-negative integer or . for untwisted
//! ALPHA <int>                    (SHARE/CHALLENGE)
//! BETA <decimal> P=<digits>      (SHARE/CHALLENGE)
//! BETA1 <decimal> P=<digits>     (RESPONSE; beta')
//! BETA2 <decimal> P=<digits>     (RESPONSE; beta'')
//! GAMMA <int>                    (RESPONSE, optional)
//! B <int>                        (RESPONSE, optional, with GAMMA)
//! VERDICT <reason>               (VERDICT)
//! END
//! ```
//!
//! Decimals render the significand with an explicit decimal point, no
//! exponent, exactly P significant digits, rounded half-even when produced.
//! Parsing never re-rounds: the digits on the wire are the value.

use crate::braid::{FramedBraid, Framing, Generator, Sign};
use crate::numeric::{BigReal, Integer};
use crate::protocol::{ResponseMessage, ShareKind, ShareMessage, Verdict, VerdictReason};
use std::fmt::Write as _;
use thiserror::Error;

pub const MAGIC: &str = "%KNOTWIRE";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("document does not start with the {MAGIC} magic")]
    BadMagic,
    #[error("unsupported wire version {0}")]
    BadVersion(String),
    #[error("line {line}: {reason}")]
    BadField { line: usize, reason: String },
    #[error("document ended before END")]
    TruncatedDocument,
}

fn bad(line: usize, reason: impl Into<String>) -> WireError {
    WireError::BadField {
        line,
        reason: reason.into(),
    }
}

/// Any message that can travel on the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireMessage {
    Share(ShareMessage),
    Response(ResponseMessage),
    Verdict(Verdict),
}

pub fn reason_token(reason: VerdictReason) -> &'static str {
    match reason {
        VerdictReason::Ok => "OK",
        VerdictReason::NotDivisible => "NotDivisible",
        VerdictReason::NotCoprime => "NotCoprime",
        VerdictReason::GammaCheckFailed => "GammaCheckFailed",
        VerdictReason::PrecisionBreach => "PrecisionBreach",
        VerdictReason::MalformedMessage => "MalformedMessage",
    }
}

fn reason_from_token(tok: &str) -> Option<VerdictReason> {
    Some(match tok {
        "OK" => VerdictReason::Ok,
        "NotDivisible" => VerdictReason::NotDivisible,
        "NotCoprime" => VerdictReason::NotCoprime,
        "GammaCheckFailed" => VerdictReason::GammaCheckFailed,
        "PrecisionBreach" => VerdictReason::PrecisionBreach,
        "MalformedMessage" => VerdictReason::MalformedMessage,
        _ => return None,
    })
}

fn write_braid(out: &mut String, braid: &FramedBraid) {
    writeln!(out, "BRAID s={}", braid.strands()).unwrap();
    if braid.word().is_empty() {
        out.push_str("WORD -\n");
    } else {
        out.push_str("WORD");
        for g in braid.word() {
            let sign = match g.sign() {
                Sign::Positive => '+',
                Sign::Negative => '-',
            };
            write!(out, " {sign}{}", g.index()).unwrap();
        }
        out.push('\n');
    }
    out.push_str("FRAME");
    for f in braid.framing() {
        match f {
            Framing::Untwisted => out.push_str(" ."),
            Framing::Twists(d) => write!(out, " {d}").unwrap(),
        }
    }
    out.push('\n');
}

fn write_real(out: &mut String, field: &str, value: &BigReal) {
    writeln!(
        out,
        "{field} {} P={}",
        value.to_wire_string(),
        value.precision()
    )
    .unwrap();
}

/// Render a message as its canonical document (ends with `END` + newline).
pub fn emit(msg: &WireMessage) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    match msg {
        WireMessage::Share(share) => {
            let kind = match share.kind {
                ShareKind::Share => "SHARE",
                ShareKind::Challenge => "CHALLENGE",
            };
            writeln!(out, "TYPE {kind}").unwrap();
            write_braid(&mut out, &share.carrier);
            writeln!(out, "ALPHA {}", share.alpha).unwrap();
            write_real(&mut out, "BETA", &share.beta);
        }
        WireMessage::Response(resp) => {
            out.push_str("TYPE RESPONSE\n");
            write_braid(&mut out, &resp.link_carrier);
            write_real(&mut out, "BETA1", &resp.beta_prime);
            write_real(&mut out, "BETA2", &resp.beta_double_prime);
            if let Some(gamma) = &resp.gamma {
                writeln!(out, "GAMMA {gamma}").unwrap();
            }
            if let Some(b) = &resp.b {
                writeln!(out, "B {b}").unwrap();
            }
        }
        WireMessage::Verdict(verdict) => {
            out.push_str("TYPE VERDICT\n");
            writeln!(out, "VERDICT {}", reason_token(verdict.reason())).unwrap();
        }
    }
    out.push_str("END\n");
    out
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Result<Self, WireError> {
        // A canonical document is newline-terminated; split keeps an empty
        // tail element we drop here.
        let mut lines: Vec<&str> = text.split('\n').collect();
        match lines.pop() {
            Some("") => {}
            _ => return Err(WireError::TruncatedDocument),
        }
        Ok(Lines { lines, pos: 0 })
    }

    fn next(&mut self) -> Result<(usize, &'a str), WireError> {
        if self.pos >= self.lines.len() {
            return Err(WireError::TruncatedDocument);
        }
        let line = self.lines[self.pos];
        self.pos += 1;
        Ok((self.pos, line))
    }

    fn expect_end(&mut self) -> Result<(), WireError> {
        let (no, line) = self.next()?;
        if line != "END" {
            return Err(bad(no, format!("expected END, found {line:?}")));
        }
        if self.pos != self.lines.len() {
            return Err(bad(no + 1, "content after END"));
        }
        Ok(())
    }
}

fn parse_canonical_u32(s: &str, line: usize, what: &str) -> Result<u32, WireError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(line, format!("{what} must be a decimal integer")));
    }
    if s.len() > 1 && s.starts_with('0') {
        return Err(bad(line, format!("{what} has a leading zero")));
    }
    s.parse()
        .map_err(|_| bad(line, format!("{what} out of range")))
}

fn parse_canonical_integer(s: &str, line: usize, what: &str) -> Result<Integer, WireError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(line, format!("{what} must be a decimal integer")));
    }
    if s.len() > 1 && s.starts_with('0') {
        return Err(bad(line, format!("{what} has a leading zero")));
    }
    s.parse()
        .map_err(|_| bad(line, format!("{what} is not a valid integer")))
}

fn parse_braid(lines: &mut Lines) -> Result<FramedBraid, WireError> {
    let (no, line) = lines.next()?;
    let strands = line
        .strip_prefix("BRAID s=")
        .ok_or_else(|| bad(no, "expected BRAID s=<int>"))
        .and_then(|s| parse_canonical_u32(s, no, "strand count"))?;
    if strands < 1 {
        return Err(bad(no, "strand count must be at least 1"));
    }

    let (no, line) = lines.next()?;
    let body = line
        .strip_prefix("WORD")
        .ok_or_else(|| bad(no, "expected WORD"))?;
    let mut word = Vec::new();
    if body != " -" {
        if body.is_empty() {
            return Err(bad(no, "empty WORD line (use WORD - for no crossings)"));
        }
        for tok in body
            .strip_prefix(' ')
            .ok_or_else(|| bad(no, "malformed WORD"))?
            .split(' ')
        {
            let (sign, digits) = match tok.as_bytes().first() {
                Some(b'+') => (Sign::Positive, &tok[1..]),
                Some(b'-') => (Sign::Negative, &tok[1..]),
                _ => {
                    return Err(bad(
                        no,
                        format!("word token {tok:?} must start with + or -"),
                    ))
                }
            };
            let index = parse_canonical_u32(digits, no, "generator index")?;
            if index < 1 || index >= strands {
                return Err(bad(no, format!("generator index {index} out of range")));
            }
            word.push(Generator::new(index, sign));
        }
    }

    let (no, line) = lines.next()?;
    let body = line
        .strip_prefix("FRAME")
        .ok_or_else(|| bad(no, "expected FRAME"))?;
    let mut framing = Vec::new();
    if !body.is_empty() {
        for tok in body
            .strip_prefix(' ')
            .ok_or_else(|| bad(no, "malformed FRAME"))?
            .split(' ')
        {
            if tok == "." {
                framing.push(Framing::Untwisted);
            } else {
                framing.push(Framing::Twists(parse_canonical_u32(
                    tok,
                    no,
                    "framing value",
                )?));
            }
        }
    }
    if framing.len() != strands as usize {
        return Err(bad(
            no,
            format!(
                "FRAME lists {} values for {} strands",
                framing.len(),
                strands
            ),
        ));
    }
    FramedBraid::new(strands, word, framing).map_err(|e| bad(no, e.to_string()))
}

fn parse_real(lines: &mut Lines, field: &str) -> Result<BigReal, WireError> {
    let (no, line) = lines.next()?;
    let body = line
        .strip_prefix(field)
        .and_then(|s| s.strip_prefix(' '))
        .ok_or_else(|| bad(no, format!("expected {field}")))?;
    let (decimal, p) = body
        .split_once(" P=")
        .ok_or_else(|| bad(no, format!("{field} needs a P=<digits> suffix")))?;
    let precision = parse_canonical_u32(p, no, "precision")?;
    if precision < 1 {
        return Err(bad(no, "precision must be at least 1"));
    }
    BigReal::from_wire_string(decimal, precision).map_err(|e| bad(no, e))
}

/// Parse a canonical document back into a message.
pub fn parse(text: &str) -> Result<WireMessage, WireError> {
    let mut lines = Lines::new(text)?;
    let (_, first) = lines.next()?;
    match first.strip_prefix(MAGIC) {
        None => return Err(WireError::BadMagic),
        Some(rest) => {
            let version = rest.strip_prefix(' ').unwrap_or(rest);
            if version != "1" {
                return Err(WireError::BadVersion(version.to_string()));
            }
        }
    }
    let (no, line) = lines.next()?;
    let kind = line
        .strip_prefix("TYPE ")
        .ok_or_else(|| bad(no, "expected TYPE"))?;
    let msg = match kind {
        "SHARE" | "CHALLENGE" => {
            let carrier = parse_braid(&mut lines)?;
            let (no, line) = lines.next()?;
            let alpha = line
                .strip_prefix("ALPHA ")
                .ok_or_else(|| bad(no, "expected ALPHA"))
                .and_then(|s| parse_canonical_u32(s, no, "alpha"))?;
            if alpha < 2 {
                return Err(bad(no, "alpha must be at least 2"));
            }
            let beta = parse_real(&mut lines, "BETA")?;
            WireMessage::Share(ShareMessage {
                kind: if kind == "SHARE" {
                    ShareKind::Share
                } else {
                    ShareKind::Challenge
                },
                carrier,
                alpha,
                beta,
            })
        }
        "RESPONSE" => {
            let link_carrier = parse_braid(&mut lines)?;
            let beta_prime = parse_real(&mut lines, "BETA1")?;
            let beta_double_prime = parse_real(&mut lines, "BETA2")?;
            // optional trailing fields, fixed order
            let mut gamma = None;
            let mut b = None;
            let (no, line) = lines.next()?;
            let mut pending = Some((no, line));
            if let Some((no, line)) = pending {
                if let Some(rest) = line.strip_prefix("GAMMA ") {
                    gamma = Some(parse_canonical_integer(rest, no, "gamma")?);
                    pending = None;
                }
            }
            if pending.is_none() {
                let (no, line) = lines.next()?;
                pending = Some((no, line));
                if let Some(rest) = line.strip_prefix("B ") {
                    b = Some(parse_canonical_integer(rest, no, "witness base")?);
                    pending = None;
                }
            }
            if let Some((no, line)) = pending {
                if line != "END" {
                    return Err(bad(no, format!("unexpected line {line:?}")));
                }
                // push back the END for expect_end
                lines.pos -= 1;
            }
            if gamma.is_some() != b.is_some() {
                return Err(bad(lines.pos, "GAMMA and B must be present together"));
            }
            WireMessage::Response(ResponseMessage {
                link_carrier,
                beta_prime,
                beta_double_prime,
                gamma,
                b,
            })
        }
        "VERDICT" => {
            let (no, line) = lines.next()?;
            let tok = line
                .strip_prefix("VERDICT ")
                .ok_or_else(|| bad(no, "expected VERDICT"))?;
            let reason = reason_from_token(tok)
                .ok_or_else(|| bad(no, format!("unknown verdict reason {tok:?}")))?;
            let verdict = if reason == VerdictReason::Ok {
                Verdict::ok()
            } else {
                Verdict::reject(reason)
            };
            WireMessage::Verdict(verdict)
        }
        other => return Err(bad(no, format!("unknown message type {other:?}"))),
    };
    lines.expect_end()?;
    Ok(msg)
}
