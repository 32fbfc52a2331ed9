//! One-off randomized soak of the transmission contract (not part of CI).

use knotlock::codec::{self, CodecError, EncodingPayload, PRECISION_GUARD_DIGITS};

struct Rng(u64);
impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    fn below(&mut self, b: u64) -> u64 {
        self.next() % b
    }
}

fn sieve(bound: usize) -> Vec<u64> {
    let mut c = vec![false; bound];
    let mut p = Vec::new();
    for i in 2..bound {
        if !c[i] {
            p.push(i as u64);
            let mut j = i * i;
            while j < bound {
                c[j] = true;
                j += i;
            }
        }
    }
    p
}

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| {
            let s = s.trim();
            match s.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16).ok(),
                None => s.parse().ok(),
            }
        })
        .unwrap_or(0xD15EA5E);
    let count: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(800);
    let primes = sieve(10_000);
    let mut rng = Rng(seed);
    let mut max_digits = 0usize;
    for case in 0..count {
        let strands = 1 + rng.below(6) as usize;
        let alpha = [2u32, 3, 5][rng.below(3) as usize];
        let mut picked: Vec<u64> = Vec::new();
        while picked.len() < strands {
            let p = primes[rng.below(primes.len() as u64) as usize];
            if !picked.contains(&p) {
                picked.push(p);
            }
        }
        // quarter of the cases force the degenerate all-zero twist family
        let twists: Vec<u32> = if case % 4 == 0 {
            vec![0; strands]
        } else {
            (0..strands).map(|_| rng.below(7) as u32).collect()
        };
        let payload = EncodingPayload::from_u64_primes(&picked, &twists, alpha).unwrap();
        let pkg = codec::encode(&payload).unwrap();
        let beta = pkg.beta().decimal();
        max_digits = max_digits.max(pkg.n().to_string().len());

        let n = codec::reconstruct_n(alpha, beta, pkg.m()).expect("honest reconstruct");
        assert_eq!(&n, pkg.n(), "case {case}: wrong N");
        assert_eq!(
            codec::decode(&n, alpha).unwrap(),
            payload,
            "case {case}: decode"
        );

        let contract = beta.precision();
        let threshold = contract - PRECISION_GUARD_DIGITS;
        for keep in [threshold.saturating_sub(1), threshold / 2, 6, 1] {
            if keep < 1 || keep >= threshold {
                continue;
            }
            let trunc = beta.truncate_digits(keep);
            match codec::reconstruct_n(alpha, &trunc, pkg.m()) {
                Err(CodecError::PrecisionBreach) => {}
                Ok(v) => panic!(
                    "case {case}: keep={keep} (threshold {threshold}) returned {} (true N has {} digits)",
                    v, pkg.n().to_string().len()
                ),
                Err(e) => panic!("case {case}: unexpected error {e}"),
            }
        }
        // wrong-M probes: the framing tamper surface
        for dm in [-1i64, 1, 3] {
            let m2 = pkg.m() as i64 + dm;
            if m2 < 0 {
                continue;
            }
            match codec::reconstruct_n(alpha, beta, m2 as u32) {
                Err(_) => {}
                Ok(v) => {
                    // a wrong M may legitimately reconstruct some OTHER integer
                    // (e.g. a perfect alpha-th power); it must never equal N
                    assert_ne!(&v, pkg.n(), "case {case}: dm={dm} reproduced N");
                }
            }
        }
    }
    println!("soak OK: {count} cases, seed {seed:#x}, largest N had {max_digits} digits");
}
