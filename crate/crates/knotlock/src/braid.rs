//! Framed braids: signed Artin generator words, per-strand framings, closure
//! structure, and the equivalence moves that hide how half-twists are
//! distributed without changing any closure invariant.
//!
//! A braid on `s` strands is stored in normal form: the crossing word over
//! generators `sigma_1 .. sigma_(s-1)` plus a framing vector of per-strand
//! half-twist counters. Strand indices are 1-based throughout, matching the
//! generator subscripts.

use crate::rng::SplitMix64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BraidError {
    #[error("a braid needs at least one strand")]
    NoStrands,
    #[error("generator index {index} out of range for {strands} strands")]
    GeneratorOutOfRange { index: u32, strands: u32 },
    #[error("framing vector has {got} entries for {strands} strands")]
    FramingLengthMismatch { got: usize, strands: u32 },
    #[error("strand {strand} out of range for {strands} strands")]
    StrandOutOfRange { strand: u32, strands: u32 },
    #[error("strands {from} and {to} lie in different closure components")]
    DifferentComponents { from: u32, to: u32 },
    #[error("strand {strand} has no half-twist to slide")]
    NothingToSlide { strand: u32 },
}

/// Crossing direction of a single Artin generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// `sigma_index` or its inverse; `index` is 1-based and must stay below the
/// strand count of the braid that holds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generator {
    index: u32,
    sign: Sign,
}

impl Generator {
    pub fn new(index: u32, sign: Sign) -> Generator {
        assert!(index >= 1, "generator indices are 1-based");
        Generator { index, sign }
    }

    pub fn positive(index: u32) -> Generator {
        Generator::new(index, Sign::Positive)
    }

    pub fn negative(index: u32) -> Generator {
        Generator::new(index, Sign::Negative)
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn inverse(&self) -> Generator {
        Generator {
            index: self.index,
            sign: self.sign.flip(),
        }
    }
}

/// Per-strand framing: either no ribbon twisting at all, or a non-negative
/// count of half-twists (zero is a framed strand with no twists, which is
/// distinct from untwisted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framing {
    Untwisted,
    Twists(u32),
}

impl Framing {
    pub fn twists(&self) -> u64 {
        match self {
            Framing::Untwisted => 0,
            Framing::Twists(d) => *d as u64,
        }
    }

    pub fn is_untwisted(&self) -> bool {
        matches!(self, Framing::Untwisted)
    }
}

/// A framed braid: strand count, crossing word, framing vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedBraid {
    strands: u32,
    word: Vec<Generator>,
    framing: Vec<Framing>,
}

impl FramedBraid {
    pub fn new(
        strands: u32,
        word: Vec<Generator>,
        framing: Vec<Framing>,
    ) -> Result<FramedBraid, BraidError> {
        if strands < 1 {
            return Err(BraidError::NoStrands);
        }
        for g in &word {
            if g.index >= strands {
                return Err(BraidError::GeneratorOutOfRange {
                    index: g.index,
                    strands,
                });
            }
        }
        if framing.len() != strands as usize {
            return Err(BraidError::FramingLengthMismatch {
                got: framing.len(),
                strands,
            });
        }
        Ok(FramedBraid {
            strands,
            word,
            framing,
        })
    }

    pub fn strands(&self) -> u32 {
        self.strands
    }

    pub fn word(&self) -> &[Generator] {
        &self.word
    }

    pub fn framing(&self) -> &[Framing] {
        &self.framing
    }

    /// The permutation underlying the braid: entry `i` (0-based) is the
    /// 0-based top position reached by the strand entering at bottom
    /// position `i`. Generator signs are ignored; both crossings project to
    /// the same transposition.
    pub fn permutation(&self) -> Vec<usize> {
        let s = self.strands as usize;
        let mut occupant: Vec<usize> = (0..s).collect();
        for g in &self.word {
            let i = (g.index - 1) as usize;
            occupant.swap(i, i + 1);
        }
        let mut perm = vec![0usize; s];
        for (pos, strand) in occupant.iter().enumerate() {
            perm[*strand] = pos;
        }
        perm
    }

    /// Total framing M: the sum of half-twists over framed strands.
    pub fn total_framing(&self) -> u64 {
        self.framing.iter().map(Framing::twists).sum()
    }

    /// A closed ribbon is an orientable surface only when the total twist
    /// count is even. Odd M is legal everywhere (nothing in the arithmetic
    /// needs it); strict callers can surface this as a warning.
    pub fn is_orientable(&self) -> bool {
        self.total_framing().is_multiple_of(2)
    }

    /// Closure structure: the cycles of the underlying permutation together
    /// with each component's framing total.
    pub fn closure(&self) -> ClosureSummary {
        let perm = self.permutation();
        let s = self.strands as usize;
        let mut seen = vec![false; s];
        let mut components = Vec::new();
        for start in 0..s {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cycle.push(cur as u32 + 1);
                cur = perm[cur];
            }
            cycle.sort_unstable();
            let total = cycle
                .iter()
                .map(|&i| self.framing[(i - 1) as usize].twists())
                .sum();
            let all_untwisted = cycle
                .iter()
                .all(|&i| self.framing[(i - 1) as usize].is_untwisted());
            components.push(Component {
                strands: cycle,
                total_half_twists: total,
                all_untwisted,
            });
        }
        components.sort_by_key(|c| c.strands[0]);
        ClosureSummary { components }
    }

    /// Markov conjugation by `g`: the word becomes `g . word . g^-1` and the
    /// framing entries swap along `g`'s transposition so each ribbon keeps
    /// its twists. The closure summary is unchanged.
    pub fn conjugate(&self, g: Generator) -> Result<FramedBraid, BraidError> {
        if g.index >= self.strands {
            return Err(BraidError::GeneratorOutOfRange {
                index: g.index,
                strands: self.strands,
            });
        }
        let mut word = Vec::with_capacity(self.word.len() + 2);
        word.push(g);
        word.extend_from_slice(&self.word);
        word.push(g.inverse());
        let mut framing = self.framing.clone();
        framing.swap((g.index - 1) as usize, g.index as usize);
        Ok(FramedBraid {
            strands: self.strands,
            word,
            framing,
        })
    }

    /// Markov stabilization: one extra strand, the word gains
    /// `sigma_s^(sign)`, and the new strand is untwisted. Component count and
    /// per-component framing totals are preserved.
    pub fn stabilize(&self, sign: Sign) -> FramedBraid {
        let mut word = self.word.clone();
        word.push(Generator::new(self.strands, sign));
        let mut framing = self.framing.clone();
        framing.push(Framing::Untwisted);
        FramedBraid {
            strands: self.strands + 1,
            word,
            framing,
        }
    }

    /// Moves one half-twist from `from` to `to` (1-based). Both strands must
    /// close into the same component, so every per-component total, and M,
    /// is conserved.
    pub fn slide_twist(&self, from: u32, to: u32) -> Result<FramedBraid, BraidError> {
        for strand in [from, to] {
            if strand < 1 || strand > self.strands {
                return Err(BraidError::StrandOutOfRange {
                    strand,
                    strands: self.strands,
                });
            }
        }
        let d = match self.framing[(from - 1) as usize] {
            Framing::Twists(d) if d >= 1 => d,
            _ => return Err(BraidError::NothingToSlide { strand: from }),
        };
        let closure = self.closure();
        let same = closure
            .components
            .iter()
            .any(|c| c.strands.contains(&from) && c.strands.contains(&to));
        if !same {
            return Err(BraidError::DifferentComponents { from, to });
        }
        let mut framing = self.framing.clone();
        framing[(from - 1) as usize] = Framing::Twists(d - 1);
        framing[(to - 1) as usize] = match framing[(to - 1) as usize] {
            Framing::Untwisted => Framing::Twists(1),
            Framing::Twists(x) => Framing::Twists(x + 1),
        };
        Ok(FramedBraid {
            strands: self.strands,
            word: self.word.clone(),
            framing,
        })
    }

    /// Applies `moves` pseudo-random equivalence moves (conjugations,
    /// stabilizations, twist slides), deterministic in `seed`. The result has
    /// the same component count and the same per-component framing totals.
    pub fn obfuscate(&self, seed: u64, moves: u32) -> FramedBraid {
        let mut rng = SplitMix64::new(seed);
        let mut braid = self.clone();
        for _ in 0..moves {
            let roll = rng.below(100);
            if roll < 40 {
                braid = braid.random_conjugate_or_stabilize(&mut rng);
            } else if roll < 55 {
                braid = braid.random_stabilize(&mut rng);
            } else {
                braid = braid.random_slide(&mut rng);
            }
        }
        braid
    }

    fn random_sign(rng: &mut SplitMix64) -> Sign {
        if rng.below(2) == 0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn random_conjugate_or_stabilize(&self, rng: &mut SplitMix64) -> FramedBraid {
        if self.strands < 2 {
            return self.random_stabilize(rng);
        }
        let index = 1 + rng.below((self.strands - 1) as u64) as u32;
        let sign = Self::random_sign(rng);
        self.conjugate(Generator::new(index, sign))
            .expect("index in range")
    }

    fn random_stabilize(&self, rng: &mut SplitMix64) -> FramedBraid {
        self.stabilize(Self::random_sign(rng))
    }

    fn random_slide(&self, rng: &mut SplitMix64) -> FramedBraid {
        let closure = self.closure();
        // candidate sources: framed with at least one twist, in a component
        // that has somewhere else to slide to
        let mut candidates = Vec::new();
        for c in &closure.components {
            if c.strands.len() < 2 {
                continue;
            }
            for &i in &c.strands {
                if self.framing[(i - 1) as usize].twists() >= 1 {
                    candidates.push((i, c));
                }
            }
        }
        if candidates.is_empty() {
            return self.random_conjugate_or_stabilize(rng);
        }
        let (from, component) = candidates[rng.below(candidates.len() as u64) as usize];
        let others: Vec<u32> = component
            .strands
            .iter()
            .copied()
            .filter(|&i| i != from)
            .collect();
        let to = others[rng.below(others.len() as u64) as usize];
        self.slide_twist(from, to).expect("candidate validated")
    }
}

/// One closure component: the strands of a permutation cycle plus the framing
/// they contribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    strands: Vec<u32>,
    total_half_twists: u64,
    all_untwisted: bool,
}

impl Component {
    pub fn strands(&self) -> &[u32] {
        &self.strands
    }

    pub fn total_half_twists(&self) -> u64 {
        self.total_half_twists
    }

    pub fn all_untwisted(&self) -> bool {
        self.all_untwisted
    }
}

/// The closure of a framed braid: components sorted by smallest strand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureSummary {
    components: Vec<Component>,
}

impl ClosureSummary {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Per-component framing totals as a sorted multiset, the invariant
    /// preserved by every equivalence move.
    pub fn framing_multiset(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self
            .components
            .iter()
            .map(|c| c.total_half_twists)
            .collect();
        v.sort_unstable();
        v
    }
}

/// The carrier used by the protocol: a single-cycle braid
/// `sigma_1 sigma_2 .. sigma_(s-1)` whose framing holds the given twist
/// counts. Its closure is one component (a knot) for every strand count.
pub fn standard_carrier(twists: &[u32]) -> FramedBraid {
    assert!(!twists.is_empty());
    let s = twists.len() as u32;
    let word = (1..s).map(Generator::positive).collect();
    let framing = twists.iter().map(|&d| Framing::Twists(d)).collect();
    FramedBraid::new(s, word, framing).expect("constructed in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil_carrier() -> FramedBraid {
        // B2 word (s1, s1, s1), framing (3, 1): the trefoil with M = 4
        FramedBraid::new(
            2,
            vec![
                Generator::positive(1),
                Generator::positive(1),
                Generator::positive(1),
            ],
            vec![Framing::Twists(3), Framing::Twists(1)],
        )
        .unwrap()
    }

    #[test]
    fn permutation_identity_and_transpositions() {
        let id = FramedBraid::new(2, vec![], vec![Framing::Twists(0); 2]).unwrap();
        assert_eq!(id.permutation(), vec![0, 1]);
        let single =
            FramedBraid::new(2, vec![Generator::positive(1)], vec![Framing::Twists(0); 2]).unwrap();
        assert_eq!(single.permutation(), vec![1, 0]);
        // three transpositions compose back to one swap
        assert_eq!(trefoil_carrier().permutation(), vec![1, 0]);
    }

    #[test]
    fn permutation_is_sign_blind() {
        let pos = FramedBraid::new(
            3,
            vec![Generator::positive(1), Generator::positive(2)],
            vec![Framing::Untwisted; 3],
        )
        .unwrap();
        let mixed = FramedBraid::new(
            3,
            vec![Generator::negative(1), Generator::positive(2)],
            vec![Framing::Untwisted; 3],
        )
        .unwrap();
        assert_eq!(pos.permutation(), mixed.permutation());
    }

    #[test]
    fn closure_of_trefoil_carrier() {
        let b = trefoil_carrier();
        let c = b.closure();
        assert_eq!(c.component_count(), 1);
        assert_eq!(c.components()[0].total_half_twists(), 4);
        assert_eq!(b.total_framing(), 4);
    }

    #[test]
    fn closure_of_identity_is_unlink() {
        let b = FramedBraid::new(2, vec![], vec![Framing::Twists(0); 2]).unwrap();
        assert_eq!(b.closure().component_count(), 2);
        for s in 1..=6u32 {
            let id = FramedBraid::new(s, vec![], vec![Framing::Untwisted; s as usize]).unwrap();
            assert_eq!(id.closure().component_count(), s as usize);
        }
    }

    #[test]
    fn total_framing_cases() {
        assert_eq!(trefoil_carrier().total_framing(), 4);
        let unframed =
            FramedBraid::new(2, vec![], vec![Framing::Untwisted, Framing::Untwisted]).unwrap();
        assert_eq!(unframed.total_framing(), 0);
        // Bob's choice d1 = d2 = 2 also totals 4
        let bob = standard_carrier(&[2, 2]);
        assert_eq!(bob.total_framing(), 4);
    }

    #[test]
    fn orientability_tracks_parity() {
        assert!(trefoil_carrier().is_orientable()); // M = 4
        let odd = standard_carrier(&[2, 1]); // M = 3
        assert!(!odd.is_orientable());
        // odd M stays legal: every operation still works
        assert_eq!(odd.closure().component_count(), 1);
    }

    #[test]
    fn conjugation_preserves_closure() {
        let b = trefoil_carrier();
        let before = b.closure();
        let conj = b.conjugate(Generator::positive(1)).unwrap();
        assert_eq!(conj.word().len(), b.word().len() + 2);
        let after = conj.closure();
        assert_eq!(before.component_count(), after.component_count());
        assert_eq!(before.framing_multiset(), after.framing_multiset());
        // conjugate by g then g^-1: word grows, closure still fixed
        let twice = conj.conjugate(Generator::negative(1)).unwrap();
        assert_eq!(
            twice.closure().framing_multiset(),
            before.framing_multiset()
        );
    }

    #[test]
    fn stabilization_preserves_closure() {
        let b = trefoil_carrier();
        let st = b.stabilize(Sign::Positive);
        assert_eq!(st.strands(), 3);
        assert_eq!(st.closure().component_count(), 1);
        assert_eq!(st.total_framing(), 4);
        // stabilizing the 1-strand identity gives B2 with word (s1)
        let id = FramedBraid::new(1, vec![], vec![Framing::Untwisted]).unwrap();
        let st = id.stabilize(Sign::Positive);
        assert_eq!(st.strands(), 2);
        assert_eq!(st.word(), &[Generator::positive(1)]);
        assert_eq!(st.closure().component_count(), 1);
        // repeated stabilization
        let mut b = trefoil_carrier();
        for _ in 0..10 {
            b = b.stabilize(Sign::Negative);
        }
        assert_eq!(b.strands(), 12);
        assert_eq!(b.closure().component_count(), 1);
        assert_eq!(b.total_framing(), 4);
    }

    #[test]
    fn slide_conserves_totals() {
        let b = trefoil_carrier();
        let slid = b.slide_twist(1, 2).unwrap();
        assert_eq!(slid.framing(), &[Framing::Twists(2), Framing::Twists(2)]);
        assert_eq!(slid.total_framing(), 4);
    }

    #[test]
    fn components_partition_strands_and_carry_all_framing() {
        let b = standard_carrier(&[3, 1, 4, 1, 5]).obfuscate(7, 30);
        let closure = b.closure();
        let mut strands: Vec<u32> = closure
            .components()
            .iter()
            .flat_map(|c| c.strands().iter().copied())
            .collect();
        strands.sort_unstable();
        assert_eq!(strands, (1..=b.strands()).collect::<Vec<_>>());
        let component_sum: u64 = closure
            .components()
            .iter()
            .map(|c| c.total_half_twists())
            .sum();
        assert_eq!(component_sum, b.total_framing());
    }

    #[test]
    fn slide_error_paths() {
        let b = trefoil_carrier();
        assert!(matches!(
            b.slide_twist(0, 1),
            Err(BraidError::StrandOutOfRange { .. })
        ));
        // untwisted source
        let mixed = FramedBraid::new(
            2,
            vec![Generator::positive(1)],
            vec![Framing::Untwisted, Framing::Twists(2)],
        )
        .unwrap();
        assert_eq!(
            mixed.slide_twist(1, 2),
            Err(BraidError::NothingToSlide { strand: 1 })
        );
        // two separate components: identity braid
        let id = FramedBraid::new(2, vec![], vec![Framing::Twists(1), Framing::Twists(0)]).unwrap();
        assert_eq!(
            id.slide_twist(1, 2),
            Err(BraidError::DifferentComponents { from: 1, to: 2 })
        );
    }

    #[test]
    fn thousand_random_slides_conserve_component_framing() {
        let mut rng = crate::rng::SplitMix64::new(0x51DE);
        let b = standard_carrier(&[5, 0, 3, 2]);
        let reference = b.closure().framing_multiset();
        let mut cur = b;
        let mut applied = 0;
        while applied < 1000 {
            let from = 1 + rng.below(4) as u32;
            let to = 1 + rng.below(4) as u32;
            if let Ok(next) = cur.slide_twist(from, to) {
                cur = next;
                applied += 1;
            }
        }
        assert_eq!(cur.closure().framing_multiset(), reference);
        assert_eq!(cur.total_framing(), 10);
    }

    #[test]
    fn obfuscate_zero_moves_is_identity() {
        let b = trefoil_carrier();
        assert_eq!(b.obfuscate(12345, 0), b);
    }

    #[test]
    fn obfuscate_preserves_invariants_and_depends_on_seed() {
        let b = standard_carrier(&[3, 1, 4, 1, 5]);
        let before = b.closure();
        let mut distinct_framings = std::collections::HashSet::new();
        for seed in 0..8u64 {
            let ob = b.obfuscate(seed, 40);
            let after = ob.closure();
            assert_eq!(after.component_count(), before.component_count());
            assert_eq!(after.framing_multiset(), before.framing_multiset());
            assert_eq!(ob.total_framing(), b.total_framing());
            distinct_framings.insert(format!("{:?}", ob.framing()));
            // determinism
            assert_eq!(ob, b.obfuscate(seed, 40));
        }
        assert!(
            distinct_framings.len() > 1,
            "different seeds should generally shuffle the framing"
        );
    }

    #[test]
    fn standard_carrier_is_a_knot() {
        for n in 1..=6 {
            let twists: Vec<u32> = (0..n).collect();
            let c = standard_carrier(&twists);
            assert_eq!(c.closure().component_count(), 1);
        }
    }
}
