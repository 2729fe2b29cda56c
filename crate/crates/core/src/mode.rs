//! Words in the modes `X(n)` and the central element `k`, and their rewrite
//! into PBW normal form.
//!
//! The defining relations of the mode algebra are
//!
//! ```text
//! X(m) Y(n) = Y(n) X(m) + m (X, Y) δ_{m+n,0} k     for m > 0, n < 0,
//! X(n) Y(0) = Y(0) X(n)                            for n ≠ 0,
//! k central.
//! ```
//!
//! Zero modes commute with every nonzero mode but *not* with each other: the
//! zero-mode factor of the normal form is a free tensor algebra. The normal
//! form lists strictly negative levels first, then strictly positive levels,
//! then zero levels, with `k` tracked as a separate exponent.

use crate::scalar::Scalar;
use crate::space::FrameSpace;
use std::collections::BTreeMap;
use std::fmt;

/// A single mode `X(n)`: a frame-coordinate vector at integer level `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    pub vec: Vec<Scalar>,
    pub level: i64,
}

impl Mode {
    pub fn new(vec: Vec<Scalar>, level: i64) -> Self {
        Mode { vec, level }
    }

    /// The basis mode `e_idx(level)` in a `dim`-dimensional space.
    pub fn basis(idx: usize, level: i64, dim: usize) -> Self {
        let mut vec = vec![Scalar::zero(); dim];
        vec[idx] = Scalar::one();
        Mode { vec, level }
    }
}

/// An ordered word of modes times a power of `k`. Order is significant.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ModeWord {
    pub modes: Vec<Mode>,
    pub central_power: u32,
}

impl ModeWord {
    pub fn new(modes: Vec<Mode>) -> Self {
        ModeWord { modes, central_power: 0 }
    }
}

/// A mode of a single frame-basis vector; the canonical key form after
/// multilinear expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisMode {
    pub idx: usize,
    pub level: i64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LevelClass {
    Negative,
    Positive,
    Zero,
}

fn class(level: i64) -> LevelClass {
    if level < 0 {
        LevelClass::Negative
    } else if level > 0 {
        LevelClass::Positive
    } else {
        LevelClass::Zero
    }
}

/// PBW block rank: negatives, then positives, then zeros.
fn block_rank(level: i64) -> u8 {
    match class(level) {
        LevelClass::Negative => 0,
        LevelClass::Positive => 1,
        LevelClass::Zero => 2,
    }
}

/// A word over basis modes, PBW-ordered when stored in a [`NormalForm`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisWord {
    pub modes: Vec<BasisMode>,
    pub central_power: u32,
}

impl BasisWord {
    pub fn is_pbw_ordered(&self) -> bool {
        self.modes
            .windows(2)
            .all(|w| block_rank(w[0].level) <= block_rank(w[1].level))
    }
}

impl fmt::Display for BasisWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modes.is_empty() && self.central_power == 0 {
            return write!(f, "1");
        }
        for (n, m) in self.modes.iter().enumerate() {
            if n > 0 {
                write!(f, "·")?;
            }
            write!(f, "e{}({})", m.idx + 1, m.level)?;
        }
        if self.central_power > 0 {
            if !self.modes.is_empty() {
                write!(f, "·")?;
            }
            write!(f, "k^{}", self.central_power)?;
        }
        Ok(())
    }
}

/// A finite linear combination of PBW-ordered basis words.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NormalForm {
    terms: BTreeMap<BasisWord, Scalar>,
}

impl NormalForm {
    pub fn terms(&self) -> impl Iterator<Item = (&BasisWord, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &BasisWord) -> Scalar {
        self.terms.get(word).cloned().unwrap_or_else(Scalar::zero)
    }

    fn add_term(&mut self, word: BasisWord, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(word);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
}

/// Which violating adjacent pair the rewriter picks first. Both strategies
/// must agree on every input; the confluence tests pin that down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    LeftmostFirst,
    RightmostFirst,
}

/// Rewrites a word of modes into its PBW normal form.
///
/// Total: multilinear in the mode vectors, independent of rewrite order.
pub fn normalize_word(word: &ModeWord, space: &FrameSpace) -> NormalForm {
    normalize_word_with_strategy(word, space, RewriteStrategy::LeftmostFirst)
}

pub fn normalize_word_with_strategy(
    word: &ModeWord,
    space: &FrameSpace,
    strategy: RewriteStrategy,
) -> NormalForm {
    let mut out = NormalForm::default();
    for (basis_word, coeff) in expand_multilinear(word, space.dim()) {
        rewrite_basis_word(basis_word, coeff, space, strategy, &mut out);
    }
    out
}

/// Expands each vector mode over the frame basis.
fn expand_multilinear(word: &ModeWord, dim: usize) -> Vec<(BasisWord, Scalar)> {
    let mut acc: Vec<(Vec<BasisMode>, Scalar)> = vec![(Vec::new(), Scalar::one())];
    for mode in &word.modes {
        assert_eq!(mode.vec.len(), dim, "mode vector has wrong dimension");
        let mut next = Vec::new();
        for (prefix, coeff) in &acc {
            for (idx, component) in mode.vec.iter().enumerate() {
                if component.is_zero() {
                    continue;
                }
                let mut modes = prefix.clone();
                modes.push(BasisMode { idx, level: mode.level });
                next.push((modes, coeff * component));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(modes, coeff)| (BasisWord { modes, central_power: word.central_power }, coeff))
        .collect()
}

fn rewrite_basis_word(
    word: BasisWord,
    coeff: Scalar,
    space: &FrameSpace,
    strategy: RewriteStrategy,
    out: &mut NormalForm,
) {
    let mut stack: Vec<(Vec<BasisMode>, u32, Scalar)> =
        vec![(word.modes, word.central_power, coeff)];
    while let Some((modes, central, coeff)) = stack.pop() {
        let violation = {
            let pairs = (0..modes.len().saturating_sub(1))
                .filter(|&i| block_rank(modes[i].level) > block_rank(modes[i + 1].level));
            match strategy {
                RewriteStrategy::LeftmostFirst => pairs.min(),
                RewriteStrategy::RightmostFirst => pairs.max(),
            }
        };
        let Some(i) = violation else {
            out.add_term(BasisWord { modes, central_power: central }, coeff);
            continue;
        };
        let (a, b) = (modes[i], modes[i + 1]);
        // Contraction applies only to a positive mode moving past a negative
        // one with opposite level; swaps past zero modes are free.
        if a.level > 0 && b.level < 0 && a.level + b.level == 0 {
            let pairing = space.pair(a.idx, b.idx);
            if !pairing.is_zero() {
                let mut contracted = modes.clone();
                contracted.drain(i..=i + 1);
                let c = &coeff * &(&Scalar::from_int(a.level) * pairing);
                stack.push((contracted, central + 1, c));
            }
        }
        let mut swapped = modes;
        swapped.swap(i, i + 1);
        stack.push((swapped, central, coeff));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(idx: usize, level: i64) -> Mode {
        Mode::basis(idx, level, 2)
    }

    fn bw(modes: &[(usize, i64)], central: u32) -> BasisWord {
        BasisWord {
            modes: modes.iter().map(|&(idx, level)| BasisMode { idx, level }).collect(),
            central_power: central,
        }
    }

    #[test]
    fn contraction_with_matching_levels() {
        // e1(1) e1(-1) = e1(-1) e1(1) + k
        let space = FrameSpace::orthonormal(2);
        let nf = normalize_word(&ModeWord::new(vec![e(0, 1), e(0, -1)]), &space);
        assert_eq!(nf.coefficient(&bw(&[(0, -1), (0, 1)], 0)), Scalar::one());
        assert_eq!(nf.coefficient(&bw(&[], 1)), Scalar::one());
        assert_eq!(nf.len(), 2);
    }

    #[test]
    fn no_contraction_when_levels_do_not_cancel() {
        // e1(2) e1(-1) = e1(-1) e1(2)
        let space = FrameSpace::orthonormal(2);
        let nf = normalize_word(&ModeWord::new(vec![e(0, 2), e(0, -1)]), &space);
        assert_eq!(nf.coefficient(&bw(&[(0, -1), (0, 2)], 0)), Scalar::one());
        assert_eq!(nf.len(), 1);
    }

    #[test]
    fn zero_mode_commutes_past_creation() {
        // e1(0) e2(-3) = e2(-3) e1(0)
        let space = FrameSpace::orthonormal(2);
        let nf = normalize_word(&ModeWord::new(vec![e(0, 0), e(1, -3)]), &space);
        assert_eq!(nf.coefficient(&bw(&[(1, -3), (0, 0)], 0)), Scalar::one());
        assert_eq!(nf.len(), 1);
    }

    #[test]
    fn zero_modes_do_not_commute_with_each_other() {
        let space = FrameSpace::orthonormal(2);
        let xy = normalize_word(&ModeWord::new(vec![e(0, 0), e(1, 0)]), &space);
        let yx = normalize_word(&ModeWord::new(vec![e(1, 0), e(0, 0)]), &space);
        assert_ne!(xy, yx);
    }

    #[test]
    fn contraction_coefficient_scales_with_level() {
        // e1(2) e1(-2) = e1(-2) e1(2) + 2k
        let space = FrameSpace::orthonormal(2);
        let nf = normalize_word(&ModeWord::new(vec![e(0, 2), e(0, -2)]), &space);
        assert_eq!(nf.coefficient(&bw(&[], 1)), Scalar::from_int(2));
    }

    #[test]
    fn normal_form_keys_are_pbw_ordered() {
        let space = FrameSpace::orthonormal(2);
        let word = ModeWord::new(vec![e(0, 1), e(1, 0), e(0, -1), e(1, 2), e(1, -2)]);
        let nf = normalize_word(&word, &space);
        assert!(!nf.is_empty());
        for (w, _) in nf.terms() {
            assert!(w.is_pbw_ordered(), "not PBW ordered: {w}");
        }
    }

    #[test]
    fn multilinear_expansion_of_vector_modes() {
        let space = FrameSpace::orthonormal(2);
        let v = Mode::new(vec![Scalar::from_int(2), Scalar::from_int(-3)], -1);
        let nf = normalize_word(&ModeWord::new(vec![v]), &space);
        assert_eq!(nf.coefficient(&bw(&[(0, -1)], 0)), Scalar::from_int(2));
        assert_eq!(nf.coefficient(&bw(&[(1, -1)], 0)), Scalar::from_int(-3));
    }

    #[test]
    fn strategies_agree_on_a_mixed_word() {
        let space = FrameSpace::orthonormal(2);
        let word = ModeWord::new(vec![e(0, 1), e(0, -1), e(1, 1), e(1, -1), e(0, 0)]);
        let left = normalize_word_with_strategy(&word, &space, RewriteStrategy::LeftmostFirst);
        let right = normalize_word_with_strategy(&word, &space, RewriteStrategy::RightmostFirst);
        assert_eq!(left, right);
    }
}
