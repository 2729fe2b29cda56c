//! The commutative quotient: creation words with reordered factors
//! identified, i.e. the symmetric algebra on the creation modes with its
//! usual free-boson vertex operators. The quotient map intertwines the two
//! vertex operator structures; tests exercise that intertwining with both
//! sides computed independently.

use crate::fock::FockElement;
use crate::scalar::Scalar;
use crate::space::FrameSpace;
use crate::vertex::{for_each_field_action, for_each_field_term};
use std::collections::BTreeMap;
use std::fmt;

/// A commutative creation monomial: the multiset of `(frame index, n)`
/// pairs, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymMonomial {
    creations: Vec<(usize, i64)>,
}

impl SymMonomial {
    pub fn vacuum() -> Self {
        SymMonomial::default()
    }

    pub fn new(mut creations: Vec<(usize, i64)>) -> Self {
        assert!(creations.iter().all(|&(_, n)| n >= 1));
        creations.sort_unstable();
        SymMonomial { creations }
    }

    pub fn weight(&self) -> i64 {
        self.creations.iter().map(|&(_, n)| n).sum()
    }
}

impl fmt::Display for SymMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.creations.is_empty() {
            return write!(f, "1");
        }
        for (n, (idx, level)) in self.creations.iter().enumerate() {
            if n > 0 {
                write!(f, "·")?;
            }
            write!(f, "e{}(-{})", idx + 1, level)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymElement {
    terms: BTreeMap<SymMonomial, Scalar>,
}

impl SymElement {
    pub fn zero() -> Self {
        SymElement::default()
    }

    pub fn vacuum() -> Self {
        SymElement::monomial(SymMonomial::vacuum())
    }

    pub fn monomial(m: SymMonomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, Scalar::one());
        SymElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: SymMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SymElement, factor: &Scalar) {
        if factor.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), factor * c);
        }
    }
}

/// The quotient map onto the symmetric algebra: sorts each creation word.
pub fn symmetrize(u: &FockElement) -> SymElement {
    let mut out = SymElement::zero();
    for (m, c) in u.terms() {
        out.add_term(SymMonomial::new(m.creations().to_vec()), c.clone());
    }
    out
}

fn apply_basis_mode_sym(
    idx: usize,
    level: i64,
    v: &SymElement,
    space: &FrameSpace,
) -> SymElement {
    let mut out = SymElement::zero();
    if level == 0 {
        return out;
    }
    for (m, c) in v.terms() {
        if level < 0 {
            let mut creations = m.creations.clone();
            creations.push((idx, -level));
            creations.sort_unstable();
            out.add_term(SymMonomial { creations }, c.clone());
        } else {
            for (j, &(jdx, n)) in m.creations.iter().enumerate() {
                if n != level {
                    continue;
                }
                let pairing = space.pair(idx, jdx);
                if pairing.is_zero() {
                    continue;
                }
                let mut creations = m.creations.clone();
                creations.remove(j);
                out.add_term(
                    SymMonomial { creations },
                    &(&Scalar::from_int(level) * pairing) * c,
                );
            }
        }
    }
    out
}

/// The coefficient of `x^p` in the symmetric-algebra vertex operator
/// `Y(u, x)v`, computed entirely on sorted monomials; the slower
/// tuple-enumeration route below serves as its in-crate oracle.
pub fn sym_mode_coefficient(
    u: &SymElement,
    v: &SymElement,
    p: i64,
    space: &FrameSpace,
) -> SymElement {
    let mut out = SymElement::zero();
    for (um, uc) in u.terms() {
        for (vm, vc) in v.terms() {
            let scale = uc * vc;
            for_each_field_action(&um.creations, &vm.creations, p, p, true, space, &mut |term| {
                let mut creations =
                    Vec::with_capacity(term.new_creations.len() + vm.creations.len());
                creations.extend_from_slice(term.new_creations);
                for (s, slot) in vm.creations.iter().enumerate() {
                    if term.kept_slots & (1 << s) != 0 {
                        creations.push(*slot);
                    }
                }
                out.add_term(SymMonomial::new(creations), &scale * term.coeff);
            });
        }
    }
    out
}

/// Reference route for [`sym_mode_coefficient`] through single-mode actions.
pub fn sym_mode_coefficient_reference(
    u: &SymElement,
    v: &SymElement,
    p: i64,
    space: &FrameSpace,
) -> SymElement {
    let mut out = SymElement::zero();
    for (um, uc) in u.terms() {
        for (vm, vc) in v.terms() {
            let base = SymElement::monomial(vm.clone());
            let scale = uc * vc;
            for_each_field_term(&um.creations, vm.weight(), p, p, true, &mut |_, modes, w| {
                let mut cur = base.clone();
                for &(idx, m) in modes.iter().rev() {
                    cur = apply_basis_mode_sym(idx, m, &cur, space);
                    if cur.is_zero() {
                        return;
                    }
                }
                out.add_scaled(&cur, &(&scale * w));
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vertex::mode_coefficient;

    #[test]
    fn quotient_identifies_reordered_words() {
        let a = FockElement::from_creations(&[(0, 1), (1, 1)]);
        let b = FockElement::from_creations(&[(1, 1), (0, 1)]);
        assert_ne!(a, b);
        assert_eq!(symmetrize(&a), symmetrize(&b));
        assert_eq!(symmetrize(&FockElement::vacuum()), SymElement::vacuum());
    }

    #[test]
    fn intertwines_pairing_coefficient() {
        let space = FrameSpace::orthonormal(2);
        let u = FockElement::from_creations(&[(0, 1)]);
        let tensor_side = symmetrize(&mode_coefficient(&u, &u, -2, &space));
        let sym_side = sym_mode_coefficient(&symmetrize(&u), &symmetrize(&u), -2, &space);
        assert_eq!(tensor_side, sym_side);
        assert_eq!(sym_side, SymElement::vacuum());
    }

    #[test]
    fn sym_contraction_counts_multiplicity() {
        // e1(1) against e1(-1)^2: two identical factors contract.
        let space = FrameSpace::orthonormal(2);
        let sq = SymElement::monomial(SymMonomial::new(vec![(0, 1), (0, 1)]));
        let hit = apply_basis_mode_sym(0, 1, &sq, &space);
        let mut want = SymElement::zero();
        want.add_term(SymMonomial::new(vec![(0, 1)]), Scalar::from_int(2));
        assert_eq!(hit, want);
    }
}
