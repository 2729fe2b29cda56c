//! The Fock space: the free tensor algebra on creation modes, acted on by
//! the full mode algebra with positive modes contracting rightward, zero
//! modes annihilating, and `k` acting as the identity.

use crate::error::CoreError;
use crate::mode::{Mode, NormalForm};
use crate::scalar::Scalar;
use crate::space::{determinant, FrameSpace};
use std::collections::BTreeMap;
use std::fmt;

/// An ordered creation word `X_{i1}(-n_1) ⋯ X_{ik}(-n_k) 1`, stored as
/// `(frame index, n)` pairs with every `n ≥ 1`. The empty word is the
/// vacuum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FockMonomial {
    creations: Vec<(usize, i64)>,
}

impl FockMonomial {
    pub fn vacuum() -> Self {
        FockMonomial::default()
    }

    pub fn new(creations: Vec<(usize, i64)>) -> Self {
        assert!(creations.iter().all(|&(_, n)| n >= 1), "creation levels must be >= 1");
        FockMonomial { creations }
    }

    pub fn creations(&self) -> &[(usize, i64)] {
        &self.creations
    }

    pub fn is_vacuum(&self) -> bool {
        self.creations.is_empty()
    }

    /// The grading Σ n_j.
    pub fn weight(&self) -> i64 {
        self.creations.iter().map(|&(_, n)| n).sum()
    }
}

impl fmt::Display for FockMonomial {
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

/// A finite linear combination of creation words with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FockElement {
    terms: BTreeMap<FockMonomial, Scalar>,
}

impl FockElement {
    pub fn zero() -> Self {
        FockElement::default()
    }

    /// The vacuum vector `1`.
    pub fn vacuum() -> Self {
        FockElement::monomial(FockMonomial::vacuum())
    }

    pub fn monomial(m: FockMonomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, Scalar::one());
        FockElement { terms }
    }

    /// Convenience constructor from `(index, n)` creation pairs.
    pub fn from_creations(creations: &[(usize, i64)]) -> Self {
        FockElement::monomial(FockMonomial::new(creations.to_vec()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &FockMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_term(&mut self, m: FockMonomial, c: Scalar) {
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

    pub fn add_scaled(&mut self, other: &FockElement, factor: &Scalar) {
        if factor.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), factor * c);
        }
    }

    pub fn add(&self, other: &FockElement) -> FockElement {
        let mut out = self.clone();
        out.add_scaled(other, &Scalar::one());
        out
    }

    pub fn scale(&self, factor: &Scalar) -> FockElement {
        let mut out = FockElement::zero();
        out.add_scaled(self, factor);
        out
    }

    pub fn neg(&self) -> FockElement {
        self.scale(&-Scalar::one())
    }

    /// Largest monomial weight present (0 for the zero element).
    pub fn max_weight(&self) -> i64 {
        self.terms.keys().map(|m| m.weight()).max().unwrap_or(0)
    }

    /// `Some(w)` if every monomial has weight `w`; the zero element is
    /// homogeneous of every weight and reports `None`.
    pub fn homogeneous_weight(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.weight());
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }
}

impl fmt::Display for FockElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·{m}")?;
        }
        Ok(())
    }
}

/// Applies the basis mode `e_idx(level)` to an element of the Fock space.
///
/// Creation modes prepend; positive modes contract against matching creation
/// levels (coefficient `level · (e_idx, e_j)`) and annihilate the vacuum;
/// zero modes act as zero; `k` never appears (it acts as 1).
pub fn apply_basis_mode(
    idx: usize,
    level: i64,
    v: &FockElement,
    space: &FrameSpace,
) -> FockElement {
    let mut out = FockElement::zero();
    if level == 0 {
        return out;
    }
    for (m, c) in v.terms() {
        if level < 0 {
            let mut creations = Vec::with_capacity(m.creations.len() + 1);
            creations.push((idx, -level));
            creations.extend_from_slice(&m.creations);
            out.add_term(FockMonomial { creations }, c.clone());
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
                let coeff = &(&Scalar::from_int(level) * pairing) * c;
                out.add_term(FockMonomial { creations }, coeff);
            }
        }
    }
    out
}

/// Applies a vector mode by multilinear expansion over the frame basis.
pub fn apply_mode(mode: &Mode, v: &FockElement, space: &FrameSpace) -> FockElement {
    let mut out = FockElement::zero();
    for (idx, component) in mode.vec.iter().enumerate() {
        if component.is_zero() {
            continue;
        }
        out.add_scaled(&apply_basis_mode(idx, mode.level, v, space), component);
    }
    out
}

/// The translation operator: shifts one creation level at a time,
/// `D(X_1(-n_1)⋯X_k(-n_k)1) = Σ_j n_j · X_1(-n_1)⋯X_j(-n_j-1)⋯X_k(-n_k)1`.
pub fn translate(u: &FockElement) -> FockElement {
    let mut out = FockElement::zero();
    for (m, c) in u.terms() {
        for j in 0..m.creations.len() {
            let (_, n) = m.creations[j];
            let mut creations = m.creations.clone();
            creations[j].1 += 1;
            out.add_term(FockMonomial { creations }, &Scalar::from_int(n) * c);
        }
    }
    out
}

/// Replaces every creation vector `e_i` by `A e_i` (column `i` of `A`),
/// extended multilinearly. Rejects singular `A`.
pub fn apply_linear_map(a: &[Vec<Scalar>], u: &FockElement) -> Result<FockElement, CoreError> {
    let d = a.len();
    if d == 0 || a.iter().any(|row| row.len() != d) {
        return Err(CoreError::SingularMatrix);
    }
    if determinant(a).is_zero() {
        return Err(CoreError::SingularMatrix);
    }
    let mut out = FockElement::zero();
    for (m, c) in u.terms() {
        let mut expanded: Vec<(Vec<(usize, i64)>, Scalar)> = vec![(Vec::new(), c.clone())];
        for &(idx, n) in m.creations() {
            let mut next = Vec::new();
            for (prefix, coeff) in &expanded {
                for row in 0..d {
                    let entry = &a[row][idx];
                    if entry.is_zero() {
                        continue;
                    }
                    let mut word = prefix.clone();
                    word.push((row, n));
                    next.push((word, coeff * entry));
                }
            }
            expanded = next;
        }
        for (word, coeff) in expanded {
            out.add_term(FockMonomial { creations: word }, coeff);
        }
    }
    Ok(out)
}

/// The weight-`(k+l)` element `Σ_{ij} (g^{-1})^{ij} e_i(-k) e_j(-l) 1`
/// attached to the inverse of the bilinear form.
pub fn metric_inverse_element(
    k: i64,
    l: i64,
    space: &FrameSpace,
) -> Result<FockElement, CoreError> {
    assert!(k >= 1 && l >= 1, "levels must be positive");
    let inv = space.inverse_form()?;
    let mut out = FockElement::zero();
    for (i, row) in inv.iter().enumerate() {
        for (j, coeff) in row.iter().enumerate() {
            out.add_term(FockMonomial::new(vec![(i, k), (j, l)]), coeff.clone());
        }
    }
    Ok(out)
}

/// Pushes a normal form onto the vacuum vector: words containing any
/// positive or zero mode annihilate it, `k` acts as 1, and pure creation
/// words become Fock monomials. Serves as the independent oracle for
/// composed mode actions.
pub fn apply_to_vacuum(nf: &NormalForm) -> FockElement {
    let mut out = FockElement::zero();
    for (word, coeff) in nf.terms() {
        if word.modes.iter().any(|m| m.level >= 0) {
            continue;
        }
        let creations = word.modes.iter().map(|m| (m.idx, -m.level)).collect();
        out.add_term(FockMonomial { creations }, coeff.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::{normalize_word, ModeWord};

    fn e(idx: usize, level: i64) -> Mode {
        Mode::basis(idx, level, 2)
    }

    #[test]
    fn annihilation_contracts_to_vacuum() {
        // e1(1) applied to e1(-1)1 gives the vacuum.
        let space = FrameSpace::orthonormal(2);
        let v = FockElement::from_creations(&[(0, 1)]);
        let got = apply_mode(&e(0, 1), &v, &space);
        assert_eq!(got, FockElement::vacuum());

        // Same computation through normalize_word + vacuum application.
        let word = ModeWord::new(vec![e(0, 1), e(0, -1)]);
        let oracle = apply_to_vacuum(&normalize_word(&word, &space));
        assert_eq!(got, oracle);
    }

    #[test]
    fn zero_modes_annihilate() {
        let space = FrameSpace::orthonormal(2);
        let v = FockElement::from_creations(&[(0, 2), (1, 1)]);
        assert!(apply_mode(&e(0, 0), &v, &space).is_zero());
    }

    #[test]
    fn contraction_through_orthogonal_creation() {
        // e1(2) on e2(-1)e1(-2)1 = 2·e2(-1)1
        let space = FrameSpace::orthonormal(2);
        let v = FockElement::from_creations(&[(1, 1), (0, 2)]);
        let got = apply_mode(&e(0, 2), &v, &space);
        let want = FockElement::from_creations(&[(1, 1)]).scale(&Scalar::from_int(2));
        assert_eq!(got, want);
    }

    #[test]
    fn composed_mode_actions_match_vacuum_oracle() {
        // Apply words of mixed modes both directly and through the normal
        // form; the two routes must agree on the vacuum module.
        let space = FrameSpace::orthonormal(2);
        let words: Vec<Vec<Mode>> = vec![
            vec![e(0, 1), e(0, -1)],
            vec![e(0, 2), e(1, -1), e(0, -2)],
            vec![e(1, 1), e(1, -1), e(1, 1), e(1, -1)],
            vec![e(0, 1), e(1, 1), e(1, -1), e(0, -1)],
            vec![e(0, 3), e(0, -1), e(0, -2)],
        ];
        for modes in words {
            let mut direct = FockElement::vacuum();
            for mode in modes.iter().rev() {
                direct = apply_mode(mode, &direct, &space);
            }
            let oracle =
                apply_to_vacuum(&normalize_word(&ModeWord::new(modes.clone()), &space));
            assert_eq!(direct, oracle, "mismatch for {modes:?}");
        }
    }

    #[test]
    fn translate_shifts_levels() {
        assert!(translate(&FockElement::vacuum()).is_zero());
        let u = FockElement::from_creations(&[(0, 1)]);
        assert_eq!(translate(&u), FockElement::from_creations(&[(0, 2)]));

        let uv = FockElement::from_creations(&[(0, 1), (1, 1)]);
        let want = FockElement::from_creations(&[(0, 2), (1, 1)])
            .add(&FockElement::from_creations(&[(0, 1), (1, 2)]));
        assert_eq!(translate(&uv), want);
    }

    #[test]
    fn linear_map_identity_and_rotation() {
        let id = vec![
            vec![Scalar::one(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::one()],
        ];
        let u = FockElement::from_creations(&[(0, 1), (1, 2)]);
        assert_eq!(apply_linear_map(&id, &u).unwrap(), u);

        // (3/5, -4/5; 4/5, 3/5) sends e1(-1)1 to 3/5 e1(-1)1 + 4/5 e2(-1)1.
        let rot = rotation_3_4_5();
        let got = apply_linear_map(&rot, &FockElement::from_creations(&[(0, 1)])).unwrap();
        let mut want = FockElement::zero();
        want.add_term(FockMonomial::new(vec![(0, 1)]), Scalar::from_ratio(3, 5));
        want.add_term(FockMonomial::new(vec![(1, 1)]), Scalar::from_ratio(4, 5));
        assert_eq!(got, want);
    }

    #[test]
    fn singular_map_rejected() {
        let sing = vec![
            vec![Scalar::one(), Scalar::one()],
            vec![Scalar::one(), Scalar::one()],
        ];
        assert!(apply_linear_map(&sing, &FockElement::vacuum()).is_err());
    }

    #[test]
    fn metric_inverse_element_orthonormal() {
        let space = FrameSpace::orthonormal(2);
        let g = metric_inverse_element(1, 1, &space).unwrap();
        let want = FockElement::from_creations(&[(0, 1), (0, 1)])
            .add(&FockElement::from_creations(&[(1, 1), (1, 1)]));
        assert_eq!(g, want);
        assert_eq!(g.homogeneous_weight(), Some(2));
        assert_eq!(metric_inverse_element(1, 2, &space).unwrap().homogeneous_weight(), Some(3));
    }

    #[test]
    fn metric_inverse_element_fixed_by_rational_rotation() {
        let space = FrameSpace::orthonormal(2);
        let g = metric_inverse_element(1, 1, &space).unwrap();
        let rotated = apply_linear_map(&rotation_3_4_5(), &g).unwrap();
        assert_eq!(rotated, g);
    }

    pub(crate) fn rotation_3_4_5() -> Vec<Vec<Scalar>> {
        vec![
            vec![Scalar::from_ratio(3, 5), Scalar::from_ratio(-4, 5)],
            vec![Scalar::from_ratio(4, 5), Scalar::from_ratio(3, 5)],
        ]
    }
}
