//! Exact-arithmetic mode algebra and vertex operators on the tensor algebra
//! of creation modes.
//!
//! The underlying graded space is the *free* (non-symmetric) tensor algebra
//! on modes `X(-n)`, `n ≥ 1`, of a finite-dimensional space with a bilinear
//! form. Its vertex operators are normal-ordered free-field products; they
//! satisfy rationality and weak associativity but are genuinely
//! noncommutative, and the whole structure is checked here over exact
//! Gaussian-rational scalars.

pub mod error;
pub mod fock;
pub mod mode;
pub mod scalar;
pub mod space;
pub mod sym;
pub mod vertex;

pub use error::CoreError;
pub use fock::{
    apply_basis_mode, apply_linear_map, apply_mode, apply_to_vacuum, metric_inverse_element,
    translate, FockElement, FockMonomial,
};
pub use mode::{
    normalize_word, normalize_word_with_strategy, BasisMode, BasisWord, Mode, ModeWord,
    NormalForm, RewriteStrategy,
};
pub use scalar::{binomial, Scalar};
pub use space::FrameSpace;
pub use sym::{
    sym_mode_coefficient, sym_mode_coefficient_reference, symmetrize, SymElement, SymMonomial,
};
pub use vertex::{
    check_weak_associativity, for_each_field_action, for_each_field_term, mode_coefficient,
    vertex_operator, vertex_operator_reference, AssociativityMismatch, AssociativityReport,
    FieldTerm, FockLaurent,
};

/// Enumerates the creation-word basis of the given weight: all ways to
/// write `weight` as an ordered sum of positive levels, each carrying any
/// of `dim` frame indices.
pub fn weight_basis(dim: usize, weight: i64) -> Vec<FockMonomial> {
    fn build(dim: usize, remaining: i64, prefix: &mut Vec<(usize, i64)>, out: &mut Vec<FockMonomial>) {
        if remaining == 0 {
            out.push(FockMonomial::new(prefix.clone()));
            return;
        }
        for n in 1..=remaining {
            for idx in 0..dim {
                prefix.push((idx, n));
                build(dim, remaining - n, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    build(dim, weight, &mut Vec::new(), &mut out);
    out
}

/// The basis monomials of every weight up to and including `max_weight`.
pub fn basis_up_to_weight(dim: usize, max_weight: i64) -> Vec<FockMonomial> {
    (0..=max_weight).flat_map(|w| weight_basis(dim, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_counts_d2() {
        // Ordered compositions with 2 colors per part: 1, 2, 6, 18, 54, ...
        let counts: Vec<usize> = (0..=4).map(|w| weight_basis(2, w).len()).collect();
        assert_eq!(counts, vec![1, 2, 6, 18, 54]);
        assert_eq!(basis_up_to_weight(2, 3).len(), 27);
    }
}
