//! Ordered words of frame vectors and their exact linear combinations.
//! These are the candidates for parallel tensor fields: a word `e_i ⊗ e_j`
//! stands for the field with constant frame components.

use mosva_core::Scalar;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// An order-`m` word `e_{i1} ⊗ … ⊗ e_{im}` of frame indices. Order matters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TensorWord(pub Vec<usize>);

impl TensorWord {
    pub fn empty() -> Self {
        TensorWord(Vec::new())
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &TensorWord) -> TensorWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        TensorWord(v)
    }

    /// Flat index into a row-major `d^m` component array.
    pub fn flat_index(&self, dim: usize) -> usize {
        self.0.iter().fold(0, |acc, &i| acc * dim + i)
    }
}

impl fmt::Display for TensorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, "⊗")?;
            }
            write!(f, "e{}", i + 1)?;
        }
        Ok(())
    }
}

/// A finite linear combination of tensor words with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TensorElement {
    terms: BTreeMap<TensorWord, Scalar>,
}

impl TensorElement {
    pub fn zero() -> Self {
        TensorElement::default()
    }

    pub fn word(w: TensorWord) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(w, Scalar::one());
        TensorElement { terms }
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        TensorElement::word(TensorWord(indices.to_vec()))
    }

    /// `Σ_i e_i ⊗ e_i`: the inverse-metric word in an orthonormal frame.
    pub fn metric_word(dim: usize) -> Self {
        let mut out = TensorElement::zero();
        for i in 0..dim {
            out.add_term(TensorWord(vec![i, i]), Scalar::one());
        }
        out
    }

    pub fn add_term(&mut self, w: TensorWord, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
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

    pub fn scale(&self, c: &Scalar) -> TensorElement {
        let mut out = TensorElement::zero();
        for (w, x) in &self.terms {
            out.add_term(w.clone(), c * x);
        }
        out
    }

    pub fn add(&self, other: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TensorWord, &Scalar)> {
        self.terms.iter()
    }

    /// The common order of all words, if homogeneous (`None` for zero).
    pub fn order(&self) -> Result<Option<usize>, crate::error::GeomError> {
        let mut it = self.terms.keys().map(|w| w.order());
        let Some(first) = it.next() else {
            return Ok(None);
        };
        if it.all(|o| o == first) {
            Ok(Some(first))
        } else {
            Err(crate::error::GeomError::MixedOrder)
        }
    }

    /// Dense complex component array of length `dim^order`.
    pub fn to_components(&self, dim: usize, order: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); dim.pow(order as u32)];
        for (w, c) in &self.terms {
            assert_eq!(w.order(), order);
            out[w.flat_index(dim)] += c.to_complex();
        }
        out
    }
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (w, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·{w}")?;
        }
        Ok(())
    }
}
