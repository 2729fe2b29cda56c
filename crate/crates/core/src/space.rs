//! The finite-dimensional space of frame vectors together with its bilinear
//! form. All mode contractions read their pairing `(X, Y)` from here.

use crate::error::CoreError;
use crate::scalar::Scalar;

/// A `dim`-dimensional complex vector space with a symmetric bilinear form,
/// given by its Gram matrix in the frame basis. For an orthonormal frame the
/// form is the identity.
#[derive(Clone, Debug)]
pub struct FrameSpace {
    dim: usize,
    form: Vec<Vec<Scalar>>,
}

impl FrameSpace {
    /// Standard space with the identity form.
    pub fn orthonormal(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let form = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { Scalar::one() } else { Scalar::zero() })
                    .collect()
            })
            .collect();
        FrameSpace { dim, form }
    }

    pub fn with_form(form: Vec<Vec<Scalar>>) -> Result<Self, CoreError> {
        let dim = form.len();
        if dim == 0 || form.iter().any(|row| row.len() != dim) {
            return Err(CoreError::NonSymmetricForm);
        }
        for i in 0..dim {
            for j in 0..i {
                if form[i][j] != form[j][i] {
                    return Err(CoreError::NonSymmetricForm);
                }
            }
        }
        Ok(FrameSpace { dim, form })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The pairing of basis vectors, `(e_i, e_j)`.
    pub fn pair(&self, i: usize, j: usize) -> &Scalar {
        &self.form[i][j]
    }

    /// Bilinear extension of the pairing to coordinate vectors.
    pub fn pair_vectors(&self, u: &[Scalar], v: &[Scalar]) -> Scalar {
        let mut acc = Scalar::zero();
        for i in 0..self.dim {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if v[j].is_zero() {
                    continue;
                }
                acc += &(&(&u[i] * &v[j]) * &self.form[i][j]);
            }
        }
        acc
    }

    /// Exact inverse of the form matrix. Fails on a singular form.
    pub fn inverse_form(&self) -> Result<Vec<Vec<Scalar>>, CoreError> {
        invert_matrix(&self.form).ok_or(CoreError::SingularMatrix)
    }

    pub fn is_identity_form(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let want = if i == j { Scalar::one() } else { Scalar::zero() };
                self.form[i][j] == want
            })
        })
    }
}

/// Exact Gauss-Jordan inverse over the scalar field; `None` if singular.
pub(crate) fn invert_matrix(m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut inv: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Scalar::one() } else { Scalar::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].inv();
        for j in 0..n {
            a[col][j] = &a[col][j] * &p;
            inv[col][j] = &inv[col][j] * &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let da = &factor * &a[col][j];
                let di = &factor * &inv[col][j];
                a[r][j] -= &da;
                inv[r][j] -= &di;
            }
        }
    }
    Some(inv)
}

/// Exact determinant, used to reject singular linear maps.
pub(crate) fn determinant(m: &[Vec<Scalar>]) -> Scalar {
    let n = m.len();
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut det = Scalar::one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(p) => p,
            None => return Scalar::zero(),
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det = &det * &a[col][col];
        let p = a[col][col].inv();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &p;
            for j in col..n {
                let d = &factor * &a[col][j];
                a[r][j] -= &d;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_symmetric() {
        let form = vec![
            vec![Scalar::one(), Scalar::from_int(2)],
            vec![Scalar::from_int(3), Scalar::one()],
        ];
        assert!(FrameSpace::with_form(form).is_err());
    }

    #[test]
    fn inverse_of_diagonal_form() {
        let form = vec![
            vec![Scalar::from_int(2), Scalar::zero()],
            vec![Scalar::zero(), Scalar::from_int(4)],
        ];
        let space = FrameSpace::with_form(form).unwrap();
        let inv = space.inverse_form().unwrap();
        assert_eq!(inv[0][0], Scalar::from_ratio(1, 2));
        assert_eq!(inv[1][1], Scalar::from_ratio(1, 4));
        assert_eq!(inv[0][1], Scalar::zero());
    }

    #[test]
    fn determinant_and_singularity() {
        let singular = vec![
            vec![Scalar::one(), Scalar::from_int(2)],
            vec![Scalar::from_int(2), Scalar::from_int(4)],
        ];
        assert_eq!(determinant(&singular), Scalar::zero());
        assert!(invert_matrix(&singular).is_none());
    }
}
