//! Holonomy samples and the fixed-point subspaces of their action on tensor
//! powers, plus the numerical certification of parallel tensor candidates.

use crate::chart::Chart;
use crate::covariant::{covariant_derivative_tensor, momentum_rep_apply};
use crate::error::GeomError;
use crate::function::SmoothFunction;
use crate::tensor::TensorElement;
use crate::transport::{holonomy_loop, preset_loops, LoopPath};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerance for fixedness of a tensor under sampled holonomy matrices.
pub const PARALLEL_FIXED_TOL: f64 = 1e-6;
/// Tolerance for the covariant-derivative spot check of a parallel
/// candidate.
pub const PARALLEL_DERIVATIVE_TOL: f64 = 1e-5;
/// Orthogonality tolerance for sampled holonomy matrices.
pub const HOLONOMY_ORTHOGONALITY_TOL: f64 = 1e-6;
/// Singular values below this threshold count as null directions.
pub const NULLSPACE_TOL: f64 = 1e-8;

/// A finite family of frame-coordinate holonomy matrices based at one point.
#[derive(Clone, Debug)]
pub struct HolonomySample {
    base: Vec<f64>,
    matrices: Vec<Vec<Vec<f64>>>,
    descriptions: Vec<String>,
}

impl HolonomySample {
    /// Transports the frame around each loop; every matrix must come back
    /// orthogonal to within [`HOLONOMY_ORTHOGONALITY_TOL`].
    pub fn from_loops(
        chart: &Chart,
        loops: &[LoopPath],
        steps_per_segment: usize,
    ) -> Result<Self, GeomError> {
        assert!(!loops.is_empty(), "empty loop family");
        let base = loops[0].start();
        let mut matrices = Vec::with_capacity(loops.len());
        let mut descriptions = Vec::with_capacity(loops.len());
        for path in loops {
            let m = holonomy_loop(chart, path, steps_per_segment)?;
            let d = m.len();
            for i in 0..d {
                for j in 0..d {
                    let dot: f64 = (0..d).map(|k| m[k][i] * m[k][j]).sum();
                    let want = f64::from(u8::from(i == j));
                    if (dot - want).abs() > HOLONOMY_ORTHOGONALITY_TOL {
                        return Err(GeomError::Numeric(format!(
                            "holonomy of `{}` is not orthogonal (AᵀA deviates by {:.3e})",
                            path.description,
                            (dot - want).abs()
                        )));
                    }
                }
            }
            matrices.push(m);
            descriptions.push(path.description.clone());
        }
        Ok(HolonomySample { base, matrices, descriptions })
    }

    /// The standard sample for a chart: rectangles at three scales plus two
    /// triangles.
    pub fn standard(chart: &Chart, steps_per_segment: usize) -> Result<Self, GeomError> {
        Self::from_loops(chart, &preset_loops(chart), steps_per_segment)
    }

    /// The trivial sample (identity only), for callers that explicitly want
    /// the full tensor algebra.
    pub fn identity(dim: usize, base: Vec<f64>) -> Self {
        let id: Vec<Vec<f64>> =
            (0..dim).map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        HolonomySample {
            base,
            matrices: vec![id],
            descriptions: vec!["identity".to_string()],
        }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn matrices(&self) -> &[Vec<Vec<f64>>] {
        &self.matrices
    }

    pub fn descriptions(&self) -> &[String] {
        &self.descriptions
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].len()
    }

    /// A sample restricted to the first `n` loops (nested subfamilies).
    pub fn truncated(&self, n: usize) -> HolonomySample {
        HolonomySample {
            base: self.base.clone(),
            matrices: self.matrices[..n.min(self.matrices.len())].to_vec(),
            descriptions: self.descriptions[..n.min(self.descriptions.len())].to_vec(),
        }
    }
}

/// Applies `A^{⊗m}` to a flat tensor component vector.
fn tensor_power_apply(a: &[Vec<f64>], m: usize, v: &[f64]) -> Vec<f64> {
    let d = a.len();
    let mut cur = v.to_vec();
    // Contract one slot at a time: slot r runs over strides of d^(m-1-r).
    for r in 0..m {
        let stride = d.pow((m - 1 - r) as u32);
        let mut next = vec![0.0; cur.len()];
        for (idx, val) in cur.iter().enumerate() {
            if *val == 0.0 {
                continue;
            }
            let digit = (idx / stride) % d;
            let rem = idx - digit * stride;
            for (row, arow) in a.iter().enumerate() {
                let w = arow[digit];
                if w != 0.0 {
                    next[rem + row * stride] += w * val;
                }
            }
        }
        cur = next;
    }
    cur
}

/// Orthonormal basis of the order-`m` tensors fixed by every sampled
/// matrix: the nullspace of the stacked system `(A^{⊗m} - I)` computed by
/// SVD with threshold [`NULLSPACE_TOL`]. Each returned vector is verified
/// fixed to within [`PARALLEL_FIXED_TOL`].
pub fn invariant_tensors(sample: &HolonomySample, m: usize) -> Vec<Vec<f64>> {
    let d = sample.dim();
    let n = d.pow(m as u32);
    let rows = sample.matrices.len() * n;
    let mut stacked = DMatrix::<f64>::zeros(rows, n);
    for (li, a) in sample.matrices.iter().enumerate() {
        for col in 0..n {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            let image = tensor_power_apply(a, m, &e);
            for row in 0..n {
                stacked[(li * n + row, col)] =
                    image[row] - f64::from(u8::from(row == col));
            }
        }
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut basis = Vec::new();
    for (k, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma < NULLSPACE_TOL {
            basis.push(v_t.row(k).iter().copied().collect::<Vec<f64>>());
        }
    }
    // Rows of V^T beyond the number of singular values (rows > cols case
    // never hits this; cols > rows leaves implicit null directions).
    for k in svd.singular_values.len()..n {
        basis.push(v_t.row(k).iter().copied().collect::<Vec<f64>>());
    }
    for v in &basis {
        for a in &sample.matrices {
            let image = tensor_power_apply(a, m, v);
            let dev = image
                .iter()
                .zip(v)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(dev <= PARALLEL_FIXED_TOL, "nullspace vector not fixed ({dev:.3e})");
        }
    }
    basis
}

/// Max-norm distance of `v` from the span of an orthonormal `basis`.
pub fn distance_from_span(basis: &[Vec<f64>], v: &[f64]) -> f64 {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let unit: Vec<f64> = v.iter().map(|x| x / norm).collect();
    let mut residual = unit.clone();
    for b in basis {
        let dot: f64 = b.iter().zip(&unit).map(|(x, y)| x * y).sum();
        for (r, bi) in residual.iter_mut().zip(b) {
            *r -= dot * bi;
        }
    }
    residual.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Certifies a tensor element as parallel: fixed by every sampled holonomy
/// matrix to within [`PARALLEL_FIXED_TOL`], and with covariant derivative
/// below [`PARALLEL_DERIVATIVE_TOL`] at five seeded interior points.
pub fn certify_parallel(
    word: &TensorElement,
    chart: &Chart,
    sample: &HolonomySample,
) -> Result<(), GeomError> {
    let Some(m) = word.order()? else {
        return Ok(());
    };
    let d = chart.dim();
    let comps = word.to_components(d, m);
    let real: Vec<f64> = comps.iter().map(|c| c.re).collect();
    let imag: Vec<f64> = comps.iter().map(|c| c.im).collect();
    for (a, desc) in sample.matrices.iter().zip(&sample.descriptions) {
        for part in [&real, &imag] {
            let image = tensor_power_apply(a, m, part);
            let dev = image
                .iter()
                .zip(part)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if dev > PARALLEL_FIXED_TOL {
                return Err(GeomError::NotParallel(format!(
                    "moved by holonomy of `{desc}` ({dev:.3e})"
                )));
            }
        }
    }

    // Covariant-derivative spot check at seeded points and directions.
    let field = {
        let comps = comps.clone();
        move |_: &[f64]| comps.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let x: Vec<f64> = chart
            .domain()
            .iter()
            .map(|&(lo, hi)| {
                let pad = 0.1 * (hi - lo);
                rng.gen_range(lo + pad..hi - pad)
            })
            .collect();
        for b in 0..d {
            let mut dir = vec![0.0; d];
            dir[b] = 1.0;
            let deriv = covariant_derivative_tensor(&field, m, &dir, chart, &x)?;
            let dev = deriv.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if dev > PARALLEL_DERIVATIVE_TOL {
                return Err(GeomError::NotParallel(format!(
                    "covariant derivative {dev:.3e} at {x:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Max grid error of the homomorphism property
/// `rep(X ⊗ Y) f = rep(X)(rep(Y) f)` for a certified-parallel `Y`.
pub fn rep_homomorphism_error(
    x_word: &TensorElement,
    y_word: &TensorElement,
    f: &SmoothFunction,
    chart: &Chart,
    sample: &HolonomySample,
    grid_per_axis: usize,
) -> Result<f64, GeomError> {
    certify_parallel(y_word, chart, sample)?;
    let combined = tensor_product(x_word, y_word);
    let lhs = momentum_rep_apply(&combined, f, chart)?;
    let inner = momentum_rep_apply(y_word, f, chart)?;
    let rhs = momentum_rep_apply(x_word, &inner, chart)?;
    let mut max_err: f64 = 0.0;
    for x in chart.interior_grid(grid_per_axis) {
        let diff: Complex64 = lhs.eval(&x) - rhs.eval(&x);
        max_err = max_err.max(diff.norm());
    }
    Ok(max_err)
}

/// The product word `X ⊗ Y` with multiplied coefficients.
pub fn tensor_product(x: &TensorElement, y: &TensorElement) -> TensorElement {
    let mut out = TensorElement::zero();
    for (wx, cx) in x.terms() {
        for (wy, cy) in y.terms() {
            out.add_term(wx.concat(wy), cx * cy);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle for SO(2)-invariant dimensions: words in the two weight-±1
    /// eigenvectors are invariant iff the weights sum to zero.
    fn so2_invariant_count(m: usize) -> usize {
        (0..(1usize << m))
            .filter(|mask| 2 * (mask.count_ones() as i64) == m as i64)
            .count()
    }

    fn rotation_sample(angles: &[f64]) -> HolonomySample {
        let matrices = angles
            .iter()
            .map(|a| {
                vec![vec![a.cos(), -a.sin()], vec![a.sin(), a.cos()]]
            })
            .collect();
        HolonomySample {
            base: vec![0.0, 0.0],
            matrices,
            descriptions: angles.iter().map(|a| format!("rot({a})")).collect(),
        }
    }

    #[test]
    fn identity_sample_has_full_space() {
        let sample = HolonomySample::identity(2, vec![0.0, 0.0]);
        assert_eq!(invariant_tensors(&sample, 1).len(), 2);
        assert_eq!(invariant_tensors(&sample, 2).len(), 4);
    }

    #[test]
    fn generic_rotation_dimensions_match_weight_oracle() {
        let sample = rotation_sample(&[0.7, 1.9]);
        for m in 1..=4 {
            let dim = invariant_tensors(&sample, m).len();
            assert_eq!(dim, so2_invariant_count(m), "order {m}");
        }
        assert_eq!(so2_invariant_count(1), 0);
        assert_eq!(so2_invariant_count(2), 2);
        assert_eq!(so2_invariant_count(3), 0);
        assert_eq!(so2_invariant_count(4), 6);
    }

    #[test]
    fn metric_word_lies_in_invariant_span() {
        let sample = rotation_sample(&[0.7, 1.9, 2.4]);
        let basis = invariant_tensors(&sample, 2);
        let g = TensorElement::metric_word(2).to_components(2, 2);
        let real: Vec<f64> = g.iter().map(|c| c.re).collect();
        assert!(distance_from_span(&basis, &real) < 1e-10);
    }

    #[test]
    fn enlarging_the_sample_never_increases_dimensions() {
        let sample = rotation_sample(&[0.0, 0.9, 2.2, 0.4]);
        for m in 1..=4 {
            let mut prev = usize::MAX;
            for n in 1..=4 {
                let dim = invariant_tensors(&sample.truncated(n), m).len();
                assert!(dim <= prev, "order {m}: {dim} after {n} loops");
                prev = dim;
            }
        }
    }

    #[test]
    fn sphere_sample_certifies_metric_word_only() {
        let chart = Chart::sphere();
        let sample = HolonomySample::standard(&chart, 400).unwrap();
        let g = TensorElement::metric_word(2);
        certify_parallel(&g, &chart, &sample).unwrap();
        // A bare frame vector is not parallel on the sphere.
        let e1 = TensorElement::from_indices(&[0]);
        assert!(matches!(
            certify_parallel(&e1, &chart, &sample),
            Err(GeomError::NotParallel(_))
        ));
        // Invariant dimensions for orders 1..4 on the sphere sample.
        for (m, want) in [(1, 0), (2, 2), (3, 0), (4, 6)] {
            assert_eq!(invariant_tensors(&sample, m).len(), want, "order {m}");
        }
    }

    #[test]
    fn torus_certifies_every_basis_word() {
        let chart = Chart::flat_torus();
        let sample = HolonomySample::standard(&chart, 100).unwrap();
        for indices in [vec![0], vec![1], vec![0, 1], vec![1, 0], vec![0, 0]] {
            certify_parallel(&TensorElement::from_indices(&indices), &chart, &sample).unwrap();
        }
    }

    #[test]
    fn empty_word_is_trivially_parallel() {
        let chart = Chart::sphere();
        let sample = HolonomySample::identity(2, chart.base_point().to_vec());
        certify_parallel(&TensorElement::word(Default::default()), &chart, &sample).unwrap();
    }
}
