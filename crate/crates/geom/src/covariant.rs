//! Iterated covariant derivatives of smooth functions, the momentum
//! representation of tensor words, and the rough Laplacian.
//!
//! The m-th covariant derivative of `f` is built by the recursion
//!
//! ```text
//! (∇^{k+1} f)(X ⊗ 𝒳) = X((∇^k f)(𝒳)) - (∇^k f)(∇_X 𝒳),
//! ```
//!
//! i.e. in coordinates `T^{k+1}_{a₀ A} = ∂_{a₀} T^k_A - Σ_r Γ^b_{a₀ a_r}
//! T^k_{A[r→b]}`. On symbolic charts with symbolic functions the whole stack
//! is exact expression algebra; otherwise nested 4th-order central
//! differences are used. The momentum representation sends an order-m word
//! `𝒳` to the operator `f ↦ (√-1)^m (∇^m f)(𝒳)`.

use crate::chart::Chart;
use crate::error::GeomError;
use crate::expr::{self, Expr};
use crate::function::SmoothFunction;
use crate::tensor::TensorElement;
use num_complex::Complex64;
use std::sync::Arc;

/// Nested finite differences lose roughly six digits at depth four; deeper
/// stacks are refused.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

pub(crate) type Parts = Vec<(Complex64, Arc<Expr>)>;

fn parts_eval(parts: &Parts, x: &[f64]) -> Complex64 {
    parts.iter().map(|(c, e)| c * e.eval(x)).sum()
}

fn parts_diff(parts: &[(Complex64, Arc<Expr>)], a: usize) -> Parts {
    parts
        .iter()
        .filter_map(|(c, e)| {
            let d = e.diff(a);
            if d.is_zero() {
                None
            } else {
                Some((*c, d))
            }
        })
        .collect()
}

fn parts_mul_expr(parts: &[(Complex64, Arc<Expr>)], e: &Arc<Expr>) -> Parts {
    if e.is_zero() {
        return Parts::new();
    }
    parts.iter().map(|(c, p)| (*c, expr::mul(p.clone(), e.clone()))).collect()
}

fn parts_sub_assign(acc: &mut Parts, other: Parts) {
    for (c, e) in other {
        acc.push((-c, e));
    }
}

fn digit(index: usize, r: usize, k: usize, d: usize) -> usize {
    (index / d.pow((k - 1 - r) as u32)) % d
}

fn replace_digit(index: usize, r: usize, b: usize, k: usize, d: usize) -> usize {
    let place = d.pow((k - 1 - r) as u32) as i64;
    let old = digit(index, r, k, d) as i64;
    (index as i64 + (b as i64 - old) * place) as usize
}

/// Coordinate components of `∇^m f` as symbolic fields, row-major with the
/// outermost derivative index first.
fn covariant_tensor_symbolic(
    f_parts: &[(Complex64, Arc<Expr>)],
    m: usize,
    chart: &Chart,
) -> Option<Vec<Parts>> {
    let sym = chart.symbolic_data()?;
    let d = chart.dim();
    let mut t: Vec<Parts> = vec![f_parts.to_vec()];
    for k in 0..m {
        let mut next: Vec<Parts> = vec![Parts::new(); d.pow((k + 1) as u32)];
        for a0 in 0..d {
            for (rest, comp) in t.iter().enumerate() {
                let mut acc = parts_diff(comp, a0);
                for r in 0..k {
                    let a_r = digit(rest, r, k, d);
                    for b in 0..d {
                        let gamma = &sym.christoffel[b][a0][a_r];
                        if gamma.is_zero() {
                            continue;
                        }
                        let swapped = replace_digit(rest, r, b, k, d);
                        parts_sub_assign(&mut acc, parts_mul_expr(&t[swapped], gamma));
                    }
                }
                next[a0 * d.pow(k as u32) + rest] = acc;
            }
        }
        t = next;
    }
    Some(t)
}

/// One coordinate component of `∇^m f` by nested 4th-order central
/// differences; `multi` lists the indices outermost first.
fn covariant_component_fd(
    f: &SmoothFunction,
    multi: &[usize],
    chart: &Chart,
    x: &[f64],
    h: f64,
) -> Result<Complex64, GeomError> {
    if multi.is_empty() {
        return Ok(f.eval(x));
    }
    let a0 = multi[0];
    let rest = &multi[1..];
    let mut deriv = Complex64::new(0.0, 0.0);
    for (w, s) in [(-1.0, 2.0), (8.0, 1.0), (-8.0, -1.0), (1.0, -2.0)] {
        let mut y = x.to_vec();
        y[a0] += s * h;
        deriv += w * covariant_component_fd(f, rest, chart, &y, h)?;
    }
    let mut acc = deriv / (12.0 * h);
    if !rest.is_empty() {
        let gamma = chart.christoffel_at(x)?;
        let d = chart.dim();
        for r in 0..rest.len() {
            for b in 0..d {
                let coeff = gamma[b][a0][rest[r]];
                if coeff != 0.0 {
                    let mut swapped = rest.to_vec();
                    swapped[r] = b;
                    acc -= coeff * covariant_component_fd(f, &swapped, chart, x, h)?;
                }
            }
        }
    }
    Ok(acc)
}

fn coordinate_tensor_at(
    f: &SmoothFunction,
    m: usize,
    chart: &Chart,
    x: &[f64],
) -> Result<Vec<Complex64>, GeomError> {
    let d = chart.dim();
    if let Some(parts) = f.symbolic_parts() {
        if let Some(sym) = covariant_tensor_symbolic(parts, m, chart) {
            return Ok(sym.iter().map(|p| parts_eval(p, x)).collect());
        }
    }
    let h = chart.fd_step();
    let mut out = Vec::with_capacity(d.pow(m as u32));
    let mut multi = vec![0usize; m];
    loop {
        out.push(covariant_component_fd(f, &multi, chart, x, h)?);
        let mut r = m;
        loop {
            if r == 0 {
                return Ok(out);
            }
            r -= 1;
            multi[r] += 1;
            if multi[r] < d {
                break;
            }
            multi[r] = 0;
        }
    }
}

/// Contracts coordinate components into frame components at `x`.
fn to_frame_components(
    coord: &[Complex64],
    m: usize,
    frame: &[Vec<f64>],
    d: usize,
) -> Vec<Complex64> {
    if m == 0 {
        return coord.to_vec();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); d.pow(m as u32)];
    let total = d.pow(m as u32);
    for fi in 0..total {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ci, value) in coord.iter().enumerate() {
            let mut weight = 1.0;
            for r in 0..m {
                let i_r = digit(fi, r, m, d);
                let a_r = digit(ci, r, m, d);
                weight *= frame[i_r][a_r];
                if weight == 0.0 {
                    break;
                }
            }
            if weight != 0.0 {
                acc += value * weight;
            }
        }
        out[fi] = acc;
    }
    out
}

/// Frame components of `∇^m f` at `x` (row-major, outermost index first).
///
/// `∇⁰f = f(x)`; `∇¹f = df`; the order-2 tensor is the covariant Hessian.
pub fn iterated_covariant_derivative(
    f: &SmoothFunction,
    m: usize,
    chart: &Chart,
    x: &[f64],
) -> Result<Vec<Complex64>, GeomError> {
    if m > MAX_DERIVATIVE_ORDER {
        return Err(GeomError::OrderTooLarge { order: m, max: MAX_DERIVATIVE_ORDER });
    }
    chart.require_inside(x, margin_for(m, chart))?;
    let coord = coordinate_tensor_at(f, m, chart, x)?;
    Ok(to_frame_components(&coord, m, &chart.frame_at(x), chart.dim()))
}

fn margin_for(m: usize, chart: &Chart) -> f64 {
    // Stencil reach of the nested finite differences.
    2.5 * chart.fd_step() * m as f64
}

/// The momentum representation: sends an order-m word `𝒳` to the operator
/// `f ↦ (√-1)^m (∇^m f)(𝒳)`. The returned function is symbolic whenever the
/// chart and `f` are, which keeps repeated applications analytic.
pub fn momentum_rep_apply(
    word: &TensorElement,
    f: &SmoothFunction,
    chart: &Chart,
) -> Result<SmoothFunction, GeomError> {
    let Some(m) = word.order()? else {
        return Ok(SmoothFunction::from_parts(Parts::new(), "0"));
    };
    if m > MAX_DERIVATIVE_ORDER {
        return Err(GeomError::OrderTooLarge { order: m, max: MAX_DERIVATIVE_ORDER });
    }
    let d = chart.dim();
    let phase = mosva_core::Scalar::i_pow(m).to_complex();
    let label = format!("rep[{word}]({})", f.label());

    if let (Some(parts), Some(sym)) = (f.symbolic_parts(), chart.symbolic_data()) {
        let tensor = covariant_tensor_symbolic(parts, m, chart).expect("symbolic chart");
        let mut out: Parts = Parts::new();
        for (w, c) in word.terms() {
            let scale = phase * c.to_complex();
            for (ci, comp) in tensor.iter().enumerate() {
                // ∏_r frame coefficient e_{i_r}^{a_r} as one expression.
                let mut weight = expr::num(1.0);
                for (r, &i_r) in w.0.iter().enumerate() {
                    let a_r = digit(ci, r, m, d);
                    weight = expr::mul(weight, sym.frame[i_r][a_r].clone());
                }
                if weight.is_zero() {
                    continue;
                }
                for (c0, e) in parts_mul_expr(comp, &weight) {
                    out.push((scale * c0, e));
                }
            }
        }
        return Ok(SmoothFunction::from_parts(out, label));
    }

    // Opaque path: evaluate the tensor by finite differences on demand.
    let word = word.clone();
    let f = f.clone();
    let chart_name = chart.name().to_string();
    let chart = chart.clone();
    Ok(SmoothFunction::native(
        move |x| {
            let comps = iterated_covariant_derivative(&f, m, &chart, x)
                .unwrap_or_else(|e| panic!("momentum rep on `{chart_name}` failed: {e}"));
            let mut acc = Complex64::new(0.0, 0.0);
            for (w, c) in word.terms() {
                acc += c.to_complex() * comps[w.flat_index(chart.dim())];
            }
            phase * acc
        },
        label,
    ))
}

/// The rough Laplacian `Δf(x) = Σ_i (∇²f)(E_i, E_i)`: the frame trace of
/// the covariant Hessian.
pub fn laplacian(f: &SmoothFunction, chart: &Chart, x: &[f64]) -> Result<Complex64, GeomError> {
    let d = chart.dim();
    let hess = iterated_covariant_derivative(f, 2, chart, x)?;
    Ok((0..d).map(|i| hess[i * d + i]).sum())
}

/// Independent divergence-form route:
/// `Δf = |g|^{-1/2} ∂_a (|g|^{1/2} g^{ab} ∂_b f)`. Used as the oracle the
/// frame-trace Laplacian is checked against.
pub fn laplacian_coordinate(
    f: &SmoothFunction,
    chart: &Chart,
    x: &[f64],
) -> Result<Complex64, GeomError> {
    chart.require_inside(x, margin_for(2, chart))?;
    let d = chart.dim();
    if let (Some(parts), Some(sym)) = (f.symbolic_parts(), chart.symbolic_data()) {
        let mut total: Parts = Parts::new();
        for a in 0..d {
            let mut flux: Parts = Parts::new();
            for b in 0..d {
                let weight = expr::mul(sym.sqrt_det.clone(), sym.metric_inv[a][b].clone());
                for item in parts_mul_expr(&parts_diff(parts, b), &weight) {
                    flux.push(item);
                }
            }
            for item in parts_diff(&flux, a) {
                total.push(item);
            }
        }
        let inv_sqrt = expr::div(expr::num(1.0), sym.sqrt_det.clone());
        return Ok(parts_eval(&parts_mul_expr(&total, &inv_sqrt), x));
    }

    let h = chart.fd_step();
    let flux = |y: &[f64], a: usize| -> Result<Complex64, GeomError> {
        let g = chart.metric_at(y);
        let ginv = crate::chart::invert_small(&g)
            .ok_or_else(|| GeomError::Numeric("degenerate metric".into()))?;
        let det = determinant_small(&g);
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..d {
            if ginv[a][b] == 0.0 {
                continue;
            }
            let mut dfb = Complex64::new(0.0, 0.0);
            for (w, s) in [(-1.0, 2.0), (8.0, 1.0), (-8.0, -1.0), (1.0, -2.0)] {
                let mut z = y.to_vec();
                z[b] += s * h;
                dfb += w * f.eval(&z);
            }
            acc += ginv[a][b] * dfb / (12.0 * h);
        }
        Ok(det.sqrt() * acc)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..d {
        for (w, s) in [(-1.0, 2.0), (8.0, 1.0), (-8.0, -1.0), (1.0, -2.0)] {
            let mut y = x.to_vec();
            y[a] += s * h;
            total += w * flux(&y, a)?;
        }
    }
    let det = determinant_small(&chart.metric_at(x));
    Ok(total / (12.0 * h) / det.sqrt())
}

fn determinant_small(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => {
            let mut a = m.to_vec();
            let mut det = 1.0;
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
                    .unwrap();
                if a[pivot][col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    a.swap(col, pivot);
                    det = -det;
                }
                det *= a[col][col];
                for r in col + 1..n {
                    let f = a[r][col] / a[col][col];
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
            det
        }
    }
}

/// `∇_X T` at `x` for an order-m contravariant tensor field given by its
/// frame components, with `X` a coordinate-component direction vector.
/// Returns frame components. Order 0 is the directional derivative.
pub fn covariant_derivative_tensor(
    field: &(dyn Fn(&[f64]) -> Vec<Complex64> + Sync),
    order: usize,
    direction: &[f64],
    chart: &Chart,
    x: &[f64],
) -> Result<Vec<Complex64>, GeomError> {
    chart.require_inside(x, margin_for(1, chart))?;
    let d = chart.dim();
    let total = d.pow(order as u32);
    let coord_field = |y: &[f64]| -> Vec<Complex64> {
        let frame = chart.frame_at(y);
        let values = field(y);
        debug_assert_eq!(values.len(), total);
        let mut out = vec![Complex64::new(0.0, 0.0); total];
        for a_idx in 0..total {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i_idx, v) in values.iter().enumerate() {
                let mut weight = 1.0;
                for r in 0..order {
                    weight *= frame[digit(i_idx, r, order, d)][digit(a_idx, r, order, d)];
                    if weight == 0.0 {
                        break;
                    }
                }
                if weight != 0.0 {
                    acc += v * weight;
                }
            }
            out[a_idx] = acc;
        }
        out
    };

    let h = chart.fd_step();
    let gamma = chart.christoffel_at(x)?;
    let at_x = coord_field(x);
    let mut result_coord = vec![Complex64::new(0.0, 0.0); total];
    for (b, &xb) in direction.iter().enumerate() {
        if xb == 0.0 {
            continue;
        }
        // ∂_b of every component in one stencil sweep.
        let mut db = vec![Complex64::new(0.0, 0.0); total];
        for (w, s) in [(-1.0, 2.0), (8.0, 1.0), (-8.0, -1.0), (1.0, -2.0)] {
            let mut y = x.to_vec();
            y[b] += s * h;
            for (slot, v) in coord_field(&y).into_iter().enumerate() {
                db[slot] += w * v;
            }
        }
        for a_idx in 0..total {
            let mut acc = db[a_idx] / (12.0 * h);
            for r in 0..order {
                let a_r = digit(a_idx, r, order, d);
                for c in 0..d {
                    if gamma[a_r][b][c] != 0.0 {
                        let swapped = replace_digit(a_idx, r, c, order, d);
                        acc += gamma[a_r][b][c] * at_x[swapped];
                    }
                }
            }
            result_coord[a_idx] += xb * acc;
        }
    }

    // Back to frame components.
    let frame_inv = chart.frame_inv_at(x);
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    for i_idx in 0..total {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a_idx, v) in result_coord.iter().enumerate() {
            let mut weight = 1.0;
            for r in 0..order {
                weight *= frame_inv[digit(i_idx, r, order, d)][digit(a_idx, r, order, d)];
                if weight == 0.0 {
                    break;
                }
            }
            if weight != 0.0 {
                acc += v * weight;
            }
        }
        out[i_idx] = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_hessian_of_x_squared() {
        let chart = Chart::flat_plane();
        let f = SmoothFunction::parse("x^2", &chart).unwrap();
        let hess = iterated_covariant_derivative(&f, 2, &chart, &[0.7, -0.3]).unwrap();
        let want = [2.0, 0.0, 0.0, 0.0];
        for (got, want) in hess.iter().zip(want) {
            assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-15);
        }
        // Order 0 is evaluation.
        let v = iterated_covariant_derivative(&f, 0, &chart, &[2.0, 1.0]).unwrap();
        assert!((v[0].re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_hessian_trace_is_eigenvalue() {
        // f = cosθ is a degree-1 eigenfunction: Δf = -2f.
        let chart = Chart::sphere();
        let f = SmoothFunction::parse("cos(theta)", &chart).unwrap();
        for x in [[PI / 3.0, 0.4], [1.1, -0.2], [2.0, 2.0]] {
            let lap = laplacian(&f, &chart, &x).unwrap();
            assert!(
                (lap.re + 2.0 * x[0].cos()).abs() < 1e-12,
                "Δcosθ at {x:?}: {lap}"
            );
        }
    }

    #[test]
    fn laplacian_routes_agree_on_presets() {
        let cases: Vec<(&str, &str)> = vec![
            ("r2", "x^2+y^2"),
            ("r2", "sin(x)*exp(y)"),
            ("torus", "sin(2*pi*x)"),
            ("s2", "cos(theta)"),
            ("s2", "sin(theta)*cos(phi)"),
            ("h2", "log(y)"),
        ];
        for (name, src) in cases {
            let chart = Chart::preset(name).unwrap();
            let f = SmoothFunction::parse(src, &chart).unwrap();
            for x in chart.interior_grid(3) {
                let a = laplacian(&f, &chart, &x).unwrap();
                let b = laplacian_coordinate(&f, &chart, &x).unwrap();
                assert!(
                    (a - b).norm() < 1e-6,
                    "{name} {src} at {x:?}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn flat_laplacian_exact_value() {
        let chart = Chart::flat_plane();
        let f = SmoothFunction::parse("x^2+y^2", &chart).unwrap();
        let lap = laplacian(&f, &chart, &[0.3, 0.9]).unwrap();
        assert!((lap.re - 4.0).abs() < 1e-9 && lap.im.abs() < 1e-15);
    }

    #[test]
    fn torus_laplacian_of_sine() {
        let chart = Chart::flat_torus();
        let f = SmoothFunction::parse("sin(2*pi*x)", &chart).unwrap();
        let x = [0.1, 0.7];
        let lap = laplacian(&f, &chart, &x).unwrap();
        let want = -4.0 * PI * PI * (2.0 * PI * x[0]).sin();
        assert!((lap.re - want).abs() < 1e-9);
    }

    #[test]
    fn hessian_is_symmetric() {
        for (name, src) in [("s2", "sin(theta)*cos(phi)"), ("h2", "x*y"), ("r2", "exp(x*y)")] {
            let chart = Chart::preset(name).unwrap();
            let f = SmoothFunction::parse(src, &chart).unwrap();
            for x in chart.interior_grid(3) {
                let h = iterated_covariant_derivative(&f, 2, &chart, &x).unwrap();
                assert!((h[1] - h[2]).norm() < 1e-6, "{name} {src} at {x:?}");
            }
        }
    }

    #[test]
    fn momentum_rep_first_order_is_i_frame_derivative() {
        let chart = Chart::flat_plane();
        let f = SmoothFunction::parse("x^2", &chart).unwrap();
        let word = TensorElement::from_indices(&[0]);
        let g = momentum_rep_apply(&word, &f, &chart).unwrap();
        let x = [1.5, 0.0];
        let got = g.eval(&x);
        // i·∂_x(x²) = 3i at x = 1.5
        assert!((got - Complex64::new(0.0, 3.0)).norm() < 1e-12);
        // Empty word acts as the identity.
        let id = momentum_rep_apply(&TensorElement::word(Default::default()), &f, &chart).unwrap();
        assert!((id.eval(&x) - f.eval(&x)).norm() < 1e-15);
    }

    #[test]
    fn momentum_rep_second_order_phase() {
        // word e1⊗e1 on f = x² gives (√-1)²·2 = -2, constant.
        let chart = Chart::flat_plane();
        let f = SmoothFunction::parse("x^2", &chart).unwrap();
        let word = TensorElement::from_indices(&[0, 0]);
        let g = momentum_rep_apply(&word, &f, &chart).unwrap();
        for x in [[0.0, 0.0], [1.0, 2.0], [-0.4, 0.3]] {
            assert!((g.eval(&x) - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fd_path_matches_symbolic_path() {
        let chart = Chart::sphere();
        let f = SmoothFunction::parse("cos(theta)", &chart).unwrap();
        let native = f.as_native();
        let x = [1.2, 0.5];
        for m in 0..=2 {
            let sym = iterated_covariant_derivative(&f, m, &chart, &x).unwrap();
            let fd = iterated_covariant_derivative(&native, m, &chart, &x).unwrap();
            for (a, b) in sym.iter().zip(&fd) {
                assert!((a - b).norm() < 1e-7, "m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn order_cap_enforced() {
        let chart = Chart::flat_plane();
        let f = SmoothFunction::parse("x", &chart).unwrap();
        assert!(matches!(
            iterated_covariant_derivative(&f, 5, &chart, &[0.0, 0.0]),
            Err(GeomError::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn sphere_covariant_derivative_of_coordinate_field() {
        // ∇_{∂θ} ∂φ = cotθ · ∂φ. In frame components ∂φ = sinθ·E₂, so the
        // input field is (0, sinθ) and the result must be (0, cosθ).
        let chart = Chart::sphere();
        let x = [PI / 3.0, 1.0];
        let field = |y: &[f64]| vec![Complex64::new(0.0, 0.0), Complex64::new(y[0].sin(), 0.0)];
        let out = covariant_derivative_tensor(&field, 1, &[1.0, 0.0], &chart, &x).unwrap();
        assert!(out[0].norm() < 1e-9, "θ component {}", out[0]);
        assert!((out[1].re - x[0].cos()).abs() < 1e-9, "φ component {}", out[1]);
    }

    #[test]
    fn flat_tensor_derivative_is_componentwise() {
        let chart = Chart::flat_plane();
        let x = [0.2, 0.1];
        let field = |y: &[f64]| {
            vec![
                Complex64::new(y[0] * y[0], 0.0),
                Complex64::new(y[1], 0.0),
            ]
        };
        let out = covariant_derivative_tensor(&field, 1, &[1.0, 0.0], &chart, &x).unwrap();
        assert!((out[0].re - 2.0 * x[0]).abs() < 1e-10);
        assert!(out[1].norm() < 1e-10);
    }

    #[test]
    fn directional_derivative_of_function_order_zero() {
        let chart = Chart::flat_plane();
        let field = |y: &[f64]| vec![Complex64::new(y[0] * y[1], 0.0)];
        let out =
            covariant_derivative_tensor(&field, 0, &[0.0, 2.0], &chart, &[0.5, 0.25]).unwrap();
        assert!((out[0].re - 1.0).abs() < 1e-10);
    }
}
