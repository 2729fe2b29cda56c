//! The representation property: for a parallel word Y,
//! `rep(X ⊗ Y) f = rep(X)(rep(Y) f)` as operators on smooth functions.

use mosva_geom::{
    rep_homomorphism_error, Chart, GeomError, HolonomySample, SmoothFunction, TensorElement,
};

fn basis_words(dim: usize, max_order: usize) -> Vec<TensorElement> {
    let mut out = vec![TensorElement::word(Default::default())];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..dim {
                let mut v = w.clone();
                v.push(i);
                out.push(TensorElement::from_indices(&v));
                next.push(v);
            }
        }
        layer = next;
    }
    out
}

#[test]
fn torus_all_words_up_to_order_two() {
    let chart = Chart::flat_torus();
    let sample = HolonomySample::standard(&chart, 200).unwrap();
    let f = SmoothFunction::parse("sin(2*pi*x)*cos(2*pi*y)", &chart).unwrap();
    let words = basis_words(2, 2);
    for x_word in &words {
        for y_word in &words {
            let err = rep_homomorphism_error(x_word, y_word, &f, &chart, &sample, 5).unwrap();
            assert!(err < 1e-5, "X={x_word:?} Y={y_word:?}: {err}");
        }
    }
}

#[test]
fn torus_specific_value_matches_analytic_form() {
    // X = e1, Y = e1⊗e1, f = sin(2πx): both sides are -i·8π³·cos(2πx).
    let chart = Chart::flat_torus();
    let f = SmoothFunction::parse("sin(2*pi*x)", &chart).unwrap();
    let x_word = TensorElement::from_indices(&[0]);
    let y_word = TensorElement::from_indices(&[0, 0]);
    let combined = mosva_geom::invariant::tensor_product(&x_word, &y_word);
    let lhs = mosva_geom::momentum_rep_apply(&combined, &f, &chart).unwrap();
    let w = 2.0 * std::f64::consts::PI;
    for p in [[0.1, 0.4], [0.3, 0.8]] {
        let want = num_complex::Complex64::new(0.0, -1.0) * w.powi(3) * (w * p[0]).cos();
        assert!((lhs.eval(&p) - want).norm() < 1e-9, "{p:?}");
    }
}

#[test]
fn sphere_metric_word_is_parallel_and_homomorphic() {
    let chart = Chart::sphere();
    let sample = HolonomySample::standard(&chart, 400).unwrap();
    let f = SmoothFunction::parse("cos(theta)", &chart).unwrap();
    let metric_word = TensorElement::metric_word(2);
    for x_word in basis_words(2, 2) {
        let err =
            rep_homomorphism_error(&x_word, &metric_word, &f, &chart, &sample, 4).unwrap();
        assert!(err < 1e-4, "X={x_word:?}: {err}");
    }
}

#[test]
fn empty_parallel_word_gives_exact_agreement() {
    let chart = Chart::sphere();
    let sample = HolonomySample::standard(&chart, 300).unwrap();
    let f = SmoothFunction::parse("sin(theta)*cos(phi)", &chart).unwrap();
    let x_word = TensorElement::from_indices(&[0, 1]);
    let empty = TensorElement::word(Default::default());
    let err = rep_homomorphism_error(&x_word, &empty, &f, &chart, &sample, 4).unwrap();
    assert!(err < 1e-14, "error {err}");
}

#[test]
fn non_parallel_word_is_refused() {
    let chart = Chart::sphere();
    let sample = HolonomySample::standard(&chart, 300).unwrap();
    let f = SmoothFunction::parse("cos(theta)", &chart).unwrap();
    let e1 = TensorElement::from_indices(&[0]);
    let err = rep_homomorphism_error(&e1, &e1, &f, &chart, &sample, 3);
    assert!(matches!(err, Err(GeomError::NotParallel(_))));
}

/// Forcing the finite-difference path, halving the step must cut the
/// homomorphism error by at least 4 (the scheme is better than 2nd order).
#[test]
fn finite_difference_error_converges()
{
    let chart = Chart::sphere();
    let f = SmoothFunction::parse("cos(theta)", &chart).unwrap().as_native();
    let x_word = TensorElement::from_indices(&[0]);
    let metric_word = TensorElement::metric_word(2);
    let mut errors = Vec::new();
    for h in [0.04, 0.02] {
        let chart_h = chart.clone().with_fd_step(h);
        let sample = HolonomySample::standard(&chart_h, 300).unwrap();
        let err =
            rep_homomorphism_error(&x_word, &metric_word, &f, &chart_h, &sample, 3).unwrap();
        errors.push(err);
    }
    assert!(
        errors[0] > 4.0 * errors[1],
        "no convergence: h errors {errors:?}"
    );
}
