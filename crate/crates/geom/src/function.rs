//! Smooth complex-valued functions on a chart domain.
//!
//! A function is either a complex linear combination of parsed symbolic
//! expressions — closed under differentiation, which is what keeps the
//! covariant-derivative machinery analytic — or an opaque native callback,
//! differentiated by finite differences.

use crate::chart::Chart;
use crate::error::GeomError;
use crate::expr::{self, Expr};
use num_complex::Complex64;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) type NativeFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub(crate) enum FuncRepr {
    /// Σ cᵢ·exprᵢ with complex coefficients over real expressions.
    Symbolic(Vec<(Complex64, Arc<Expr>)>),
    Native(NativeFn),
}

/// A smooth function handle. Identity (`id`) distinguishes handles in
/// symbolic module computations; two handles are the same function only if
/// they share an id.
#[derive(Clone)]
pub struct SmoothFunction {
    id: u64,
    label: String,
    pub(crate) repr: FuncRepr,
}

impl SmoothFunction {
    fn fresh_id() -> u64 {
        NEXT_ID.fetch_add(1, Ordering::Relaxed)
    }

    /// Parses an expression in the chart's coordinates.
    pub fn parse(src: &str, chart: &Chart) -> Result<Self, GeomError> {
        let expr = expr::parse(src, chart.coords())?;
        Ok(SmoothFunction {
            id: Self::fresh_id(),
            label: src.to_string(),
            repr: FuncRepr::Symbolic(vec![(Complex64::new(1.0, 0.0), expr)]),
        })
    }

    pub fn from_expr(expr: Arc<Expr>, label: impl Into<String>) -> Self {
        SmoothFunction {
            id: Self::fresh_id(),
            label: label.into(),
            repr: FuncRepr::Symbolic(vec![(Complex64::new(1.0, 0.0), expr)]),
        }
    }

    pub(crate) fn from_parts(
        parts: Vec<(Complex64, Arc<Expr>)>,
        label: impl Into<String>,
    ) -> Self {
        let parts = parts
            .into_iter()
            .filter(|(c, e)| c.norm_sqr() != 0.0 && !e.is_zero())
            .collect();
        SmoothFunction { id: Self::fresh_id(), label: label.into(), repr: FuncRepr::Symbolic(parts) }
    }

    /// Wraps an opaque callback; derivatives of such functions fall back to
    /// finite differences.
    pub fn native(
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        SmoothFunction { id: Self::fresh_id(), label: label.into(), repr: FuncRepr::Native(Arc::new(f)) }
    }

    /// Re-wraps this function as an opaque callback (used by tests to force
    /// the finite-difference path on otherwise symbolic data).
    pub fn as_native(&self) -> Self {
        let inner = self.clone();
        SmoothFunction {
            id: Self::fresh_id(),
            label: format!("native({})", self.label),
            repr: FuncRepr::Native(Arc::new(move |x| inner.eval(x))),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match &self.repr {
            FuncRepr::Symbolic(parts) => parts
                .iter()
                .map(|(c, e)| c * e.eval(x))
                .sum(),
            FuncRepr::Native(f) => f(x),
        }
    }

    pub(crate) fn symbolic_parts(&self) -> Option<&[(Complex64, Arc<Expr>)]> {
        match &self.repr {
            FuncRepr::Symbolic(parts) => Some(parts),
            FuncRepr::Native(_) => None,
        }
    }

    /// True when the function is symbolically the zero function.
    pub fn is_identically_zero(&self) -> bool {
        match &self.repr {
            FuncRepr::Symbolic(parts) => parts.is_empty(),
            FuncRepr::Native(_) => false,
        }
    }

    /// `Σ coeffᵢ·fᵢ` as a new handle; symbolic whenever every input is.
    pub fn linear_combination(parts: &[(Complex64, SmoothFunction)]) -> SmoothFunction {
        let label = parts
            .iter()
            .map(|(c, f)| format!("({c})·{}", f.label))
            .collect::<Vec<_>>()
            .join(" + ");
        if parts.iter().all(|(_, f)| f.symbolic_parts().is_some()) {
            let mut out: Vec<(Complex64, Arc<Expr>)> = Vec::new();
            for (c, f) in parts {
                for (ci, e) in f.symbolic_parts().unwrap() {
                    out.push((c * ci, e.clone()));
                }
            }
            SmoothFunction::from_parts(out, label)
        } else {
            let owned: Vec<(Complex64, SmoothFunction)> = parts.to_vec();
            SmoothFunction::native(
                move |x| owned.iter().map(|(c, f)| c * f.eval(x)).sum(),
                label,
            )
        }
    }
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothFunction#{}[{}]", self.id, self.label)
    }
}
