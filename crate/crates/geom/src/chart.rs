//! Coordinate charts: a box domain, a metric, Christoffel symbols and an
//! orthonormal frame, with a symbolic backend for the built-in presets and
//! a numeric backend (finite differences + Gram-Schmidt) for caller-supplied
//! metrics.

use crate::error::GeomError;
use crate::expr::{self, Expr};
use std::f64::consts::PI;
use std::sync::Arc;

pub(crate) type MetricFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;
pub(crate) type ChristoffelFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<Vec<f64>>> + Send + Sync>;

/// Symbolic chart data; every entry is an expression in the chart
/// coordinates, so covariant derivatives of parsed functions stay analytic.
#[derive(Clone)]
pub struct SymbolicChart {
    pub metric: Vec<Vec<Arc<Expr>>>,
    pub metric_inv: Vec<Vec<Arc<Expr>>>,
    /// `christoffel[k][i][j]` = Γ^k_{ij}.
    pub christoffel: Vec<Vec<Vec<Arc<Expr>>>>,
    /// `frame[i][a]`: the orthonormal field E_i = Σ_a frame[i][a] ∂_a.
    pub frame: Vec<Vec<Arc<Expr>>>,
    /// Inverse of the frame coefficient matrix (coordinate → frame).
    pub frame_inv: Vec<Vec<Arc<Expr>>>,
    pub sqrt_det: Arc<Expr>,
}

#[derive(Clone)]
pub(crate) enum Backend {
    Symbolic(SymbolicChart),
    Numeric { metric: MetricFn, christoffel: Option<ChristoffelFn> },
}

/// A single coordinate chart with an axis-aligned box domain.
#[derive(Clone)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    /// Effective domain box: singular coordinate values are already outside.
    domain: Vec<(f64, f64)>,
    /// Periods of periodic axes (`None` entries are non-periodic).
    periods: Vec<Option<f64>>,
    base_point: Vec<f64>,
    fd_step: f64,
    pub(crate) backend: Backend,
}

/// Default margin kept between chart boxes and coordinate singularities.
pub const SINGULARITY_MARGIN: f64 = 0.1;

impl Chart {
    /// Looks up a built-in manifold preset by name.
    pub fn preset(name: &str) -> Result<Chart, GeomError> {
        match name.to_ascii_lowercase().as_str() {
            "r2" | "flat" | "plane" => Ok(Self::flat_plane()),
            "torus" | "t2" => Ok(Self::flat_torus()),
            "s2" | "sphere" => Ok(Self::sphere()),
            "h2" | "halfplane" | "hyperbolic" => Ok(Self::half_plane()),
            other => Err(GeomError::UnknownManifold(other.to_string())),
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["r2", "torus", "s2", "h2"]
    }

    fn symbolic(
        name: &str,
        coords: &[&str],
        domain: Vec<(f64, f64)>,
        periods: Vec<Option<f64>>,
        base_point: Vec<f64>,
        metric: &[&[&str]],
        christoffel: &[(usize, usize, usize, &str)],
        frame: &[&[&str]],
        frame_inv: &[&[&str]],
        metric_inv: &[&[&str]],
        sqrt_det: &str,
    ) -> Chart {
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let d = coords.len();
        let names = coords.clone();
        let p = move |src: &str| expr::parse(src, &names).expect("preset expression");
        let grid = |rows: &[&[&str]]| -> Vec<Vec<Arc<Expr>>> {
            rows.iter().map(|row| row.iter().map(|s| p(s)).collect()).collect()
        };
        let mut gamma = vec![vec![vec![expr::num(0.0); d]; d]; d];
        for &(k, i, j, src) in christoffel {
            gamma[k][i][j] = p(src);
        }
        Chart {
            name: name.to_string(),
            coords,
            domain,
            periods,
            base_point,
            fd_step: 1e-3,
            backend: Backend::Symbolic(SymbolicChart {
                metric: grid(metric),
                metric_inv: grid(metric_inv),
                christoffel: gamma,
                frame: grid(frame),
                frame_inv: grid(frame_inv),
                sqrt_det: p(sqrt_det),
            }),
        }
    }

    /// Flat Euclidean plane.
    pub fn flat_plane() -> Chart {
        Chart::symbolic(
            "r2",
            &["x", "y"],
            vec![(-5.0, 5.0), (-5.0, 5.0)],
            vec![None, None],
            vec![0.25, 0.4],
            &[&["1", "0"], &["0", "1"]],
            &[],
            &[&["1", "0"], &["0", "1"]],
            &[&["1", "0"], &["0", "1"]],
            &[&["1", "0"], &["0", "1"]],
            "1",
        )
    }

    /// Flat torus: the unit square with both axes periodic.
    pub fn flat_torus() -> Chart {
        Chart::symbolic(
            "torus",
            &["x", "y"],
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![Some(1.0), Some(1.0)],
            vec![0.2, 0.3],
            &[&["1", "0"], &["0", "1"]],
            &[],
            &[&["1", "0"], &["0", "1"]],
            &[&["1", "0"], &["0", "1"]],
            &[&["1", "0"], &["0", "1"]],
            "1",
        )
    }

    /// Round unit sphere in colatitude/longitude coordinates, poles excluded
    /// by the domain margin.
    pub fn sphere() -> Chart {
        // Base point: first vertex of the rotated right-angled triangle used
        // by the holonomy loop family (see transport::preset_loops).
        let theta0 = (1.0f64 / 3.0f64.sqrt()).acos();
        Chart::symbolic(
            "s2",
            &["theta", "phi"],
            vec![(SINGULARITY_MARGIN, PI - SINGULARITY_MARGIN), (-10.0, 10.0)],
            vec![None, Some(2.0 * PI)],
            vec![theta0, PI / 6.0],
            &[&["1", "0"], &["0", "sin(theta)^2"]],
            &[
                (0, 1, 1, "-sin(theta)*cos(theta)"),
                (1, 0, 1, "cos(theta)/sin(theta)"),
                (1, 1, 0, "cos(theta)/sin(theta)"),
            ],
            &[&["1", "0"], &["0", "1/sin(theta)"]],
            &[&["1", "0"], &["0", "sin(theta)"]],
            &[&["1", "0"], &["0", "1/sin(theta)^2"]],
            "sin(theta)",
        )
    }

    /// Hyperbolic upper half-plane with metric y⁻²·(dx² + dy²).
    pub fn half_plane() -> Chart {
        Chart::symbolic(
            "h2",
            &["x", "y"],
            vec![(-5.0, 5.0), (SINGULARITY_MARGIN, 10.0)],
            vec![None, None],
            vec![0.0, 1.0],
            &[&["1/y^2", "0"], &["0", "1/y^2"]],
            &[
                (0, 0, 1, "-1/y"),
                (0, 1, 0, "-1/y"),
                (1, 0, 0, "1/y"),
                (1, 1, 1, "-1/y"),
            ],
            &[&["y", "0"], &["0", "y"]],
            &[&["1/y", "0"], &["0", "1/y"]],
            &[&["y^2", "0"], &["0", "y^2"]],
            "1/y^2",
        )
    }

    /// A chart backed only by a metric callback; Christoffel symbols come
    /// from finite differences unless an analytic callback is supplied.
    pub fn numeric(
        name: impl Into<String>,
        coords: Vec<String>,
        domain: Vec<(f64, f64)>,
        base_point: Vec<f64>,
        metric: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
        christoffel: Option<ChristoffelFn>,
    ) -> Chart {
        let periods = vec![None; coords.len()];
        Chart {
            name: name.into(),
            coords,
            domain,
            periods,
            base_point,
            fd_step: 1e-3,
            backend: Backend::Numeric { metric: Arc::new(metric), christoffel },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn with_fd_step(mut self, h: f64) -> Chart {
        self.fd_step = h;
        self
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    pub fn symbolic_data(&self) -> Option<&SymbolicChart> {
        match &self.backend {
            Backend::Symbolic(s) => Some(s),
            Backend::Numeric { .. } => None,
        }
    }

    /// True if `x` lies in the domain with `extra` slack from every wall;
    /// periodic axes always pass.
    pub fn contains(&self, x: &[f64], extra: f64) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.domain).zip(&self.periods).all(|((&xi, &(lo, hi)), period)| {
                period.is_some() || (xi >= lo + extra && xi <= hi - extra)
            })
    }

    pub(crate) fn require_inside(&self, x: &[f64], extra: f64) -> Result<(), GeomError> {
        if self.contains(x, extra) {
            Ok(())
        } else {
            Err(GeomError::OutsideDomain { chart: self.name.clone(), point: x.to_vec() })
        }
    }

    /// Metric matrix at a point.
    pub fn metric_at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.backend {
            Backend::Symbolic(s) => {
                s.metric.iter().map(|row| row.iter().map(|e| e.eval(x)).collect()).collect()
            }
            Backend::Numeric { metric, .. } => metric(x),
        }
    }

    /// Γ^k_{ij} at a point: analytic for symbolic charts or when an analytic
    /// callback exists, otherwise 4th-order central differences of the
    /// metric.
    pub fn christoffel_at(&self, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>, GeomError> {
        self.require_inside(x, 0.0)?;
        match &self.backend {
            Backend::Symbolic(s) => Ok(s
                .christoffel
                .iter()
                .map(|m| m.iter().map(|row| row.iter().map(|e| e.eval(x)).collect()).collect())
                .collect()),
            Backend::Numeric { metric, christoffel } => {
                if let Some(gamma) = christoffel {
                    return Ok(gamma(x));
                }
                self.require_inside(x, 2.5 * self.fd_step)?;
                Ok(christoffel_from_metric(&**metric, x, self.dim(), self.fd_step))
            }
        }
    }

    /// Orthonormal frame rows `E_i` in coordinate components,
    /// Gram-Schmidt-ordered.
    pub fn frame_at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.backend {
            Backend::Symbolic(s) => {
                s.frame.iter().map(|row| row.iter().map(|e| e.eval(x)).collect()).collect()
            }
            Backend::Numeric { metric, .. } => gram_schmidt(&metric(x)),
        }
    }

    /// Coordinate → frame conversion matrix `M` at `x`: a coordinate vector
    /// `V^a` has frame components `T^i = Σ_a M[i][a] V^a`.
    pub fn frame_inv_at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.backend {
            Backend::Symbolic(s) => {
                s.frame_inv.iter().map(|row| row.iter().map(|e| e.eval(x)).collect()).collect()
            }
            Backend::Numeric { .. } => {
                let inv = invert_small(&self.frame_at(x)).expect("frame is invertible");
                let d = inv.len();
                (0..d).map(|i| (0..d).map(|a| inv[a][i]).collect()).collect()
            }
        }
    }

    /// An n×n (per axis) grid of interior points.
    pub fn interior_grid(&self, n: usize) -> Vec<Vec<f64>> {
        assert!(n >= 1);
        let d = self.dim();
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                let (lo, hi) = self.domain[a];
                let (lo, hi) = (lo + 0.08 * (hi - lo), hi - 0.08 * (hi - lo));
                (0..n)
                    .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(n.pow(d as u32));
        let mut idx = vec![0usize; d];
        loop {
            out.push((0..d).map(|a| axes[a][idx[a]]).collect());
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < n {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == d {
                    return out;
                }
            }
        }
    }
}

/// Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} - ∂_l g_{ij}) with 4th-order
/// central differences for the metric derivatives.
pub(crate) fn christoffel_from_metric(
    metric: &(dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync),
    x: &[f64],
    d: usize,
    h: f64,
) -> Vec<Vec<Vec<f64>>> {
    let mut dg = vec![vec![vec![0.0; d]; d]; d]; // dg[l][i][j] = ∂_l g_ij
    for l in 0..d {
        let mut shifted = |s: f64| {
            let mut y = x.to_vec();
            y[l] += s;
            metric(&y)
        };
        let (p2, p1, m1, m2) =
            (shifted(2.0 * h), shifted(h), shifted(-h), shifted(-2.0 * h));
        for i in 0..d {
            for j in 0..d {
                dg[l][i][j] =
                    (-p2[i][j] + 8.0 * p1[i][j] - 8.0 * m1[i][j] + m2[i][j]) / (12.0 * h);
            }
        }
    }
    let ginv = invert_small(&metric(x)).expect("metric is nondegenerate");
    let mut gamma = vec![vec![vec![0.0; d]; d]; d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * acc;
            }
        }
    }
    gamma
}

/// Orthonormalizes the coordinate basis against `g` in index order; returns
/// frame rows in coordinate components.
pub(crate) fn gram_schmidt(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = g.len();
    let pair = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += u[i] * g[i][j] * v[j];
            }
        }
        acc
    };
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d);
    for a in 0..d {
        let mut v = vec![0.0; d];
        v[a] = 1.0;
        for e in &frame {
            let c = pair(&v, e);
            for i in 0..d {
                v[i] -= c * e[i];
            }
        }
        let n = pair(&v, &v).sqrt();
        for vi in &mut v {
            *vi /= n;
        }
        frame.push(v);
    }
    frame
}

/// Gauss-Jordan inverse for the small matrices that appear here.
pub(crate) fn invert_small(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_lookup() {
        for name in Chart::preset_names() {
            assert!(Chart::preset(name).is_ok());
        }
        assert!(matches!(Chart::preset("banana"), Err(GeomError::UnknownManifold(_))));
    }

    #[test]
    fn flat_christoffels_vanish() {
        let chart = Chart::flat_plane();
        let gamma = chart.christoffel_at(&[0.3, -1.2]).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(gamma[k][i][j], 0.0);
                }
            }
        }
        let torus = Chart::flat_torus();
        let gamma = torus.christoffel_at(&[0.4, 0.9]).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn sphere_christoffels_match_finite_differences() {
        let sym = Chart::sphere();
        let num = Chart::numeric(
            "s2-numeric",
            vec!["theta".into(), "phi".into()],
            vec![(SINGULARITY_MARGIN, PI - SINGULARITY_MARGIN), (-10.0, 10.0)],
            vec![1.0, 0.0],
            |x| {
                let s = x[0].sin();
                vec![vec![1.0, 0.0], vec![0.0, s * s]]
            },
            None,
        );
        for x in [[1.0, 0.3], [PI / 3.0, 2.0], [2.2, -1.0]] {
            let a = sym.christoffel_at(&x).unwrap();
            let b = num.christoffel_at(&x).unwrap();
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(
                            (a[k][i][j] - b[k][i][j]).abs() < 1e-9,
                            "Γ^{k}_{i}{j} at {x:?}: {} vs {}",
                            a[k][i][j],
                            b[k][i][j]
                        );
                    }
                }
            }
        }
        // Specific values: Γ^θ_{φφ} = -sinθcosθ, Γ^φ_{θφ} = cotθ.
        let x = [PI / 3.0, 0.5];
        let g = sym.christoffel_at(&x).unwrap();
        assert!((g[0][1][1] + x[0].sin() * x[0].cos()).abs() < 1e-14);
        assert!((g[1][0][1] - x[0].cos() / x[0].sin()).abs() < 1e-14);
    }

    #[test]
    fn levi_civita_identities_on_presets() {
        // Torsion-free and metric-compatible on sampled interior points.
        for name in Chart::preset_names() {
            let chart = Chart::preset(name).unwrap();
            for x in chart.interior_grid(3) {
                let gamma = chart.christoffel_at(&x).unwrap();
                let d = chart.dim();
                for k in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            assert!(
                                (gamma[k][i][j] - gamma[k][j][i]).abs() < 1e-12,
                                "{name}: torsion at {x:?}"
                            );
                        }
                    }
                }
                // ∇g = 0: ∂_l g_ij - Γ^m_{li} g_mj - Γ^m_{lj} g_im.
                let h = 1e-4;
                for l in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            let mut xp = x.clone();
                            let mut xm = x.clone();
                            xp[l] += h;
                            xm[l] -= h;
                            let dg = (chart.metric_at(&xp)[i][j]
                                - chart.metric_at(&xm)[i][j])
                                / (2.0 * h);
                            let g = chart.metric_at(&x);
                            let mut corr = 0.0;
                            for m in 0..d {
                                corr += gamma[m][l][i] * g[m][j] + gamma[m][l][j] * g[i][m];
                            }
                            assert!(
                                (dg - corr).abs() < 1e-6,
                                "{name}: ∇g ≠ 0 at {x:?} ({l},{i},{j}): {}",
                                dg - corr
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn frames_are_orthonormal() {
        for name in Chart::preset_names() {
            let chart = Chart::preset(name).unwrap();
            for x in chart.interior_grid(3) {
                let g = chart.metric_at(&x);
                let frame = chart.frame_at(&x);
                let d = chart.dim();
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = 0.0;
                        for a in 0..d {
                            for b in 0..d {
                                acc += frame[i][a] * g[a][b] * frame[j][b];
                            }
                        }
                        let want = f64::from(u8::from(i == j));
                        assert!(
                            (acc - want).abs() < 1e-10,
                            "{name}: g(E{i},E{j}) = {acc} at {x:?}"
                        );
                    }
                }
                // frame_inv converts coordinate components back to frame
                // components: applying it to each frame row gives a basis
                // vector.
                let inv = chart.frame_inv_at(&x);
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = 0.0;
                        for a in 0..d {
                            acc += inv[j][a] * frame[i][a];
                        }
                        let want = f64::from(u8::from(i == j));
                        assert!((acc - want).abs() < 1e-10, "{name}: frame_inv at {x:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn numeric_gram_schmidt_matches_symbolic_on_sphere() {
        let sym = Chart::sphere();
        let x = [1.1, 0.7];
        let g = sym.metric_at(&x);
        let frame = gram_schmidt(&g);
        let want = sym.frame_at(&x);
        for i in 0..2 {
            for a in 0..2 {
                assert!((frame[i][a] - want[i][a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn domain_and_periodicity() {
        let s2 = Chart::sphere();
        assert!(s2.contains(&[1.0, 0.0], 0.0));
        assert!(!s2.contains(&[0.05, 0.0], 0.0));
        assert!(s2.require_inside(&[0.05, 0.0], 0.0).is_err());
        let torus = Chart::flat_torus();
        assert!(torus.contains(&[7.3, -2.0], 0.0));
    }
}
