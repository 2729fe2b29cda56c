//! Parallel transport along piecewise-smooth curves and holonomy of closed
//! loops, integrated with classical 4th-order Runge-Kutta.

use crate::chart::Chart;
use crate::error::GeomError;
use std::sync::Arc;

type CurveFn = Arc<dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

/// A smooth curve segment `t ∈ [0,1] → (point, velocity)` in chart
/// coordinates.
#[derive(Clone)]
pub struct Segment {
    f: CurveFn,
}

impl Segment {
    pub fn new(f: impl Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static) -> Self {
        Segment { f: Arc::new(f) }
    }

    /// Straight coordinate segment from `a` to `b`.
    pub fn line(a: Vec<f64>, b: Vec<f64>) -> Self {
        let vel: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
        Segment::new(move |t| {
            (a.iter().zip(&vel).map(|(x, v)| x + t * v).collect(), vel.clone())
        })
    }

    /// Great-circle arc on the unit sphere between two unit 3-vectors, in
    /// (θ, φ) coordinates with φ unwrapped continuously along the arc.
    pub fn sphere_arc(a: [f64; 3], b: [f64; 3]) -> Self {
        let omega = dot3(a, b).clamp(-1.0, 1.0).acos();
        assert!(omega > 1e-9 && omega < std::f64::consts::PI - 1e-9, "degenerate arc");
        let point3 = move |t: f64| -> ([f64; 3], [f64; 3]) {
            let (sa, sb) = (((1.0 - t) * omega).sin(), (t * omega).sin());
            let s = omega.sin();
            let p = [
                (a[0] * sa + b[0] * sb) / s,
                (a[1] * sa + b[1] * sb) / s,
                (a[2] * sa + b[2] * sb) / s,
            ];
            let (ca, cb) = (((1.0 - t) * omega).cos(), (t * omega).cos());
            let dp = [
                omega * (-a[0] * ca + b[0] * cb) / s,
                omega * (-a[1] * ca + b[1] * cb) / s,
                omega * (-a[2] * ca + b[2] * cb) / s,
            ];
            (p, dp)
        };
        // Unwrap φ on a dense sample; evaluation snaps the raw angle to the
        // branch closest to the interpolated sample.
        let n = 256;
        let mut phis = Vec::with_capacity(n + 1);
        let mut prev: Option<f64> = None;
        for k in 0..=n {
            let (p, _) = point3(k as f64 / n as f64);
            let mut phi = p[1].atan2(p[0]);
            if let Some(q) = prev {
                while phi - q > std::f64::consts::PI {
                    phi -= 2.0 * std::f64::consts::PI;
                }
                while q - phi > std::f64::consts::PI {
                    phi += 2.0 * std::f64::consts::PI;
                }
            }
            phis.push(phi);
            prev = Some(phi);
        }
        Segment::new(move |t| {
            let (p, dp) = point3(t);
            let theta = p[2].clamp(-1.0, 1.0).acos();
            let raw = p[1].atan2(p[0]);
            let near = phis[((t * n as f64).round() as usize).min(n)];
            let turns = ((near - raw) / (2.0 * std::f64::consts::PI)).round();
            let phi = raw + 2.0 * std::f64::consts::PI * turns;
            let sin_theta = theta.sin();
            let dtheta = -dp[2] / sin_theta;
            let dphi = (p[0] * dp[1] - p[1] * dp[0]) / (p[0] * p[0] + p[1] * p[1]);
            (vec![theta, phi], vec![dtheta, dphi])
        })
    }

    /// Constant-colatitude circle arc θ = θ₀, φ from `phi0` to `phi1`.
    pub fn colatitude_arc(theta0: f64, phi0: f64, phi1: f64) -> Self {
        Segment::new(move |t| {
            (vec![theta0, phi0 + t * (phi1 - phi0)], vec![0.0, phi1 - phi0])
        })
    }

    pub fn at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        (self.f)(t)
    }
}

/// A closed piecewise-smooth loop.
#[derive(Clone)]
pub struct LoopPath {
    pub segments: Vec<Segment>,
    pub description: String,
}

impl LoopPath {
    pub fn new(segments: Vec<Segment>, description: impl Into<String>) -> Self {
        LoopPath { segments, description: description.into() }
    }

    /// Axis-aligned rectangle with `corner` as base point.
    pub fn rectangle(corner: &[f64], sides: &[f64]) -> Self {
        let (a, b) = (corner.to_vec(), sides.to_vec());
        let p = |dx: f64, dy: f64| vec![a[0] + dx * b[0], a[1] + dy * b[1]];
        LoopPath::new(
            vec![
                Segment::line(p(0.0, 0.0), p(1.0, 0.0)),
                Segment::line(p(1.0, 0.0), p(1.0, 1.0)),
                Segment::line(p(1.0, 1.0), p(0.0, 1.0)),
                Segment::line(p(0.0, 1.0), p(0.0, 0.0)),
            ],
            format!("rectangle[{sides:?}]"),
        )
    }

    /// Straight-coordinate triangle `corner → +x → +y → corner`.
    pub fn coordinate_triangle(corner: &[f64], size: f64) -> Self {
        let a = corner.to_vec();
        let b = vec![a[0] + size, a[1]];
        let c = vec![a[0], a[1] + size];
        LoopPath::new(
            vec![
                Segment::line(a.clone(), b.clone()),
                Segment::line(b, c.clone()),
                Segment::line(c, a.clone()),
            ],
            format!("triangle[{size}]"),
        )
    }

    /// Geodesic triangle on the unit sphere through three unit 3-vectors.
    pub fn sphere_triangle(vertices: [[f64; 3]; 3], description: &str) -> Self {
        LoopPath::new(
            vec![
                Segment::sphere_arc(vertices[0], vertices[1]),
                Segment::sphere_arc(vertices[1], vertices[2]),
                Segment::sphere_arc(vertices[2], vertices[0]),
            ],
            description.to_string(),
        )
    }

    pub fn start(&self) -> Vec<f64> {
        self.segments[0].at(0.0).0
    }

    /// Endpoint gap, modulo the chart's periods on periodic axes.
    pub fn closure_gap(&self, chart: &Chart) -> f64 {
        let start = self.start();
        let end = self.segments.last().unwrap().at(1.0).0;
        start
            .iter()
            .zip(&end)
            .zip(chart.periods())
            .map(|((s, e), period)| {
                let mut gap = (e - s).abs();
                if let Some(p) = period {
                    gap = (gap / p - (gap / p).round()).abs() * p;
                }
                gap
            })
            .fold(0.0, f64::max)
    }
}

/// Transports `v0` (coordinate components at `curve(0)`) along one segment
/// by RK4 on `v̇^k + Γ^k_{ij} ẋ^i v^j = 0`.
pub fn parallel_transport(
    chart: &Chart,
    segment: &Segment,
    v0: &[f64],
    steps: usize,
) -> Result<Vec<f64>, GeomError> {
    let d = chart.dim();
    let rhs = |t: f64, v: &[f64]| -> Result<Vec<f64>, GeomError> {
        let (x, dx) = segment.at(t);
        chart.require_inside(&x, 0.0)?;
        let gamma = chart.christoffel_at(&x)?;
        let mut out = vec![0.0; d];
        for k in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                if dx[i] == 0.0 {
                    continue;
                }
                for j in 0..d {
                    acc += gamma[k][i][j] * dx[i] * v[j];
                }
            }
            out[k] = -acc;
        }
        Ok(out)
    };
    let h = 1.0 / steps as f64;
    let mut v = v0.to_vec();
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = rhs(t, &v)?;
        let v2: Vec<f64> = v.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = rhs(t + 0.5 * h, &v2)?;
        let v3: Vec<f64> = v.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
        let k3 = rhs(t + 0.5 * h, &v3)?;
        let v4: Vec<f64> = v.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
        let k4 = rhs(t + h, &v4)?;
        for i in 0..d {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(v)
}

/// Transports a vector along every segment of a loop in turn.
pub fn transport_loop(
    chart: &Chart,
    path: &LoopPath,
    v0: &[f64],
    steps_per_segment: usize,
) -> Result<Vec<f64>, GeomError> {
    let gap = path.closure_gap(chart);
    if gap > 1e-9 {
        return Err(GeomError::OpenLoop { gap });
    }
    let mut v = v0.to_vec();
    for seg in &path.segments {
        v = parallel_transport(chart, seg, &v, steps_per_segment)?;
    }
    Ok(v)
}

/// Holonomy of a closed loop in frame coordinates at the loop's start:
/// column `j` holds the frame components of the transported `E_j`.
pub fn holonomy_loop(
    chart: &Chart,
    path: &LoopPath,
    steps_per_segment: usize,
) -> Result<Vec<Vec<f64>>, GeomError> {
    let d = chart.dim();
    let base = path.start();
    let frame = chart.frame_at(&base);
    let frame_inv = chart.frame_inv_at(&base);
    let mut matrix = vec![vec![0.0; d]; d];
    for j in 0..d {
        let transported = transport_loop(chart, path, &frame[j], steps_per_segment)?;
        for i in 0..d {
            let mut acc = 0.0;
            for a in 0..d {
                acc += frame_inv[i][a] * transported[a];
            }
            matrix[i][j] = acc;
        }
    }
    Ok(matrix)
}

/// Rotation angle of a 2×2 orthogonal matrix.
pub fn rotation_angle(matrix: &[Vec<f64>]) -> f64 {
    matrix[1][0].atan2(matrix[0][0])
}

/// Vertices of a right-angled geodesic triangle (an octant rotated so every
/// edge keeps a wide margin from the coordinate poles): three mutually
/// orthogonal unit vectors with equal z-components 1/√3.
pub fn rotated_octant_vertices() -> [[f64; 3]; 3] {
    let (s2, s3, s6) = (2.0f64.sqrt(), 3.0f64.sqrt(), 6.0f64.sqrt());
    [
        [1.0 / s2, 1.0 / s6, 1.0 / s3],
        [-1.0 / s2, 1.0 / s6, 1.0 / s3],
        [0.0, -2.0 / s6, 1.0 / s3],
    ]
}

/// The standard loop family used for holonomy sampling: coordinate
/// rectangles at three scales plus two triangles, all based at the chart's
/// base point (geodesic triangles on the sphere, straight-coordinate
/// triangles elsewhere).
pub fn preset_loops(chart: &Chart) -> Vec<LoopPath> {
    let base = chart.base_point().to_vec();
    let mut loops = Vec::new();
    match chart.name() {
        "s2" => {
            for scale in [0.25, 0.45, 0.65] {
                loops.push(LoopPath::rectangle(&base, &[scale, 1.4 * scale]));
            }
            loops.push(LoopPath::sphere_triangle(
                rotated_octant_vertices(),
                "octant triangle",
            ));
            // A smaller geodesic triangle sharing the base vertex.
            let v1 = rotated_octant_vertices()[0];
            let v2 = normalize3([0.2, 0.9, 0.6]);
            let v3 = normalize3([0.8, 0.1, 0.8]);
            loops.push(LoopPath::sphere_triangle([v1, v2, v3], "small geodesic triangle"));
        }
        "torus" => {
            for scale in [0.15, 0.3, 0.45] {
                loops.push(LoopPath::rectangle(&base, &[scale, scale]));
            }
            loops.push(LoopPath::coordinate_triangle(&base, 0.3));
            loops.push(LoopPath::coordinate_triangle(&base, 0.5));
            // A non-contractible loop wrapping the first period.
            let end = vec![base[0] + 1.0, base[1]];
            loops.push(LoopPath::new(
                vec![Segment::line(base.clone(), end)],
                "wrapping loop",
            ));
        }
        _ => {
            for scale in [0.4, 0.8, 1.2] {
                loops.push(LoopPath::rectangle(&base, &[scale, scale]));
            }
            loops.push(LoopPath::coordinate_triangle(&base, 0.6));
            loops.push(LoopPath::coordinate_triangle(&base, 1.1));
        }
    }
    loops
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn metric_norm(chart: &Chart, x: &[f64], v: &[f64]) -> f64 {
        let g = chart.metric_at(x);
        let d = chart.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += v[i] * g[i][j] * v[j];
            }
        }
        acc
    }

    #[test]
    fn flat_transport_is_identity() {
        let chart = Chart::flat_plane();
        for path in preset_loops(&chart) {
            let m = holonomy_loop(&chart, &path, 200).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = f64::from(u8::from(i == j));
                    assert!((m[i][j] - want).abs() < 1e-12, "{}", path.description);
                }
            }
        }
    }

    #[test]
    fn torus_loops_are_identity_including_wrap() {
        let chart = Chart::flat_torus();
        for path in preset_loops(&chart) {
            let m = holonomy_loop(&chart, &path, 100).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = f64::from(u8::from(i == j));
                    assert!((m[i][j] - want).abs() < 1e-9, "{}", path.description);
                }
            }
        }
    }

    #[test]
    fn open_loop_rejected() {
        let chart = Chart::flat_plane();
        let path = LoopPath::new(
            vec![Segment::line(vec![0.0, 0.0], vec![1.0, 0.0])],
            "open",
        );
        assert!(matches!(
            transport_loop(&chart, &path, &[1.0, 0.0], 10),
            Err(GeomError::OpenLoop { .. })
        ));
    }

    #[test]
    fn degenerate_loop_is_identity() {
        let chart = Chart::sphere();
        let base = chart.base_point().to_vec();
        let path = LoopPath::new(
            vec![Segment::new(move |_| (base.clone(), vec![0.0, 0.0]))],
            "constant loop",
        );
        let m = holonomy_loop(&chart, &path, 50).unwrap();
        assert!((m[0][0] - 1.0).abs() < 1e-12 && m[0][1].abs() < 1e-12);
    }

    #[test]
    fn colatitude_circle_cone_angle() {
        // Transport once around θ = θ₀ rotates by 2π(1 - cosθ₀).
        let chart = Chart::sphere();
        let theta0 = 1.0;
        let path = LoopPath::new(
            vec![Segment::colatitude_arc(theta0, 0.3, 0.3 + 2.0 * PI)],
            "colatitude circle",
        );
        let m = holonomy_loop(&chart, &path, 4000).unwrap();
        let want = 2.0 * PI * (1.0 - theta0.cos());
        assert!(
            (rotation_angle(&m).abs() - want).abs() < 1e-6,
            "angle {} want ±{want}",
            rotation_angle(&m)
        );
    }

    #[test]
    fn octant_triangle_angle_is_right() {
        let chart = Chart::sphere();
        let path = LoopPath::sphere_triangle(rotated_octant_vertices(), "octant");
        // Edges stay well inside the chart domain.
        for seg in &path.segments {
            for k in 0..=100 {
                let (x, _) = seg.at(k as f64 / 100.0);
                assert!(chart.contains(&x, 0.05), "edge leaves domain at {x:?}");
            }
        }
        let m = holonomy_loop(&chart, &path, 1000).unwrap();
        assert!(
            (rotation_angle(&m).abs() - PI / 2.0).abs() < 1e-3,
            "angle {}",
            rotation_angle(&m)
        );
    }

    #[test]
    fn transport_preserves_metric_norm() {
        for name in ["s2", "h2"] {
            let chart = Chart::preset(name).unwrap();
            for path in preset_loops(&chart) {
                let base = path.start();
                let v0 = chart.frame_at(&base)[0].clone();
                let v = transport_loop(&chart, &path, &v0, 1000).unwrap();
                let drift =
                    (metric_norm(&chart, &base, &v) - metric_norm(&chart, &base, &v0)).abs();
                assert!(drift < 1e-8, "{name} {}: drift {drift}", path.description);
            }
        }
    }

    #[test]
    fn sphere_loops_stay_in_domain() {
        let chart = Chart::sphere();
        for path in preset_loops(&chart) {
            for seg in &path.segments {
                for k in 0..=64 {
                    let (x, _) = seg.at(k as f64 / 64.0);
                    assert!(chart.contains(&x, 0.0), "{}: {x:?}", path.description);
                }
            }
        }
    }

    #[test]
    fn holonomy_matrices_are_orthogonal() {
        for name in ["s2", "h2", "r2", "torus"] {
            let chart = Chart::preset(name).unwrap();
            for path in preset_loops(&chart) {
                let m = holonomy_loop(&chart, &path, 500).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        let dot: f64 = (0..2).map(|k| m[k][i] * m[k][j]).sum();
                        let want = f64::from(u8::from(i == j));
                        assert!(
                            (dot - want).abs() < 1e-6,
                            "{name} {}: AᵀA[{i}][{j}] = {dot}",
                            path.description
                        );
                    }
                }
            }
        }
    }
}
