//! Gauss rules on the unit interval and collapsed (Duffy) product rules on
//! the reference triangle and tetrahedron.
//!
//! All rules are expressed in barycentric coordinates with weights that sum
//! to one, so integrating over a physical simplex is `measure * sum(w * f)`.

/// Gauss-Legendre nodes and weights on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, refined with Newton on P_n.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        x[n - 1 - i] = 0.5 * (1.0 + t);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// A rule on a simplex with `N` barycentric coordinates.
#[derive(Debug, Clone)]
pub struct SimplexRule<const N: usize> {
    pub points: Vec<[f64; N]>,
    pub weights: Vec<f64>,
}

pub type LineRule = SimplexRule<2>;
pub type TriangleRule = SimplexRule<3>;
pub type TetRule = SimplexRule<4>;

fn points_for_degree(degree: usize, extra: usize) -> usize {
    (degree + extra).div_ceil(2).max(1)
}

/// Rule on a segment exact for polynomials of the given degree.
pub fn line_rule(degree: usize) -> LineRule {
    let (x, w) = gauss_legendre(points_for_degree(degree, 1));
    SimplexRule {
        points: x.iter().map(|&t| [1.0 - t, t]).collect(),
        weights: w,
    }
}

/// Collapsed Gauss rule on a triangle exact for the given degree.
pub fn triangle_rule(degree: usize) -> TriangleRule {
    let (x, w) = gauss_legendre(points_for_degree(degree, 2));
    let mut points = Vec::with_capacity(x.len() * x.len());
    let mut weights = Vec::with_capacity(x.len() * x.len());
    for (&u, &wu) in x.iter().zip(&w) {
        for (&v, &wv) in x.iter().zip(&w) {
            let a = u;
            let b = v * (1.0 - u);
            points.push([1.0 - a - b, a, b]);
            // reference area 1/2 absorbed: weights must sum to 1
            weights.push(2.0 * wu * wv * (1.0 - u));
        }
    }
    SimplexRule { points, weights }
}

/// Collapsed Gauss rule on a tetrahedron exact for the given degree.
pub fn tet_rule(degree: usize) -> TetRule {
    let (x, w) = gauss_legendre(points_for_degree(degree, 3));
    let n = x.len();
    let mut points = Vec::with_capacity(n * n * n);
    let mut weights = Vec::with_capacity(n * n * n);
    for (&u, &wu) in x.iter().zip(&w) {
        for (&v, &wv) in x.iter().zip(&w) {
            for (&s, &ws) in x.iter().zip(&w) {
                let a = u;
                let b = v * (1.0 - u);
                let c = s * (1.0 - u) * (1.0 - v);
                points.push([1.0 - a - b - c, a, b, c]);
                weights.push(6.0 * wu * wv * ws * (1.0 - u) * (1.0 - u) * (1.0 - v));
            }
        }
    }
    SimplexRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn gauss_weights_and_moments() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for p in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn triangle_rule_integrates_barycentric_monomials() {
        // mean over the triangle of l1^a l2^b l3^c = 2 a! b! c! / (a+b+c+2)!
        for deg in 0..7 {
            let rule = triangle_rule(deg);
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let c = deg - a - b;
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| {
                            w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32)
                        })
                        .sum();
                    let exact =
                        2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
                    assert!((q - exact).abs() < 1e-14, "deg {deg}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn tet_rule_integrates_barycentric_monomials() {
        for deg in 0..7 {
            let rule = tet_rule(deg);
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    for c in 0..=(deg - a - b) {
                        let d = deg - a - b - c;
                        let q: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(p, w)| {
                                w * p[0].powi(a as i32)
                                    * p[1].powi(b as i32)
                                    * p[2].powi(c as i32)
                                    * p[3].powi(d as i32)
                            })
                            .sum();
                        let exact = 6.0 * factorial(a) * factorial(b) * factorial(c) * factorial(d)
                            / factorial(a + b + c + d + 3);
                        assert!((q - exact).abs() < 1e-14);
                    }
                }
            }
        }
    }
}
