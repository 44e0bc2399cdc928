//! Gauss-Legendre rules on [0, 1], composite panels and tensor products.

use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional rule on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `n`-point Gauss-Legendre rule mapped to [0, 1]; roots by Newton iteration
/// on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Rule { nodes, weights }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// `panels` equal panels on [0, 1], each carrying an `order`-point rule.
pub fn composite(order: usize, panels: usize) -> Rule {
    let base = gauss_legendre(order);
    let panels = panels.max(1);
    let h = 1.0 / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let a = p as f64 * h;
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(a + h * x);
            weights.push(h * w);
        }
    }
    Rule { nodes, weights }
}

/// Tensor rule on [0, 1]^dim; the callback gets each point and its weight.
pub fn for_each_tensor_point(rule: &Rule, dim: usize, mut f: impl FnMut(&[f64], f64)) {
    let n = rule.len();
    let total = n.pow(dim as u32);
    let mut x = vec![0.0; dim];
    for mut flat in 0..total {
        let mut w = 1.0;
        for j in (0..dim).rev() {
            let i = flat % n;
            flat /= n;
            x[j] = rule.nodes[i];
            w *= rule.weights[i];
        }
        f(&x, w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exactness() {
        for n in 1..=30 {
            let rule = gauss_legendre(n);
            assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            for p in 0..(2 * n) as i32 {
                let got = rule.integrate(|x| x.powi(p));
                assert_abs_diff_eq!(got, 1.0 / (p as f64 + 1.0), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_interior() {
        let rule = gauss_legendre(20);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn composite_integrates_oscillation() {
        let rule = composite(20, 8);
        let got = rule.integrate(|x| x * (2.0 * PI * 10.0 * x).sin());
        assert_abs_diff_eq!(got, -1.0 / (2.0 * PI * 10.0), epsilon = 1e-14);
    }

    #[test]
    fn tensor_rule_volume() {
        let rule = gauss_legendre(5);
        let mut vol = 0.0;
        let mut moment = 0.0;
        for_each_tensor_point(&rule, 3, |x, w| {
            vol += w;
            moment += w * x[0] * x[1] * x[2];
        });
        assert_abs_diff_eq!(vol, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(moment, 0.125, epsilon = 1e-14);
    }
}
