//! Brute-force validators that share no code path with the spectral solver:
//! finite differences for the transparent 1D boundary conditions, the secular
//! equation of that problem, a periodic finite-difference Laplacian and
//! adaptive tensor quadrature.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::harmonic::Evaluate;
use crate::quadrature::{composite, for_each_tensor_point};

pub const MIN_GRID: usize = 16;

/// Dense finite-difference operator on the nodes `j / M`, `j = 0..=M`.
#[derive(Debug, Clone)]
pub struct FdOperator {
    pub grid_size: usize,
    /// Rows `0` and `M` hold the two constraints; the others are the negative
    /// second difference.
    pub matrix: DMatrix<f64>,
    pub boundary_encoding: String,
}

const KREIN_ENCODING: &str = "row 0: u'(0) - u'(1) = 0; row M: u'(0) - (u(1) - u(0)) = 0; \
                              one-sided second-order u'(0), u'(1)";

fn check_grid(m: usize) -> Result<()> {
    if m < MIN_GRID {
        return Err(Error::InvalidArgument(format!("grid size {m} below {MIN_GRID}")));
    }
    Ok(())
}

/// Derivative stencils `u'(0) ~ sum d0_i u_i`, `u'(1) ~ sum d1_i u_{M-i}`.
fn one_sided(h: f64) -> ([f64; 3], [f64; 3]) {
    let s = 1.0 / (2.0 * h);
    ([-3.0 * s, 4.0 * s, -s], [3.0 * s, -4.0 * s, s])
}

pub fn assemble_fd_krein(m: usize) -> Result<FdOperator> {
    check_grid(m)?;
    let h = 1.0 / m as f64;
    let (d0, d1) = one_sided(h);
    let mut a = DMatrix::zeros(m + 1, m + 1);
    let ih2 = 1.0 / (h * h);
    for j in 1..m {
        a[(j, j - 1)] = -ih2;
        a[(j, j)] = 2.0 * ih2;
        a[(j, j + 1)] = -ih2;
    }
    for i in 0..3 {
        a[(0, i)] += d0[i];
        a[(0, m - i)] -= d1[i];
        a[(m, i)] += d0[i];
    }
    a[(m, m)] -= 1.0;
    a[(m, 0)] += 1.0;
    Ok(FdOperator {
        grid_size: m,
        matrix: a,
        boundary_encoding: KREIN_ENCODING.into(),
    })
}

/// `L = T - U W^T` on the interior nodes after eliminating `u_0`, `u_M`
/// through the constraint rows.
#[derive(Debug, Clone)]
pub struct EliminatedKrein {
    m: usize,
    h: f64,
    /// `u_0 = a . u_int`, `u_M = b . u_int` (interior indices `0..M-1`).
    a: Vec<(usize, f64)>,
    b: Vec<(usize, f64)>,
}

impl EliminatedKrein {
    pub fn new(m: usize) -> Result<Self> {
        check_grid(m)?;
        let h = 1.0 / m as f64;
        let (d0, d1) = one_sided(h);
        // c1: d0 . u[0..3] - d1 . u[M, M-1, M-2] = 0
        // c2: d0 . u[0..3] - u_M + u_0 = 0
        // Unknowns (u_0, u_M); right-hand sides are linear in the interior.
        let m11 = d0[0];
        let m12 = -d1[0];
        let m21 = d0[0] + 1.0;
        let m22 = -1.0;
        let det = m11 * m22 - m12 * m21;
        let scale = m11.abs().max(m12.abs()).max(m21.abs()).max(m22.abs());
        if det.abs() <= 1e-12 * scale * scale {
            return Err(Error::RankDeficient { rank: 1, expected: 2 });
        }
        // Interior node j (1-based grid index) maps to interior index j - 1.
        let r1 = [(1, -d0[1]), (2, -d0[2]), (m - 1, d1[1]), (m - 2, d1[2])];
        let r2 = [(1, -d0[1]), (2, -d0[2])];
        let mut a = Vec::new();
        let mut b = Vec::new();
        let push = |v: &mut Vec<(usize, f64)>, j: usize, c: f64| {
            if let Some(e) = v.iter_mut().find(|e| e.0 == j - 1) {
                e.1 += c;
            } else {
                v.push((j - 1, c));
            }
        };
        for &(j, c) in &r1 {
            push(&mut a, j, m22 * c / det);
            push(&mut b, j, -m21 * c / det);
        }
        for &(j, c) in &r2 {
            push(&mut a, j, -m12 * c / det);
            push(&mut b, j, m11 * c / det);
        }
        Ok(Self { m, h, a, b })
    }

    pub fn interior_len(&self) -> usize {
        self.m - 1
    }

    /// `L v` for an interior vector `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.interior_len();
        let ih2 = 1.0 / (self.h * self.h);
        let u0: f64 = self.a.iter().map(|&(i, c)| c * v[i]).sum();
        let um: f64 = self.b.iter().map(|&(i, c)| c * v[i]).sum();
        (0..n)
            .map(|i| {
                let left = if i == 0 { u0 } else { v[i - 1] };
                let right = if i + 1 == n { um } else { v[i + 1] };
                -(left - 2.0 * v[i] + right) * ih2
            })
            .collect()
    }

    /// Dense interior matrix (small grids only).
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.interior_len();
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            out.set_column(j, &DVector::from_vec(self.apply(&e)));
            e[j] = 0.0;
        }
        out
    }

    /// Sign of `det(L - lambda)`, or `0` at an exact singularity.
    pub fn det_sign(&self, lambda: f64) -> f64 {
        let n = self.interior_len();
        let ih2 = 1.0 / (self.h * self.h);
        let diag = 2.0 * ih2 - lambda;
        let off = -ih2;
        // LDL^T of the symmetric tridiagonal T - lambda.
        let mut d = vec![0.0; n];
        let mut sign = 1.0;
        d[0] = diag;
        for i in 1..n {
            if d[i - 1] == 0.0 {
                return 0.0;
            }
            d[i] = diag - off * off / d[i - 1];
        }
        for &di in &d {
            if di == 0.0 {
                return 0.0;
            }
            if di < 0.0 {
                sign = -sign;
            }
        }
        let solve = |rhs: &mut [f64]| {
            for i in 1..n {
                rhs[i] -= off / d[i - 1] * rhs[i - 1];
            }
            rhs[n - 1] /= d[n - 1];
            for i in (0..n - 1).rev() {
                rhs[i] = (rhs[i] - off * rhs[i + 1]) / d[i];
            }
        };
        // U columns are -e_first / h^2 and -e_last / h^2 (L = T + U W^T).
        let mut z1 = vec![0.0; n];
        z1[0] = -ih2;
        let mut z2 = vec![0.0; n];
        z2[n - 1] = -ih2;
        solve(&mut z1);
        solve(&mut z2);
        let wa = |z: &[f64]| self.a.iter().map(|&(i, c)| c * z[i]).sum::<f64>();
        let wb = |z: &[f64]| self.b.iter().map(|&(i, c)| c * z[i]).sum::<f64>();
        let g11 = 1.0 + wa(&z1);
        let g12 = wa(&z2);
        let g21 = wb(&z1);
        let g22 = 1.0 + wb(&z2);
        let small = g11 * g22 - g12 * g21;
        if small == 0.0 {
            return 0.0;
        }
        sign * small.signum()
    }
}

#[derive(Debug, Clone)]
pub struct FdKreinSpectrum {
    pub grid_size: usize,
    /// Rayleigh quotients of the discrete `1` and `x`.
    pub kernel: Vec<f64>,
    /// Ascending nonzero eigenvalues.
    pub eigenvalues: Vec<f64>,
}

fn bisect(mut lo: f64, mut hi: f64, mut s_lo: f64, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    while hi - lo > tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = f(mid);
        if s == 0.0 {
            return mid;
        }
        if s == s_lo {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The first `count` nonzero eigenvalues of the finite-difference realization
/// of `-u''` with `u'(0) = u'(1) = u(1) - u(0)`, plus the kernel quotients.
pub fn fd_krein_1d(m: usize, count: usize) -> Result<FdKreinSpectrum> {
    let op = EliminatedKrein::new(m)?;
    let n = op.interior_len();
    let rayleigh = |v: &[f64]| {
        let lv = op.apply(v);
        v.iter().zip(&lv).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|a| a * a).sum::<f64>()
    };
    let ones = vec![1.0; n];
    let ramp: Vec<f64> = (1..=n).map(|j| j as f64 / m as f64).collect();
    let kernel = vec![rayleigh(&ones), rayleigh(&ramp)];

    let step = 0.25;
    let mut lo = 0.5;
    let mut s_lo = op.det_sign(lo);
    let mut eigenvalues = Vec::with_capacity(count);
    // Far beyond the largest eigenvalue of the interior operator.
    let limit = 4.0 * (m as f64).powi(2) + 10.0;
    while eigenvalues.len() < count {
        let hi = lo + step;
        if hi > limit {
            return Err(Error::Bracketing {
                lo: 0.5,
                hi: limit,
                found: eigenvalues.len(),
                wanted: count,
            });
        }
        let s_hi = op.det_sign(hi);
        if s_hi != s_lo && s_hi != 0.0 && s_lo != 0.0 {
            eigenvalues.push(bisect(lo, hi, s_lo, |x| op.det_sign(x), 1e-13));
        }
        lo = hi;
        s_lo = s_hi;
    }
    Ok(FdKreinSpectrum {
        grid_size: m,
        kernel,
        eigenvalues,
    })
}

/// Branch a transparent-condition root belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootBranch {
    /// `omega = 2 pi n`, eigenfunction `cos(2 pi n x)`.
    Cosine(u32),
    /// Solution of the remaining transcendental factor.
    Secular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularRoot {
    pub omega: f64,
    pub lambda: f64,
    pub branch: RootBranch,
}

/// Boundary-condition matrix for `u = A cos(w x) + B sin(w x)`; rows are
/// `u'(1) - u'(0)` and `u'(0) - (u(1) - u(0))`.
pub fn boundary_matrix(omega: f64) -> [[f64; 2]; 2] {
    let (s, c) = omega.sin_cos();
    [[-omega * s, omega * (c - 1.0)], [1.0 - c, omega - s]]
}

pub fn boundary_determinant(omega: f64) -> f64 {
    let m = boundary_matrix(omega);
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// The first `count` positive roots of the boundary determinant.
pub fn secular_roots_1d(count: usize) -> Result<Vec<SecularRoot>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let lo0 = 0.01;
    let hi_max = 2.0 * PI * count as f64 * 1.5;
    let steps = 200 * count;
    let dx = (hi_max - lo0) / steps as f64;
    let mut roots = Vec::with_capacity(count);
    let mut a = lo0;
    let mut fa = boundary_determinant(a);
    for i in 1..=steps {
        let b = lo0 + dx * i as f64;
        let fb = boundary_determinant(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            let omega = if fa == 0.0 {
                a
            } else {
                bisect(a, b, fa.signum(), |x| boundary_determinant(x).signum(), 1e-15)
            };
            let n = (omega / (2.0 * PI)).round();
            let branch = if n >= 1.0 && (omega - 2.0 * PI * n).abs() <= 1e-8 * omega {
                RootBranch::Cosine(n as u32)
            } else {
                RootBranch::Secular
            };
            roots.push(SecularRoot {
                omega,
                lambda: omega * omega,
                branch,
            });
            if roots.len() == count {
                return Ok(roots);
            }
        }
        a = b;
        fa = fb;
    }
    Err(Error::Bracketing {
        lo: lo0,
        hi: hi_max,
        found: roots.len(),
        wanted: count,
    })
}

/// Circulant negative second difference on `M` nodes, spacing `1 / M`.
pub fn periodic_fd_matrix(m: usize) -> Result<DMatrix<f64>> {
    check_grid(m)?;
    let ih2 = (m * m) as f64;
    let mut a = DMatrix::zeros(m, m);
    for j in 0..m {
        a[(j, j)] = 2.0 * ih2;
        a[(j, (j + 1) % m)] -= ih2;
        a[(j, (j + m - 1) % m)] -= ih2;
    }
    Ok(a)
}

/// Ascending eigenvalues of the circulant Laplacian on mean-zero vectors.
pub fn fd_periodic_1d(m: usize) -> Result<Vec<f64>> {
    let a = periodic_fd_matrix(m)?;
    // Householder reflector sending the unit constant to e_0; its remaining
    // columns span the mean-zero vectors.
    let mut v = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    v[0] -= 1.0;
    let vn = v.norm();
    v /= vn;
    let av = &a * &v;
    let vav = v.dot(&av);
    // Q A Q with Q = I - 2 v v^T.
    let qaq = &a - (&av * v.transpose()) * 2.0 - (&v * av.transpose()) * 2.0 + (&v * v.transpose()) * (4.0 * vav);
    let reduced = qaq.view((1, 1), (m - 1, m - 1)).clone_owned();
    let mut eig: Vec<f64> = reduced.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

pub const QUADRATURE_ORDER: usize = 20;
pub const QUADRATURE_TOLERANCE: f64 = 1e-11;
const MAX_TENSOR_POINTS: usize = 1 << 24;

/// `int f conj(g)` over `[0, 1]^N` by composite Gauss-Legendre tensor rules,
/// doubling the panel count from `resolution` until the change is below
/// [`QUADRATURE_TOLERANCE`] relative to `max(|I|, int |f g|)`.
pub fn quadrature_inner(f: &dyn Evaluate, g: &dyn Evaluate, resolution: usize) -> Result<Complex64> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: g.dim(),
        });
    }
    let dim = f.dim();
    let integrate = |panels: usize| {
        let rule = composite(QUADRATURE_ORDER, panels);
        let mut total = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for_each_tensor_point(&rule, dim, |x, w| {
            let p = f.value(x) * g.value(x).conj();
            total += p * w;
            abs += p.norm() * w;
        });
        (total, abs)
    };
    let mut panels = resolution.max(1);
    let (mut prev, _) = integrate(panels);
    loop {
        panels *= 2;
        if (QUADRATURE_ORDER * panels).pow(dim as u32) > MAX_TENSOR_POINTS {
            return Err(Error::NonConvergence(format!(
                "quadrature did not settle below {QUADRATURE_TOLERANCE:e} before {} panels",
                panels / 2
            )));
        }
        let (next, abs) = integrate(panels);
        let scale = next.norm().max(abs);
        if (next - prev).norm() <= QUADRATURE_TOLERANCE * scale || scale == 0.0 {
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::FnEvaluator;
    use approx::assert_abs_diff_eq;

    const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

    #[test]
    fn cosine_satisfies_the_transparent_conditions() {
        // Direct substitution of cos(2 pi x): u'(0) = u'(1) = 0 = u(1) - u(0).
        let w = 2.0 * PI;
        let m = boundary_matrix(w);
        assert!(m[0][0].abs() < 1e-14 && m[1][0].abs() < 1e-15);
        assert!(boundary_determinant(w).abs() < 1e-13);
    }

    #[test]
    fn secular_roots_contain_cosine_branch() {
        let roots = secular_roots_1d(6).unwrap();
        assert!(roots.iter().all(|r| r.omega > 0.1));
        let cos: Vec<u32> = roots
            .iter()
            .filter_map(|r| match r.branch {
                RootBranch::Cosine(n) => Some(n),
                RootBranch::Secular => None,
            })
            .collect();
        assert_eq!(cos, vec![1, 2, 3]);
        assert_abs_diff_eq!(roots[0].omega, 2.0 * PI, epsilon = 1e-10);
        // tan(w/2) = w/2 characterizes the other branch.
        for r in roots.iter().filter(|r| r.branch == RootBranch::Secular) {
            let half = r.omega / 2.0;
            assert!((half.tan() - half).abs() < 1e-7 * half);
        }
        assert!(matches!(secular_roots_1d(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dense_and_eliminated_agree() {
        let m = 24;
        let dense = assemble_fd_krein(m).unwrap();
        let op = EliminatedKrein::new(m).unwrap();
        // A random interior vector completed through the constraints satisfies
        // the dense constraint rows.
        let v: Vec<f64> = (0..m - 1).map(|i| ((i * 7 + 3) as f64).sin()).collect();
        let u0: f64 = op.a.iter().map(|&(i, c)| c * v[i]).sum();
        let um: f64 = op.b.iter().map(|&(i, c)| c * v[i]).sum();
        let mut full = vec![u0];
        full.extend(&v);
        full.push(um);
        let r = &dense.matrix * DVector::from_vec(full);
        assert!(r[0].abs() < 1e-9 && r[m].abs() < 1e-9);
        let lv = op.apply(&v);
        for i in 0..m - 1 {
            assert_abs_diff_eq!(r[i + 1], lv[i], epsilon = 1e-8 * lv[i].abs().max(1.0));
        }
        // Eigenvalues by bisection match a dense nonsymmetric solve.
        let spectrum = fd_krein_1d(m, 6).unwrap();
        let mut dense_eig: Vec<f64> = op.dense().complex_eigenvalues().iter().map(|z| z.re).collect();
        dense_eig.sort_by(f64::total_cmp);
        let nonzero: Vec<f64> = dense_eig.into_iter().filter(|l| l.abs() > 1e-6).collect();
        for (a, b) in spectrum.eigenvalues.iter().zip(&nonzero) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8 * b);
        }
    }

    #[test]
    fn fd_krein_kernel_and_first_eigenvalue() {
        let s = fd_krein_1d(400, 3).unwrap();
        assert!(s.kernel.iter().all(|l| l.abs() < 1e-6));
        assert!((s.eigenvalues[0] - FOUR_PI_SQ).abs() < 1e-3 * FOUR_PI_SQ);
        assert!(matches!(fd_krein_1d(8, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn periodic_fd_matches_circulant_closed_form() {
        let m = 64;
        let eig = fd_periodic_1d(m).unwrap();
        assert_eq!(eig.len(), m - 1);
        let mut exact: Vec<f64> = (1..m)
            .map(|k| 4.0 * (PI * k as f64 / m as f64).sin().powi(2) * (m * m) as f64)
            .collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&exact) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9 * b.max(1.0));
        }
        let full = periodic_fd_matrix(m).unwrap().symmetric_eigenvalues();
        assert_eq!(full.iter().filter(|l| l.abs() < 1e-8).count(), 1);
        assert!(eig.iter().all(|l| l.abs() > 1.0));
    }

    #[test]
    fn quadrature_examples() {
        let x = FnEvaluator { dim: 1, f: |x: &[f64]| x[0] };
        let s = FnEvaluator { dim: 1, f: |x: &[f64]| (2.0 * PI * x[0]).sin() };
        let got = quadrature_inner(&x, &s, 1).unwrap();
        assert_abs_diff_eq!(got.re, -1.0 / (2.0 * PI), epsilon = 1e-14);
        let c = FnEvaluator { dim: 1, f: |x: &[f64]| x[0] - 0.5 };
        assert_abs_diff_eq!(quadrature_inner(&c, &c, 1).unwrap().re, 1.0 / 12.0, epsilon = 1e-15);
        let one = FnEvaluator { dim: 1, f: |_: &[f64]| 1.0 };
        let cos = FnEvaluator { dim: 1, f: |x: &[f64]| (2.0 * PI * x[0]).cos() };
        assert_abs_diff_eq!(quadrature_inner(&cos, &one, 1).unwrap().re, 0.0, epsilon = 1e-15);
        let y = FnEvaluator { dim: 2, f: |x: &[f64]| x[1] };
        assert!(matches!(quadrature_inner(&x, &y, 1), Err(Error::DimensionMismatch { .. })));
    }
}
