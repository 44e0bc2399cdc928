//! Truncated Fourier fields on the unit torus, grid sampling, the torus
//! Poisson solve and the two H^-1 inner products.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Iterates over the multi-indices of `[-cutoff, cutoff]^dim` in storage order
/// (axis 0 varies slowest).
pub fn multi_indices(dim: usize, cutoff: usize) -> impl Iterator<Item = Vec<i64>> {
    let side = 2 * cutoff + 1;
    let total = side.pow(dim as u32);
    (0..total).map(move |flat| unflatten(flat, dim, cutoff))
}

fn unflatten(mut flat: usize, dim: usize, cutoff: usize) -> Vec<i64> {
    let side = 2 * cutoff + 1;
    let mut k = vec![0i64; dim];
    for j in (0..dim).rev() {
        k[j] = (flat % side) as i64 - cutoff as i64;
        flat /= side;
    }
    k
}

fn norm_sq(k: &[i64]) -> f64 {
    k.iter().map(|&v| (v * v) as f64).sum()
}

/// Truncated Fourier series `sum_k c(k) e^{2 pi i k.x}` with `k` in `[-K, K]^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    dim: usize,
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(dim: usize, cutoff: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        let len = (2 * cutoff + 1).pow(dim as u32);
        Self {
            dim,
            cutoff,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(dim: usize, cutoff: usize, mut f: impl FnMut(&[i64]) -> Complex64) -> Self {
        let mut out = Self::zeros(dim, cutoff);
        for (flat, k) in multi_indices(dim, cutoff).enumerate() {
            out.coeffs[flat] = f(&k);
        }
        out
    }

    pub fn constant(dim: usize, cutoff: usize, value: f64) -> Self {
        let mut out = Self::zeros(dim, cutoff);
        out.set(&vec![0; dim], Complex64::new(value, 0.0));
        out
    }

    /// `amplitude * cos(2 pi k.x)`.
    pub fn cos_mode(dim: usize, cutoff: usize, k: &[i64], amplitude: f64) -> Self {
        let mut out = Self::zeros(dim, cutoff);
        out.add_real_mode(k, amplitude, 0.0);
        out
    }

    /// `amplitude * sin(2 pi k.x)`.
    pub fn sin_mode(dim: usize, cutoff: usize, k: &[i64], amplitude: f64) -> Self {
        let mut out = Self::zeros(dim, cutoff);
        out.add_real_mode(k, 0.0, amplitude);
        out
    }

    /// Adds `a cos(2 pi k.x) + b sin(2 pi k.x)`.
    pub fn add_real_mode(&mut self, k: &[i64], a: f64, b: f64) {
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        if k.iter().all(|&v| v == 0) {
            let c = self.get(k) + Complex64::new(a, 0.0);
            self.set(k, c);
            return;
        }
        let half = Complex64::new(0.5 * a, -0.5 * b);
        let c = self.get(k) + half;
        self.set(k, c);
        let c = self.get(&neg) + half.conj();
        self.set(&neg, c);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let side = 2 * self.cutoff + 1;
        let mut flat = 0usize;
        for &v in k {
            if v.unsigned_abs() as usize > self.cutoff {
                return None;
            }
            flat = flat * side + (v + self.cutoff as i64) as usize;
        }
        Some(flat)
    }

    /// Coefficient at `k`; zero outside the truncation.
    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set(&mut self, k: &[i64], value: Complex64) {
        let i = self
            .index_of(k)
            .unwrap_or_else(|| panic!("multi-index {k:?} outside cutoff {}", self.cutoff));
        self.coeffs[i] = value;
    }

    pub fn multi_index(&self, flat: usize) -> Vec<i64> {
        unflatten(flat, self.dim, self.cutoff)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        multi_indices(self.dim, self.cutoff).zip(self.coeffs.iter().copied())
    }

    /// Zero-pads or truncates to a new cutoff.
    pub fn resized(&self, cutoff: usize) -> Self {
        if cutoff == self.cutoff {
            return self.clone();
        }
        Self::from_fn(self.dim, cutoff, |k| self.get(k))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_dim(other)?;
        let cutoff = self.cutoff.max(other.cutoff);
        let a = self.resized(cutoff);
        let b = other.resized(cutoff);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f(x, y)).collect();
        Ok(Self {
            dim: self.dim,
            cutoff,
            coeffs,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Mode-wise multiplication by a symbol `sigma(k)`.
    pub fn map_symbol(&self, sigma: impl Fn(&[i64]) -> Complex64) -> Self {
        let mut out = self.clone();
        for (flat, k) in multi_indices(self.dim, self.cutoff).enumerate() {
            out.coeffs[flat] *= sigma(&k);
        }
        out
    }

    /// Exact Laplacian, symbol `-4 pi^2 |k|^2`.
    pub fn laplacian(&self) -> Self {
        self.map_symbol(|k| Complex64::new(-TWO_PI * TWO_PI * norm_sq(k), 0.0))
    }

    /// Partial derivative along `axis`, symbol `2 pi i k_axis`.
    pub fn partial(&self, axis: usize) -> Self {
        self.map_symbol(|k| Complex64::new(0.0, TWO_PI * k[axis] as f64))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// L^2 norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// H^1 norm `(sum (1 + 4 pi^2 |k|^2) |c(k)|^2)^{1/2}`.
    pub fn h1_norm(&self) -> f64 {
        self.iter()
            .map(|(k, c)| (1.0 + TWO_PI * TWO_PI * norm_sq(&k)) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Whether `c(-k) = conj(c(k))` to relative tolerance `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.iter().all(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            (self.get(&neg) - c.conj()).norm() <= tol * scale
        })
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.dim, "point dimension");
        self.iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
                c * Complex64::from_polar(1.0, TWO_PI * phase)
            })
            .sum()
    }
}

/// `mu_0(f) = c(0)`, the integral over the unit cube.
pub fn moment0(f: &FourierField) -> Complex64 {
    f.get(&vec![0; f.dim()])
}

/// Zero-mean periodic solution of `div grad u = f - mu_0(f)`.
pub fn poisson_solve_torus(f: &FourierField) -> FourierField {
    f.map_symbol(|k| {
        let q = norm_sq(k);
        if q == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / (TWO_PI * TWO_PI * q), 0.0)
        }
    })
}

fn paired(f: &FourierField, g: &FourierField) -> Result<(FourierField, FourierField)> {
    f.check_dim(g)?;
    let cutoff = f.cutoff().max(g.cutoff());
    Ok((f.resized(cutoff), g.resized(cutoff)))
}

/// `int f conj(g)` by Parseval.
pub fn l2_inner(f: &FourierField, g: &FourierField) -> Result<Complex64> {
    let (a, b) = paired(f, g)?;
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| x * y.conj()).sum())
}

/// `(grad u_f | grad u_g) + mu_0(f) conj(mu_0(g))`.
pub fn hminus_inner_grad(f: &FourierField, g: &FourierField) -> Result<Complex64> {
    let (a, b) = paired(f, g)?;
    Ok(a.iter()
        .zip(&b.coeffs)
        .map(|((k, x), &y)| {
            let q = norm_sq(&k);
            let w = if q == 0.0 { 1.0 } else { 1.0 / (TWO_PI * TWO_PI * q) };
            x * y.conj() * w
        })
        .sum())
}

/// `P_N f = grad u_f + a (x - 1/2)` with `a = mu_0(f) / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveField {
    pub gradient_part: Vec<FourierField>,
    pub affine_coefficient: Complex64,
}

/// Fourier coefficient of `x_axis - 1/2` at `k`: `i / (2 pi k_axis)` when only
/// `k_axis` is nonzero, else zero.
pub fn affine_coefficient(axis: usize, k: &[i64]) -> Complex64 {
    let off_axis_zero = k.iter().enumerate().all(|(j, &v)| j == axis || v == 0);
    if !off_axis_zero || k[axis] == 0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, 1.0 / (TWO_PI * k[axis] as f64))
}

impl PrimitiveField {
    pub fn dim(&self) -> usize {
        self.gradient_part.len()
    }

    /// `int P conj(Q)` over the unit cube, summed over components.
    pub fn l2_inner(&self, other: &PrimitiveField) -> Result<Complex64> {
        let n = self.dim();
        if n != other.dim() {
            return Err(Error::DimensionMismatch {
                left: n,
                right: other.dim(),
            });
        }
        let af = self.affine_coefficient;
        let ag = other.affine_coefficient;
        let mut total = af * ag.conj() * (n as f64 / 12.0);
        for j in 0..n {
            let gf = &self.gradient_part[j];
            let gg = &other.gradient_part[j];
            total += l2_inner(gf, gg)?;
            // Only the axis-j line of modes meets x_j - 1/2.
            let mut cross_f = Complex64::new(0.0, 0.0);
            let mut cross_g = Complex64::new(0.0, 0.0);
            let cutoff = gf.cutoff().max(gg.cutoff()) as i64;
            let mut k = vec![0i64; n];
            for kj in (-cutoff..=cutoff).filter(|&v| v != 0) {
                k[j] = kj;
                let e = affine_coefficient(j, &k);
                cross_f += gf.get(&k) * e.conj();
                cross_g += e * gg.get(&k).conj();
            }
            total += cross_f * ag.conj() + af * cross_g;
        }
        Ok(total)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<Complex64> {
        self.gradient_part
            .iter()
            .zip(x)
            .map(|(g, &xj)| g.eval(x) + self.affine_coefficient * (xj - 0.5))
            .collect()
    }
}

pub fn primitive(f: &FourierField) -> PrimitiveField {
    let u = poisson_solve_torus(f);
    let n = f.dim();
    PrimitiveField {
        gradient_part: (0..n).map(|j| u.partial(j)).collect(),
        affine_coefficient: moment0(f) / n as f64,
    }
}

/// `(P_N f | P_N g)_{L^2} + mu_0(f) conj(mu_0(g))`.
pub fn hminus_inner_pn(f: &FourierField, g: &FourierField) -> Result<Complex64> {
    f.check_dim(g)?;
    let pf = primitive(f);
    let pg = primitive(g);
    Ok(pf.l2_inner(&pg)? + moment0(f) * moment0(g).conj())
}

/// Samples on the cell-centred grid `x_j = (j + 1/2) / M` of `(0, 1)^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    dim: usize,
    resolution: usize,
    samples: Vec<Complex64>,
}

impl GridField {
    pub fn from_fn(dim: usize, resolution: usize, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let total = resolution.pow(dim as u32);
        let mut x = vec![0.0; dim];
        let samples = (0..total)
            .map(|mut flat| {
                for j in (0..dim).rev() {
                    x[j] = ((flat % resolution) as f64 + 0.5) / resolution as f64;
                    flat /= resolution;
                }
                f(&x)
            })
            .collect();
        Self {
            dim,
            resolution,
            samples,
        }
    }

    pub fn from_real_fn(dim: usize, resolution: usize, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        Self::from_fn(dim, resolution, |x| Complex64::new(f(x), 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
}

fn check_aliasing(resolution: usize, cutoff: usize) -> Result<()> {
    let required = 2 * cutoff + 2;
    if resolution < required {
        return Err(Error::Aliasing {
            resolution,
            cutoff,
            required,
        });
    }
    Ok(())
}

/// Applies a dense `rows x cols` operator along one axis of a row-major tensor.
pub(crate) fn apply_along_axis(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    op: &[Complex64],
    rows: usize,
) -> (Vec<Complex64>, Vec<usize>) {
    let cols = shape[axis];
    debug_assert_eq!(op.len(), rows * cols);
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        for r in 0..rows {
            let row = &op[r * cols..(r + 1) * cols];
            let dst = &mut out[(o * rows + r) * inner..(o * rows + r + 1) * inner];
            for (c, &w) in row.iter().enumerate() {
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = &data[(o * cols + c) * inner..(o * cols + c + 1) * inner];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = rows;
    (out, new_shape)
}

/// Discrete Fourier analysis `c(k) = M^-N sum_x g(x) e^{-2 pi i k.x}`.
pub fn dft_forward(g: &GridField, cutoff: usize) -> Result<FourierField> {
    check_aliasing(g.resolution, cutoff)?;
    let m = g.resolution;
    let side = 2 * cutoff + 1;
    let op: Vec<Complex64> = (0..side)
        .flat_map(|r| {
            let k = r as f64 - cutoff as f64;
            (0..m).map(move |j| {
                let x = (j as f64 + 0.5) / m as f64;
                Complex64::from_polar(1.0 / m as f64, -TWO_PI * k * x)
            })
        })
        .collect();
    let mut data = g.samples.clone();
    let mut shape = vec![m; g.dim];
    for axis in 0..g.dim {
        (data, shape) = apply_along_axis(&data, &shape, axis, &op, side);
    }
    Ok(FourierField {
        dim: g.dim,
        cutoff,
        coeffs: data,
    })
}

/// Synthesis of a Fourier field on the cell-centred grid.
pub fn dft_inverse(f: &FourierField, resolution: usize) -> Result<GridField> {
    check_aliasing(resolution, f.cutoff)?;
    let side = 2 * f.cutoff + 1;
    let op: Vec<Complex64> = (0..resolution)
        .flat_map(|j| {
            let x = (j as f64 + 0.5) / resolution as f64;
            let cutoff = f.cutoff as f64;
            (0..side).map(move |r| Complex64::from_polar(1.0, TWO_PI * (r as f64 - cutoff) * x))
        })
        .collect();
    let mut data = f.coeffs.clone();
    let mut shape = vec![side; f.dim];
    for axis in 0..f.dim {
        (data, shape) = apply_along_axis(&data, &shape, axis, &op, resolution);
    }
    Ok(GridField {
        dim: f.dim,
        resolution,
        samples: data,
    })
}

/// Fourier coefficients `int f e^{-2 pi i k.x}` on the cutoff by a composite
/// Gauss-Legendre tensor rule with `panels` panels of 20 nodes per axis.
pub fn project_by_quadrature(
    dim: usize,
    cutoff: usize,
    panels: usize,
    mut f: impl FnMut(&[f64]) -> Complex64,
) -> FourierField {
    let rule = crate::quadrature::composite(20, panels);
    let q = rule.len();
    let mut data = Vec::with_capacity(q.pow(dim as u32));
    crate::quadrature::for_each_tensor_point(&rule, dim, |x, _| data.push(f(x)));
    let side = 2 * cutoff + 1;
    let op: Vec<Complex64> = (0..side)
        .flat_map(|r| {
            let k = r as f64 - cutoff as f64;
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(move |(&x, &w)| Complex64::from_polar(w, -TWO_PI * k * x))
        })
        .collect();
    let mut shape = vec![q; dim];
    for axis in 0..dim {
        (data, shape) = apply_along_axis(&data, &shape, axis, &op, side);
    }
    FourierField { dim, cutoff, coeffs: data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_projection_of_a_ramp() {
        let f = project_by_quadrature(2, 3, 4, |x| Complex64::new(x[0] - 0.5, 0.0));
        for (k, c) in f.iter() {
            let want = affine_coefficient(0, &k);
            assert!((c - want).norm() < 1e-14, "{k:?} {c} {want}");
        }
    }
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn moment0_examples() {
        assert_eq!(moment0(&FourierField::constant(1, 3, 1.0)), c(1.0));
        assert_eq!(moment0(&FourierField::cos_mode(1, 3, &[1], 1.0)), c(0.0));
        let f = FourierField::constant(2, 3, 3.0)
            .add(&FourierField::sin_mode(2, 3, &[0, 2], 1.0))
            .unwrap();
        assert_eq!(moment0(&f), c(3.0));
    }

    #[test]
    fn poisson_examples() {
        let u = poisson_solve_torus(&FourierField::constant(1, 4, 1.0));
        assert_eq!(u.max_abs(), 0.0);

        let f = FourierField::cos_mode(1, 4, &[1], 1.0);
        let expected = FourierField::cos_mode(1, 4, &[1], -1.0 / (4.0 * PI * PI));
        assert!(poisson_solve_torus(&f).sub(&expected).unwrap().max_abs() < 1e-15);

        let f = f.add(&FourierField::sin_mode(1, 4, &[2], 1.0)).unwrap();
        let u = poisson_solve_torus(&f);
        let expected = expected
            .add(&FourierField::sin_mode(1, 4, &[2], -1.0 / (16.0 * PI * PI)))
            .unwrap();
        assert!(u.sub(&expected).unwrap().max_abs() < 1e-15);
        let resid = u
            .laplacian()
            .sub(&f)
            .unwrap()
            .add(&FourierField::constant(1, 4, moment0(&f).re))
            .unwrap();
        assert!(resid.max_abs() < 1e-14);
    }

    #[test]
    fn inner_product_examples() {
        let cos = FourierField::cos_mode(1, 2, &[1], 1.0);
        let sin = FourierField::sin_mode(1, 2, &[1], 1.0);
        let one = FourierField::constant(1, 2, 1.0);
        assert_abs_diff_eq!(l2_inner(&cos, &cos).unwrap().re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(l2_inner(&cos, &sin).unwrap().norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l2_inner(&one, &one).unwrap().re, 1.0, epsilon = 1e-15);

        let expected = 1.0 / (8.0 * PI * PI);
        assert_abs_diff_eq!(hminus_inner_grad(&cos, &cos).unwrap().re, expected, epsilon = 1e-16);
        assert_abs_diff_eq!(hminus_inner_grad(&one, &one).unwrap().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hminus_inner_grad(&cos, &sin).unwrap().norm(), 0.0, epsilon = 1e-16);

        assert_abs_diff_eq!(hminus_inner_pn(&cos, &cos).unwrap().re, expected, epsilon = 1e-16);
        assert_abs_diff_eq!(hminus_inner_pn(&one, &one).unwrap().re, 13.0 / 12.0, epsilon = 1e-15);
        let cross = hminus_inner_pn(&cos, &one).unwrap();
        assert_abs_diff_eq!(cross.re, -1.0 / (4.0 * PI * PI), epsilon = 1e-16);
        assert_abs_diff_eq!(cross.im, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = FourierField::constant(1, 2, 1.0);
        let b = FourierField::constant(2, 2, 1.0);
        assert!(matches!(l2_inner(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(hminus_inner_grad(&a, &b).is_err());
        assert!(hminus_inner_pn(&a, &b).is_err());
    }

    #[test]
    fn mixed_cutoffs_zero_pad() {
        let a = FourierField::cos_mode(1, 1, &[1], 1.0);
        let b = FourierField::cos_mode(1, 5, &[1], 1.0);
        let s = a.add(&b).unwrap();
        assert_eq!(s.cutoff(), 5);
        assert_abs_diff_eq!(s.get(&[1]).re, 1.0);
    }

    #[test]
    fn primitive_examples() {
        let p = primitive(&FourierField::constant(1, 3, 1.0));
        assert_eq!(p.gradient_part[0].max_abs(), 0.0);
        assert_eq!(p.affine_coefficient, c(1.0));

        let p = primitive(&FourierField::cos_mode(1, 3, &[1], 1.0));
        let expected = FourierField::sin_mode(1, 3, &[1], 1.0 / (2.0 * PI));
        assert!(p.gradient_part[0].sub(&expected).unwrap().max_abs() < 1e-16);
        assert_eq!(p.affine_coefficient, c(0.0));

        let p = primitive(&FourierField::sin_mode(2, 3, &[1, 0], 1.0));
        let expected = FourierField::cos_mode(2, 3, &[1, 0], -1.0 / (2.0 * PI));
        assert!(p.gradient_part[0].sub(&expected).unwrap().max_abs() < 1e-16);
        assert_eq!(p.gradient_part[1].max_abs(), 0.0);
        // div P f = f mode-wise.
        let div = p.gradient_part[0].partial(0).add(&p.gradient_part[1].partial(1)).unwrap();
        assert!(div.sub(&FourierField::sin_mode(2, 3, &[1, 0], 1.0)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn dft_examples() {
        let g = GridField::from_real_fn(1, 16, |x| (2.0 * PI * x[0]).cos());
        let f = dft_forward(&g, 4).unwrap();
        for (k, v) in f.iter() {
            let want = if k[0].abs() == 1 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(v.re, want, epsilon = 1e-14);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        }
        assert!(matches!(dft_forward(&g, 8), Err(Error::Aliasing { .. })));
        assert!(dft_inverse(&f, 9).is_err());
    }

    #[test]
    fn dft_of_nonperiodic_ramp_decays_like_one_over_k() {
        let g = GridField::from_real_fn(1, 64, |x| x[0]);
        let f = dft_forward(&g, 8).unwrap();
        for k in 1..=8i64 {
            // Closed form of the continuous coefficient of x is i / (2 pi k).
            let exact = 1.0 / (TWO_PI * k as f64);
            let got = f.get(&[k]);
            // The grid sees the jump as i / (2 M sin(pi k / M)).
            let discrete = 1.0 / (128.0 * (PI * k as f64 / 64.0).sin());
            assert_abs_diff_eq!(got.im, discrete, epsilon = 1e-14);
            assert!(got.re.abs() < 1e-14);
            assert!((got.im - exact).abs() <= 0.03 * exact, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn evaluation_matches_synthesis() {
        let f = FourierField::cos_mode(2, 2, &[1, -2], 0.7)
            .add(&FourierField::sin_mode(2, 2, &[2, 1], -0.3))
            .unwrap();
        let g = dft_inverse(&f, 6).unwrap();
        let x = [2.5 / 6.0, 4.5 / 6.0];
        assert_abs_diff_eq!(g.samples()[2 * 6 + 4].re, f.eval(&x).re, epsilon = 1e-14);
        assert!(f.is_hermitian(1e-13));
    }
}
