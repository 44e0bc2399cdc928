//! Separable harmonic families on the unit cube, their Gram data and
//! orthonormalization, L^2 projections, the harmonic lifting of periodic traces
//! and the weak-periodicity trace test.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{multi_indices, FourierField};
use crate::quadrature::{composite, for_each_tensor_point, Rule};

const TWO_PI: f64 = 2.0 * PI;
const GL_ORDER: usize = 20;

/// One-dimensional factor of a separable harmonic.
///
/// Trig factors carry an integer `n` for the frequency `n pi`. Hyperbolic factors
/// carry `q` for the rate `a = pi sqrt(q)` and are centred at 1/2 and divided by
/// `cosh(a / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Const,
    Affine,
    Cos(u32),
    Sin(u32),
    Cosh(u64),
    Sinh(u64),
}

fn exp_pair(a: f64, x: f64) -> (f64, f64) {
    let denom = 1.0 + (-a).exp();
    ((a * (x - 1.0)).exp() / denom, (-a * x).exp() / denom)
}

/// `int_0^1 e^{i pi p x} dx` for integer `p`.
fn trig_moment(p: i64) -> Complex64 {
    if p == 0 {
        Complex64::new(1.0, 0.0)
    } else if p % 2 != 0 {
        Complex64::new(0.0, 2.0 / (PI * p as f64))
    } else {
        Complex64::new(0.0, 0.0)
    }
}

impl Factor {
    pub fn rate(&self) -> f64 {
        match *self {
            Factor::Const | Factor::Affine => 0.0,
            Factor::Cos(n) | Factor::Sin(n) => PI * n as f64,
            Factor::Cosh(q) | Factor::Sinh(q) => PI * (q as f64).sqrt(),
        }
    }

    /// `sigma` in `phi'' = sigma phi` (zero for the constant and affine factors).
    pub fn curvature(&self) -> f64 {
        match *self {
            Factor::Const | Factor::Affine => 0.0,
            Factor::Cos(n) | Factor::Sin(n) => -(PI * n as f64).powi(2),
            Factor::Cosh(q) | Factor::Sinh(q) => PI * PI * q as f64,
        }
    }

    /// `pi^-2 phi''/phi` as an exact integer.
    fn curvature_units(&self) -> i64 {
        match *self {
            Factor::Const | Factor::Affine => 0,
            Factor::Cos(n) | Factor::Sin(n) => -((n as i64).pow(2)),
            Factor::Cosh(q) | Factor::Sinh(q) => q as i64,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Factor::Const => 1.0,
            Factor::Affine => x - 0.5,
            Factor::Cos(n) => (PI * n as f64 * x).cos(),
            Factor::Sin(n) => (PI * n as f64 * x).sin(),
            Factor::Cosh(_) => {
                let (p, m) = exp_pair(self.rate(), x);
                p + m
            }
            Factor::Sinh(_) => {
                let (p, m) = exp_pair(self.rate(), x);
                p - m
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.curvature() * self.eval(x)
    }

    /// `int_0^1 phi(x) e^{-2 pi i k x} dx`.
    pub fn fourier(&self, k: i64) -> Complex64 {
        match *self {
            Factor::Const => {
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Factor::Affine => {
                if k == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, 1.0 / (TWO_PI * k as f64))
                }
            }
            Factor::Cos(n) => {
                let n = n as i64;
                (trig_moment(n - 2 * k) + trig_moment(-n - 2 * k)) * 0.5
            }
            Factor::Sin(n) => {
                let n = n as i64;
                (trig_moment(n - 2 * k) - trig_moment(-n - 2 * k)) / Complex64::new(0.0, 2.0)
            }
            Factor::Cosh(_) => {
                let a = self.rate();
                let theta = TWO_PI * k as f64;
                Complex64::new(2.0 * a * (0.5 * a).tanh() / (a * a + theta * theta), 0.0)
            }
            Factor::Sinh(_) => {
                let a = self.rate();
                let theta = TWO_PI * k as f64;
                Complex64::new(0.0, 2.0 * theta * (0.5 * a).tanh() / (a * a + theta * theta))
            }
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Factor::Const => write!(f, "1"),
            Factor::Affine => write!(f, "(x-1/2)"),
            Factor::Cos(n) => write!(f, "cos({n}pi x)"),
            Factor::Sin(n) => write!(f, "sin({n}pi x)"),
            Factor::Cosh(q) => write!(f, "cosh(pi sqrt({q}) (x-1/2))"),
            Factor::Sinh(q) => write!(f, "sinh(pi sqrt({q}) (x-1/2))"),
        }
    }
}

/// Pointwise evaluation on `[0, 1]^N`.
pub trait Evaluate {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Complex64;
}

impl Evaluate for FourierField {
    fn dim(&self) -> usize {
        FourierField::dim(self)
    }

    fn value(&self, x: &[f64]) -> Complex64 {
        self.eval(x)
    }
}

/// Wraps a closure as an evaluator.
pub struct FnEvaluator<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> Evaluate for FnEvaluator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Complex64 {
        Complex64::new((self.f)(x), 0.0)
    }
}

/// Product of per-axis factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HarmonicFunction {
    pub factors: Vec<Factor>,
}

impl HarmonicFunction {
    pub fn new(factors: Vec<Factor>) -> Self {
        assert!(!factors.is_empty());
        Self { factors }
    }

    pub fn constant(dim: usize) -> Self {
        Self::new(vec![Factor::Const; dim])
    }

    pub fn affine(dim: usize, axis: usize) -> Self {
        let mut factors = vec![Factor::Const; dim];
        factors[axis] = Factor::Affine;
        Self::new(factors)
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().zip(x).map(|(f, &xi)| f.eval(xi)).product()
    }

    /// Exact Laplacian at `x` and a magnitude scale for relative tests.
    pub fn laplacian(&self, x: &[f64]) -> (f64, f64) {
        let values: Vec<f64> = self.factors.iter().zip(x).map(|(f, &xi)| f.eval(xi)).collect();
        let mut lap = 0.0;
        let mut scale = 0.0;
        for (i, f) in self.factors.iter().enumerate() {
            let rest: f64 = values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v)
                .product();
            let term = f.second_derivative(x[i]) * rest;
            lap += term;
            scale += term.abs();
        }
        (lap, scale)
    }

    /// Whether the factor curvatures cancel exactly.
    pub fn is_balanced(&self) -> bool {
        self.factors.iter().map(Factor::curvature_units).sum::<i64>() == 0
    }

    pub fn max_rate(&self) -> f64 {
        self.factors.iter().map(Factor::rate).fold(0.0, f64::max)
    }

    pub fn fourier_coefficient(&self, k: &[i64]) -> Complex64 {
        self.factors.iter().zip(k).map(|(f, &kj)| f.fourier(kj)).product()
    }

    /// Truncation `P_K h` of the Fourier series.
    pub fn to_fourier(&self, cutoff: usize) -> FourierField {
        let c = cutoff as i64;
        let tables: Vec<Vec<Complex64>> = self
            .factors
            .iter()
            .map(|f| (-c..=c).map(|k| f.fourier(k)).collect())
            .collect();
        FourierField::from_fn(self.dim(), cutoff, |k| {
            k.iter()
                .enumerate()
                .map(|(j, &kj)| tables[j][(kj + c) as usize])
                .product()
        })
    }
}

impl Evaluate for HarmonicFunction {
    fn dim(&self) -> usize {
        HarmonicFunction::dim(self)
    }

    fn value(&self, x: &[f64]) -> Complex64 {
        Complex64::new(self.eval(x), 0.0)
    }
}

impl fmt::Display for HarmonicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            let s = factor.to_string().replace('x', &format!("x{}", i + 1));
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Memoized one-dimensional factor integrals.
#[derive(Debug, Default, Clone)]
pub struct FactorIntegrals {
    cache: HashMap<(Factor, Factor), f64>,
}

impl FactorIntegrals {
    fn rule_for(rate: f64) -> Rule {
        let panels = (rate / PI).ceil() as usize + 1;
        composite(GL_ORDER, panels)
    }

    /// `int_0^1 a(x) b(x) dx`.
    pub fn pair(&mut self, a: Factor, b: Factor) -> f64 {
        let key = if a <= b { (a, b) } else { (b, a) };
        *self.cache.entry(key).or_insert_with(|| {
            let rule = Self::rule_for(a.rate().max(b.rate()));
            rule.integrate(|x| a.eval(x) * b.eval(x))
        })
    }

    pub fn inner(&mut self, f: &HarmonicFunction, g: &HarmonicFunction) -> f64 {
        f.factors
            .iter()
            .zip(&g.factors)
            .map(|(&a, &b)| self.pair(a, b))
            .product()
    }
}

/// Which harmonic space a family truncates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicKind {
    Cube,
    Torus,
}

/// Why a raw member was discarded by [`orthonormalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DropReason {
    Duplicate { of: usize },
    Dependent { relative_residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dropped {
    pub index: usize,
    pub reason: DropReason,
}

#[derive(Debug, Clone)]
pub struct Orthonormal {
    /// Raw-to-orthonormal coefficients: column `j` holds `e_j = sum_i C_ij h_i`.
    pub coefficients: DMatrix<f64>,
    pub kept: Vec<usize>,
    pub dropped: Vec<Dropped>,
}

/// A closed-form separable harmonic family with its L^2 Gram data.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub kind: HarmonicKind,
    pub dim: usize,
    pub order: usize,
    pub functions: Vec<HarmonicFunction>,
    pub gram: DMatrix<f64>,
    pub raw_condition: f64,
    pub orthonormal: Option<Orthonormal>,
}

fn trig_choices(ms: &[u32], scale: u32) -> Vec<Vec<Factor>> {
    let mut out = vec![Vec::new()];
    for &m in ms {
        let mut next = Vec::new();
        for prefix in &out {
            if m == 0 {
                let mut p = prefix.clone();
                p.push(Factor::Const);
                next.push(p);
            } else {
                for f in [Factor::Cos(scale * m), Factor::Sin(scale * m)] {
                    let mut p = prefix.clone();
                    p.push(f);
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

fn nonzero_indices(count: usize, order: usize) -> Vec<Vec<u32>> {
    let side = order + 1;
    let total = side.pow(count as u32);
    (1..total)
        .map(|mut flat| {
            let mut m = vec![0u32; count];
            for j in (0..count).rev() {
                m[j] = (flat % side) as u32;
                flat /= side;
            }
            m
        })
        .collect()
}

/// One-hyperbolic-axis products: trig factors of frequency `scale * m_i * pi`
/// on the other axes and a hyperbolic factor on `axis` balancing them.
fn separable_family(dim: usize, order: usize, scale: u32, hyperbolic: &[fn(u64) -> Factor]) -> Vec<HarmonicFunction> {
    let mut out = Vec::new();
    for axis in 0..dim {
        for m in nonzero_indices(dim - 1, order) {
            let q: u64 = m.iter().map(|&mi| ((scale * mi) as u64).pow(2)).sum();
            for trig in trig_choices(&m, scale) {
                for make in hyperbolic {
                    let mut factors = trig.clone();
                    factors.insert(axis, make(q));
                    out.push(HarmonicFunction::new(factors));
                }
            }
        }
    }
    out
}

fn gram_matrix(functions: &[HarmonicFunction], integrals: &mut FactorIntegrals) -> DMatrix<f64> {
    let n = functions.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = integrals.inner(&functions[i], &functions[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Spectral condition number of the diagonally scaled Gram matrix.
fn scaled_condition(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    if n == 0 {
        return 1.0;
    }
    let d: Vec<f64> = (0..n).map(|i| g[(i, i)].sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| g[(i, j)] / (d[i] * d[j]));
    let eig = scaled.symmetric_eigenvalues();
    let max = eig.max();
    let min = eig.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl HarmonicBasis {
    /// Builds a family and its Gram matrix from explicit members.
    pub fn from_functions(kind: HarmonicKind, dim: usize, order: usize, functions: Vec<HarmonicFunction>) -> Self {
        let mut integrals = FactorIntegrals::default();
        let gram = gram_matrix(&functions, &mut integrals);
        let raw_condition = scaled_condition(&gram);
        Self {
            kind,
            dim,
            order,
            functions,
            gram,
            raw_condition,
            orthonormal: None,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Number of orthonormal members (raw count before orthonormalization).
    pub fn rank(&self) -> usize {
        self.orthonormal
            .as_ref()
            .map_or(self.functions.len(), |o| o.kept.len())
    }

    fn require_orthonormal(&self) -> &Orthonormal {
        self.orthonormal
            .as_ref()
            .expect("harmonic basis must be orthonormalized first")
    }

    /// Gram matrix of the orthonormal members, `C^T G C`.
    pub fn orthonormal_gram(&self) -> DMatrix<f64> {
        let c = &self.require_orthonormal().coefficients;
        c.transpose() * &self.gram * c
    }

    /// Condition number of the orthonormal Gram if available, else of the raw one.
    pub fn condition_number(&self) -> f64 {
        match &self.orthonormal {
            Some(_) => {
                let eig = self.orthonormal_gram().symmetric_eigenvalues();
                if eig.is_empty() {
                    1.0
                } else if eig.min() <= 0.0 {
                    f64::INFINITY
                } else {
                    eig.max() / eig.min()
                }
            }
            None => self.raw_condition,
        }
    }

    /// Raw members that survived orthonormalization, or all of them.
    pub fn kept_functions(&self) -> Vec<&HarmonicFunction> {
        match &self.orthonormal {
            Some(o) => o.kept.iter().map(|&i| &self.functions[i]).collect(),
            None => self.functions.iter().collect(),
        }
    }

    /// Orthonormal member `j` as a combination of raw members.
    pub fn member_terms(&self, j: usize) -> Vec<(f64, &HarmonicFunction)> {
        let o = self.require_orthonormal();
        (0..self.functions.len())
            .filter_map(|i| {
                let c = o.coefficients[(i, j)];
                (c != 0.0).then(|| (c, &self.functions[i]))
            })
            .collect()
    }

    pub fn eval_member(&self, j: usize, x: &[f64]) -> f64 {
        self.member_terms(j).iter().map(|(c, h)| c * h.eval(x)).sum()
    }

    /// `P_K e_j` for orthonormal member `j`.
    pub fn member_fourier(&self, j: usize, cutoff: usize) -> FourierField {
        let mut out = FourierField::zeros(self.dim, cutoff);
        for (c, h) in self.member_terms(j) {
            out = out.add(&h.to_fourier(cutoff).scale_real(c)).expect("same dimension");
        }
        out
    }

    /// Least-squares reconstruction of `target` from the orthonormal members;
    /// returns the relative L^2 residual computed from the Gram data.
    pub fn reconstruction_residual(&self, target: &HarmonicFunction) -> f64 {
        let o = self.require_orthonormal();
        // Exact structural match: zero residual by construction.
        if o.kept.iter().any(|&i| &self.functions[i] == target) {
            return 0.0;
        }
        let mut integrals = FactorIntegrals::default();
        let p = DVector::from_iterator(
            self.functions.len(),
            self.functions.iter().map(|h| integrals.inner(h, target)),
        );
        let coeffs = o.coefficients.transpose() * p;
        let norm_sq = integrals.inner(target, target);
        ((norm_sq - coeffs.norm_squared()).max(0.0) / norm_sq).sqrt()
    }
}

/// Har(T^N) truncation: the constant plus one-hyperbolic-axis products with
/// `2 pi m` trig frequencies, `max m_i <= order`.
pub fn build_torus_harmonics(dim: usize, order: usize) -> HarmonicBasis {
    let mut functions = vec![HarmonicFunction::constant(dim)];
    functions.extend(separable_family(dim, order, 2, &[Factor::Cosh]));
    HarmonicBasis::from_functions(HarmonicKind::Torus, dim, order, functions)
}

/// Har((0,1)^N) truncation: constant, affines, the torus family of the same
/// order and `k pi` products with both hyperbolic partners. Exact repeats are
/// left in and removed by [`orthonormalize`].
pub fn build_cube_harmonics(dim: usize, order: usize) -> HarmonicBasis {
    let mut functions = vec![HarmonicFunction::constant(dim)];
    functions.extend((0..dim).map(|i| HarmonicFunction::affine(dim, i)));
    functions.extend(separable_family(dim, order, 2, &[Factor::Cosh]));
    functions.extend(separable_family(dim, order, 1, &[Factor::Cosh, Factor::Sinh]));
    HarmonicBasis::from_functions(HarmonicKind::Cube, dim, order, functions)
}

/// Modified Gram-Schmidt in the Gram metric, two passes plus one Cholesky
/// refinement of the result. Members whose residual falls below
/// `drop_tolerance` times their own norm are discarded and reported.
pub fn orthonormalize(basis: &HarmonicBasis, drop_tolerance: f64) -> Result<HarmonicBasis> {
    let n = basis.functions.len();
    let g = &basis.gram;
    let mut first_seen: HashMap<&HarmonicFunction, usize> = HashMap::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    let mut columns: Vec<DVector<f64>> = Vec::new();
    let mut g_columns: Vec<DVector<f64>> = Vec::new();

    for i in 0..n {
        if let Some(&of) = first_seen.get(&basis.functions[i]) {
            dropped.push(Dropped {
                index: i,
                reason: DropReason::Duplicate { of },
            });
            continue;
        }
        first_seen.insert(&basis.functions[i], i);

        let norm_sq = g[(i, i)];
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for (c, gc) in columns.iter().zip(&g_columns) {
                let proj = gc.dot(&v);
                v.axpy(-proj, c, 1.0);
            }
        }
        let gv = g * &v;
        let r2 = v.dot(&gv);
        // Absolute accuracy of v^T G v for the combination v.
        let spread: f64 = v.iter().enumerate().map(|(j, c)| c.abs() * g[(j, j)].sqrt()).sum();
        let floor = NOISE_FLOOR * spread * spread;
        if r2 < -NEGATIVE_SLACK * floor.max(1e-15 * norm_sq) {
            return Err(Error::GramNotPsd {
                member: i,
                residual: r2,
            });
        }
        let rel = (r2.max(0.0) / norm_sq).sqrt();
        if rel < drop_tolerance || r2 <= floor {
            dropped.push(Dropped {
                index: i,
                reason: DropReason::Dependent {
                    relative_residual: rel,
                },
            });
            continue;
        }
        let s = 1.0 / r2.sqrt();
        columns.push(&v * s);
        g_columns.push(gv * s);
        kept.push(i);
    }

    let mut c = DMatrix::from_columns(&columns);
    if c.ncols() == 0 {
        c = DMatrix::zeros(n, 0);
    } else {
        let inner = c.transpose() * g * &c;
        let chol = inner
            .cholesky()
            .ok_or_else(|| Error::GramNotPsd {
                member: kept.last().copied().unwrap_or(0),
                residual: f64::NAN,
            })?;
        let l = chol.l();
        // C <- C L^{-T}
        let ct = l
            .solve_lower_triangular(&c.transpose())
            .expect("Cholesky factor is nonsingular");
        c = ct.transpose();
    }

    let mut out = basis.clone();
    out.orthonormal = Some(Orthonormal {
        coefficients: c,
        kept,
        dropped,
    });
    Ok(out)
}

const NOISE_FLOOR: f64 = 1e-13;
const NEGATIVE_SLACK: f64 = 1e3;

/// Default relative drop tolerance for [`orthonormalize`].
pub const DROP_TOLERANCE: f64 = 1e-8;

/// A trig polynomial plus a finite harmonic combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub trig: FourierField,
    pub harmonic: Vec<(Complex64, HarmonicFunction)>,
}

impl Field {
    pub fn from_trig(trig: FourierField) -> Self {
        Self {
            trig,
            harmonic: Vec::new(),
        }
    }

    pub fn from_harmonic(dim: usize, cutoff: usize, terms: Vec<(Complex64, HarmonicFunction)>) -> Self {
        Self {
            trig: FourierField::zeros(dim, cutoff),
            harmonic: terms,
        }
    }

    pub fn dim(&self) -> usize {
        self.trig.dim()
    }

    /// Merges equal harmonic terms and drops zero coefficients.
    pub fn add_harmonic(&mut self, coefficient: Complex64, h: &HarmonicFunction) {
        if let Some(term) = self.harmonic.iter_mut().find(|(_, g)| g == h) {
            term.0 += coefficient;
        } else {
            self.harmonic.push((coefficient, h.clone()));
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        let mut out = Field::from_trig(self.trig.add(&other.trig)?);
        out.harmonic = self.harmonic.clone();
        for (c, h) in &other.harmonic {
            out.add_harmonic(*c, h);
        }
        Ok(out)
    }

    /// `int self conj(h)` for a real harmonic `h`.
    pub fn pair(&self, h: &HarmonicFunction, integrals: &mut FactorIntegrals) -> Complex64 {
        let trig: Complex64 = self
            .trig
            .iter()
            .map(|(k, c)| c * h.fourier_coefficient(&k).conj())
            .sum();
        let harm: Complex64 = self
            .harmonic
            .iter()
            .map(|(c, g)| c * integrals.inner(g, h))
            .sum();
        trig + harm
    }

    /// `int self conj(other)`.
    pub fn inner(&self, other: &Field, integrals: &mut FactorIntegrals) -> Result<Complex64> {
        let mut total = crate::fourier::l2_inner(&self.trig, &other.trig)?;
        for (c, h) in &other.harmonic {
            total += self.pair(h, integrals) * c.conj();
        }
        Ok(total)
    }

    /// Fourier coefficients up to `cutoff` (truncating the harmonic part).
    pub fn to_fourier(&self, cutoff: usize) -> FourierField {
        let mut out = self.trig.resized(cutoff.max(self.trig.cutoff()));
        for (c, h) in &self.harmonic {
            out = out
                .add(&h.to_fourier(out.cutoff()).scale(*c))
                .expect("same dimension");
        }
        out.resized(cutoff)
    }
}

impl Evaluate for Field {
    fn dim(&self) -> usize {
        self.trig.dim()
    }

    fn value(&self, x: &[f64]) -> Complex64 {
        self.trig.eval(x)
            + self
                .harmonic
                .iter()
                .map(|(c, h)| c * h.eval(x))
                .sum::<Complex64>()
    }
}

/// `f - sum_j (f | e_j) e_j` over the orthonormal members.
pub fn project_out(f: &Field, basis: &HarmonicBasis) -> Field {
    let o = basis.require_orthonormal();
    let mut integrals = FactorIntegrals::default();
    let n = basis.functions.len();
    let p: Vec<Complex64> = basis
        .functions
        .iter()
        .map(|h| f.pair(h, &mut integrals))
        .collect();
    let c = &o.coefficients;
    let mut out = f.clone();
    let mut beta = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..c.ncols() {
        let proj: Complex64 = (0..n).map(|i| p[i] * c[(i, j)]).sum();
        for (i, b) in beta.iter_mut().enumerate() {
            *b += proj * c[(i, j)];
        }
    }
    for (i, b) in beta.into_iter().enumerate() {
        if b != Complex64::new(0.0, 0.0) {
            out.add_harmonic(-b, &basis.functions[i]);
        }
    }
    out
}

/// The harmonic lifting of the trace of `f` onto a torus family.
#[derive(Debug, Clone)]
pub struct HarmonicLift {
    pub basis: HarmonicBasis,
    pub coefficients: Vec<Complex64>,
    pub residual: f64,
    pub condition: f64,
}

impl HarmonicLift {
    pub fn as_field(&self, cutoff: usize) -> Field {
        let terms = self
            .coefficients
            .iter()
            .zip(&self.basis.functions)
            .map(|(&c, h)| (c, h.clone()))
            .collect();
        Field::from_harmonic(self.basis.dim, cutoff, terms)
    }

    /// `sum_i c_i P_K h_i`.
    pub fn to_fourier(&self, cutoff: usize) -> FourierField {
        let mut out = FourierField::zeros(self.basis.dim, cutoff);
        for (&c, h) in self.coefficients.iter().zip(&self.basis.functions) {
            out = out.add(&h.to_fourier(cutoff).scale(c)).expect("same dimension");
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.coefficients
            .iter()
            .zip(&self.basis.functions)
            .map(|(&c, h)| c * h.eval(x))
            .sum()
    }
}

/// Fourier coefficients of the face trace `f|_{x_axis = 0}`; the same for
/// `x_axis = 1` since trig polynomials are periodic.
fn face_trace(f: &FourierField, axis: usize) -> Vec<Complex64> {
    let n = f.dim();
    let cutoff = f.cutoff();
    multi_indices(n - 1, cutoff)
        .map(|kp| {
            let mut k: Vec<i64> = kp.clone();
            k.insert(axis, 0);
            (-(cutoff as i64)..=cutoff as i64)
                .map(|kj| {
                    k[axis] = kj;
                    f.get(&k)
                })
                .sum()
        })
        .collect()
}

/// Condition threshold above which the trace fit is rejected.
pub const LIFT_CONDITION_LIMIT: f64 = 1e12;

/// Least-squares torus-harmonic combination matching the trace of `f` on every
/// face, fitted on the trace Fourier coefficients of the truncated members.
pub fn harmonic_lift(f: &FourierField) -> Result<HarmonicLift> {
    let n = f.dim();
    let cutoff = f.cutoff();
    let basis = build_torus_harmonics(n, cutoff);
    let traces: Vec<Vec<Complex64>> = basis
        .functions
        .iter()
        .map(|h| {
            let t = h.to_fourier(cutoff);
            (0..n).flat_map(|axis| face_trace(&t, axis)).collect()
        })
        .collect();
    let rows = traces[0].len();
    let cols = traces.len();
    let a = DMatrix::from_fn(rows, cols, |r, c| traces[c][r]);
    let b = DVector::from_iterator(rows, (0..n).flat_map(|axis| face_trace(f, axis)));

    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    let min = sv.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition > LIFT_CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition,
            threshold: LIFT_CONDITION_LIMIT,
        });
    }
    let coeffs = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (&a * &coeffs - &b).norm();
    Ok(HarmonicLift {
        basis,
        coefficients: coeffs.iter().copied().collect(),
        residual,
        condition,
    })
}

/// Per-axis weak-periodicity residual of `v`: the largest pairing of the face
/// jump `v|_{x_i=0} - v|_{x_i=1}` with the trig test functions of order
/// `test_order`, each scaled by `(1 + 4 pi^2 |m|^2)^{-1/4}`. Face integrals use
/// `panels` Gauss-Legendre panels per axis.
pub fn weak_periodicity_residual(v: &dyn Evaluate, test_order: usize, panels: usize) -> Vec<f64> {
    let n = v.dim();
    if n == 1 {
        return vec![(v.value(&[0.0]) - v.value(&[1.0])).norm()];
    }
    let rule = composite(GL_ORDER, panels);
    let tests: Vec<Vec<i64>> = multi_indices(n - 1, test_order).collect();
    (0..n)
        .map(|axis| {
            let mut pairings = vec![Complex64::new(0.0, 0.0); tests.len()];
            for_each_tensor_point(&rule, n - 1, |xp, w| {
                let mut x: Vec<f64> = xp.to_vec();
                x.insert(axis, 0.0);
                let lower = v.value(&x);
                x[axis] = 1.0;
                let jump = lower - v.value(&x);
                for (p, m) in pairings.iter_mut().zip(&tests) {
                    let phase: f64 = m.iter().zip(xp).map(|(&mi, &xi)| mi as f64 * xi).sum();
                    *p += jump * Complex64::from_polar(w, -TWO_PI * phase);
                }
            });
            pairings
                .iter()
                .zip(&tests)
                .map(|(p, m)| {
                    let q: f64 = m.iter().map(|&mi| (mi * mi) as f64).sum();
                    p.norm() * (1.0 + TWO_PI * TWO_PI * q).powf(-0.25)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
