//! Heat semigroups generated by the discrete operators: projection of initial
//! data, exact spectral time evolution and moment diagnostics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::{hminus_inner_grad, moment0, FourierField};
use crate::galerkin::{to_real, Discretization, KreinOperator, SubspaceBasis};
use crate::harmonic::{Field, FactorIntegrals, HarmonicBasis, HarmonicFunction};

/// Inner product used to project initial data onto the subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    #[default]
    H,
    L2,
}

#[derive(Debug, Clone)]
pub struct Projected {
    pub coefficients: DVector<f64>,
    /// Norm of `u0 - P u0` in the projection's own norm.
    pub discarded_norm: f64,
}

/// Orthogonal projection of `u0` onto the span of `basis`.
pub fn project_initial(u0: &FourierField, basis: &SubspaceBasis, mode: Projection) -> Result<Projected> {
    if u0.dim() != basis.dim {
        return Err(Error::DimensionMismatch {
            left: u0.dim(),
            right: basis.dim,
        });
    }
    let r = to_real(&u0.resized(basis.cutoff), &basis.modes);
    let b = &basis.vectors;
    let coefficients = match mode {
        Projection::L2 => b.transpose() * &r,
        Projection::H => {
            let w = basis.hminus_weights();
            let mut wb = b.clone();
            for (mut row, &wi) in wb.row_iter_mut().zip(w.iter()) {
                row *= wi;
            }
            let m = b.transpose() * &wb;
            let rhs = wb.transpose() * &r;
            m.cholesky()
                .ok_or_else(|| Error::NotPositiveDefinite("H^-1 Gram of the subspace basis".into()))?
                .solve(&rhs)
        }
    };
    let rest = u0.sub(&basis.combination(&coefficients))?;
    let discarded_norm = match mode {
        Projection::L2 => rest.l2_norm(),
        Projection::H => hminus_inner_grad(&rest, &rest)?.re.max(0.0).sqrt(),
    };
    Ok(Projected {
        coefficients,
        discarded_norm,
    })
}

/// L^2-normalized members of a harmonic family, ready for exact pairings with
/// trig polynomials.
#[derive(Debug, Clone)]
pub struct MomentFamily {
    dim: usize,
    cutoff: usize,
    functions: Vec<HarmonicFunction>,
    norms: Vec<f64>,
    truncations: Vec<FourierField>,
}

impl MomentFamily {
    /// Uses the members kept by orthonormalization (or all of them).
    pub fn new(basis: &HarmonicBasis, cutoff: usize) -> Self {
        let kept: Vec<HarmonicFunction> = basis.kept_functions().into_iter().cloned().collect();
        Self::from_functions(basis.dim, cutoff, kept)
    }

    pub fn from_functions(dim: usize, cutoff: usize, functions: Vec<HarmonicFunction>) -> Self {
        let mut integrals = FactorIntegrals::default();
        let norms: Vec<f64> = functions.iter().map(|h| integrals.inner(h, h).sqrt()).collect();
        let truncations = functions.iter().map(|h| h.to_fourier(cutoff)).collect();
        Self {
            dim,
            cutoff,
            functions,
            norms,
            truncations,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn functions(&self) -> &[HarmonicFunction] {
        &self.functions
    }

    /// `int u conj(h_j) / ||h_j||` for every member.
    pub fn signed_pairings(&self, u: &FourierField) -> Vec<Complex64> {
        self.functions
            .iter()
            .enumerate()
            .map(|(j, h)| {
                let p = if u.cutoff() <= self.cutoff {
                    pair_truncated(u, &self.truncations[j])
                } else {
                    pair_truncated(u, &h.to_fourier(u.cutoff()))
                };
                p / self.norms[j]
            })
            .collect()
    }

    /// Moduli of [`Self::signed_pairings`].
    pub fn pairings(&self, u: &FourierField) -> Vec<f64> {
        self.signed_pairings(u).iter().map(|p| p.norm()).collect()
    }
}

fn pair_truncated(u: &FourierField, h: &FourierField) -> Complex64 {
    u.iter().map(|(k, c)| c * h.get(&k).conj()).sum()
}

/// `int x_axis e^{2 pi i k.x}` over the unit cube.
fn first_moment_symbol(axis: usize, k: &[i64]) -> Complex64 {
    if k.iter().enumerate().any(|(j, &kj)| j != axis && kj != 0) {
        return Complex64::new(0.0, 0.0);
    }
    match k[axis] {
        0 => Complex64::new(0.5, 0.0),
        n => Complex64::new(0.0, -1.0 / (2.0 * PI * n as f64)),
    }
}

/// `int x_i u` for every axis, exact for trig polynomials.
pub fn first_moments(u: &FourierField) -> Vec<f64> {
    (0..u.dim())
        .map(|axis| {
            u.iter()
                .map(|(k, c)| c * first_moment_symbol(axis, &k))
                .sum::<Complex64>()
                .re
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub mass: f64,
    pub first_moments: Vec<f64>,
    pub pairings: Vec<f64>,
    pub max_pairing: f64,
}

pub fn moment_report(u: &FourierField, family: &MomentFamily) -> MomentReport {
    let pairings = family.pairings(u);
    let max_pairing = pairings.iter().copied().fold(0.0, f64::max);
    MomentReport {
        mass: moment0(u).re,
        first_moments: first_moments(u),
        pairings,
        max_pairing,
    }
}

/// Sampled trajectory of a semigroup orbit.
#[derive(Debug, Clone, Default)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// Subspace coordinates of the state at each time.
    pub states: Vec<DVector<f64>>,
    pub l2_norms: Vec<f64>,
    pub h_norms: Vec<f64>,
    pub mass: Vec<f64>,
    pub first_moments: Vec<Vec<f64>>,
    /// Normalized pairings with the harmonic family, one row per time.
    pub moment_matrix: Vec<Vec<f64>>,
    /// Kernel coordinates, constant in time; empty outside Krein runs.
    pub kernel: Vec<DVector<f64>>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_pairing(&self, i: usize) -> f64 {
        self.moment_matrix[i].iter().copied().fold(0.0, f64::max)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be ascending".into()));
    }
    Ok(())
}

/// Modal coordinates `X^T M c` of `c`.
pub fn modal_coordinates(c: &DVector<f64>, system: &Discretization) -> DVector<f64> {
    system.eig.vectors.transpose() * (&system.pencil.m * c)
}

/// `e^{-tA} c0` in subspace coordinates; `t = 0` returns `c0` itself.
pub fn propagate(c0: &DVector<f64>, system: &Discretization, t: f64) -> Result<DVector<f64>> {
    check_times(&[t])?;
    if t == 0.0 {
        return Ok(c0.clone());
    }
    let a = modal_coordinates(c0, system);
    let scaled = DVector::from_iterator(
        a.len(),
        a.iter()
            .zip(&system.eig.values)
            .map(|(ai, &l)| ai * (-l * t).exp()),
    );
    Ok(&system.eig.vectors * scaled)
}

/// Exact spectral evolution sampled at `times`, with moments measured against
/// `family`.
pub fn evolve(
    c0: &DVector<f64>,
    system: &Discretization,
    times: &[f64],
    family: &MomentFamily,
) -> Result<EvolutionTrace> {
    check_times(times)?;
    if c0.len() != system.basis.len() {
        return Err(Error::DimensionMismatch {
            left: c0.len(),
            right: system.basis.len(),
        });
    }
    let a = modal_coordinates(c0, system);
    let mut trace = EvolutionTrace::default();
    for &t in times {
        let decay: Vec<f64> = system.eig.values.iter().map(|&l| (-l * t).exp()).collect();
        let state = if t == 0.0 {
            c0.clone()
        } else {
            let scaled = DVector::from_iterator(a.len(), a.iter().zip(&decay).map(|(ai, d)| ai * d));
            &system.eig.vectors * scaled
        };
        let h_norm = a
            .iter()
            .zip(&decay)
            .map(|(ai, d)| (ai * d).powi(2))
            .sum::<f64>()
            .sqrt();
        let u = system.basis.combination(&state);
        let report = moment_report(&u, family);
        trace.times.push(t);
        trace.l2_norms.push(state.norm());
        trace.h_norms.push(h_norm);
        trace.mass.push(report.mass);
        trace.first_moments.push(report.first_moments);
        trace.moment_matrix.push(report.pairings);
        trace.states.push(state);
    }
    Ok(trace)
}

/// `u0 = v0 + v1` with `v0` in the V block (subspace coordinates) and `v1` in
/// the kernel (orthonormal kernel coordinates).
#[derive(Debug, Clone)]
pub struct KreinSplit {
    pub v_part: DVector<f64>,
    pub kernel: DVector<f64>,
    /// L^2 norm of what neither block captures.
    pub discarded_norm: f64,
}

/// L^2 decomposition of a field, exact in every pairing.
pub fn krein_split(u0: &Field, krein: &KreinOperator) -> Result<KreinSplit> {
    if u0.dim() != krein.basis.dim {
        return Err(Error::DimensionMismatch {
            left: u0.dim(),
            right: krein.basis.dim,
        });
    }
    let kernel_basis = krein.kernel();
    let mut integrals = FactorIntegrals::default();
    let raw: Vec<f64> = kernel_basis
        .functions
        .iter()
        .map(|h| u0.pair(h, &mut integrals).re)
        .collect();
    let raw = DVector::from_vec(raw);
    let c = &kernel_basis
        .orthonormal
        .as_ref()
        .expect("kernel basis is orthonormalized")
        .coefficients;
    let kernel = c.transpose() * raw;
    // V_h is orthogonal to the truncated kernel, so projecting u0 or v0 agree.
    let r = to_real(&u0.to_fourier(krein.basis.cutoff), &krein.basis.modes);
    let v_part = krein.basis.vectors.transpose() * r;
    let total = u0.inner(u0, &mut integrals)?.re;
    let kept = v_part.norm_squared() + kernel.norm_squared();
    Ok(KreinSplit {
        v_part,
        kernel,
        discarded_norm: (total - kept).max(0.0).sqrt(),
    })
}

/// Pairings of the orthonormal kernel members with the family members, and
/// their masses and first moments.
fn kernel_moment_data(krein: &KreinOperator, family: &MomentFamily) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let kb = krein.kernel();
    let n = kb.rank();
    let dim = kb.dim;
    let mut integrals = FactorIntegrals::default();
    let mut pairs = DMatrix::zeros(family.len(), n);
    let mut mass = vec![0.0; n];
    let mut moments = DMatrix::zeros(dim, n);
    let one = HarmonicFunction::constant(dim);
    for j in 0..n {
        for (c, h) in kb.member_terms(j) {
            for (i, g) in family.functions.iter().enumerate() {
                pairs[(i, j)] += c * integrals.inner(h, g) / family.norms[i];
            }
            mass[j] += c * integrals.inner(h, &one);
            for axis in 0..dim {
                // x_i = (x_i - 1/2) + 1/2
                let aff = HarmonicFunction::affine(dim, axis);
                moments[(axis, j)] += c * (integrals.inner(h, &aff) + 0.5 * integrals.inner(h, &one));
            }
        }
    }
    (pairs, mass, moments)
}

/// Evolves the V block, keeps the kernel block frozen.
pub fn krein_evolve_split(
    split: &KreinSplit,
    krein: &KreinOperator,
    times: &[f64],
    family: &MomentFamily,
) -> Result<EvolutionTrace> {
    if split.kernel.len() != krein.kernel_dim() {
        return Err(Error::DimensionMismatch {
            left: split.kernel.len(),
            right: krein.kernel_dim(),
        });
    }
    let system = krein.v_discretization();
    let mut trace = evolve(&split.v_part, &system, times, family)?;
    let (pairs, mass, moments) = kernel_moment_data(krein, family);
    let kernel_mass: f64 = mass.iter().zip(split.kernel.iter()).map(|(m, b)| m * b).sum();
    let kernel_moments = &moments * &split.kernel;
    let kernel_norm_sq = split.kernel.norm_squared();
    for i in 0..trace.len() {
        let u = krein.basis.combination(&trace.states[i]);
        let v = family.signed_pairings(&u);
        let p = DVector::from_iterator(v.len(), v.iter().map(|z| z.re)) + &pairs * &split.kernel;
        trace.moment_matrix[i] = p.iter().map(|x| x.abs()).collect();
        trace.mass[i] += kernel_mass;
        for (m, k) in trace.first_moments[i].iter_mut().zip(kernel_moments.iter()) {
            *m += k;
        }
        trace.l2_norms[i] = (trace.l2_norms[i].powi(2) + kernel_norm_sq).sqrt();
        trace.kernel.push(split.kernel.clone());
    }
    Ok(trace)
}

pub fn krein_evolve(u0: &Field, krein: &KreinOperator, times: &[f64], family: &MomentFamily) -> Result<EvolutionTrace> {
    let split = krein_split(u0, krein)?;
    krein_evolve_split(&split, krein, times, family)
}
