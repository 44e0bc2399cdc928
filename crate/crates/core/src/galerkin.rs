//! Discrete V and V-tilde bases, the Galerkin pencil of the form in the H^-1
//! inner product, and its eigen-decomposition. The Krein-von Neumann
//! extension is the V block plus a zero block on the cube harmonics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fourier::{hminus_inner_grad, multi_indices, FourierField};
use crate::harmonic::{build_cube_harmonics, build_torus_harmonics, orthonormalize, HarmonicBasis, DROP_TOLERANCE};
use crate::hminus::orthonormal_range;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Relative singular-value cutoff deciding the rank of the harmonic
/// constraint rows.
pub const CONSTRAINT_RANK_TOLERANCE: f64 = 1e-12;

/// Relative gap below which eigenvalues are reported as one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// Orthogonal to the cube harmonics.
    V,
    /// Orthogonal to the torus harmonics.
    Vtilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Const,
    Cos,
    Sin,
}

/// One of the real modes `1`, `sqrt2 cos(2 pi k.x)`, `sqrt2 sin(2 pi k.x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealMode {
    pub k: Vec<i64>,
    pub kind: ModeKind,
}

impl RealMode {
    /// H^-1 weight of the mode: `1 / (4 pi^2 |k|^2)`, or 1 for the constant.
    pub fn hminus_weight(&self) -> f64 {
        match self.kind {
            ModeKind::Const => 1.0,
            _ => 1.0 / (FOUR_PI_SQ * self.k.iter().map(|&v| (v * v) as f64).sum::<f64>()),
        }
    }
}

fn is_representative(k: &[i64]) -> bool {
    k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

/// Real trig modes up to `cutoff`: the constant, then a cos/sin pair for each
/// half-space representative `k`.
pub fn real_modes(dim: usize, cutoff: usize) -> Vec<RealMode> {
    let mut out = vec![RealMode {
        k: vec![0; dim],
        kind: ModeKind::Const,
    }];
    for k in multi_indices(dim, cutoff).filter(|k| is_representative(k)) {
        out.push(RealMode {
            k: k.clone(),
            kind: ModeKind::Cos,
        });
        out.push(RealMode { k, kind: ModeKind::Sin });
    }
    out
}

/// Real mode coordinates of `f`; for a real `f` these are its coefficients in
/// the real modes, and for any `g` the dot product with them gives `int g conj(f)`
/// when `g` is real.
pub fn to_real(f: &FourierField, modes: &[RealMode]) -> DVector<f64> {
    DVector::from_iterator(
        modes.len(),
        modes.iter().map(|m| {
            let c = f.get(&m.k);
            match m.kind {
                ModeKind::Const => c.re,
                ModeKind::Cos => SQRT2 * c.re,
                ModeKind::Sin => -SQRT2 * c.im,
            }
        }),
    )
}

/// Inverse of [`to_real`].
pub fn from_real(a: &DVector<f64>, modes: &[RealMode], dim: usize, cutoff: usize) -> FourierField {
    let mut f = FourierField::zeros(dim, cutoff);
    for (m, &v) in modes.iter().zip(a.iter()) {
        match m.kind {
            ModeKind::Const => f.add_real_mode(&m.k, v, 0.0),
            ModeKind::Cos => f.add_real_mode(&m.k, SQRT2 * v, 0.0),
            ModeKind::Sin => f.add_real_mode(&m.k, 0.0, SQRT2 * v),
        }
    }
    f
}

/// L^2-orthonormal basis of the discrete V or V-tilde, as columns of real mode
/// coordinates.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub space: Space,
    pub dim: usize,
    pub cutoff: usize,
    pub modes: Vec<RealMode>,
    pub vectors: DMatrix<f64>,
    /// Orthonormalized harmonic family defining the constraints.
    pub harmonic: HarmonicBasis,
}

impl SubspaceBasis {
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    /// Basis vector `j` as a Fourier field.
    pub fn field(&self, j: usize) -> FourierField {
        let a = DVector::from_column_slice(self.vectors.column(j).as_slice());
        from_real(&a, &self.modes, self.dim, self.cutoff)
    }

    /// `sum_j c_j v_j` as a Fourier field.
    pub fn combination(&self, c: &DVector<f64>) -> FourierField {
        from_real(&(&self.vectors * c), &self.modes, self.dim, self.cutoff)
    }

    /// `int v_j conj(g)` for every basis vector, with `g` real and given by its
    /// Fourier coefficients (exact for any `g` once its coefficients on the
    /// cutoff are exact).
    pub fn pairings(&self, g: &FourierField) -> DVector<f64> {
        self.vectors.transpose() * to_real(&g.resized(self.cutoff), &self.modes)
    }

    /// Real coordinates of the H^-1 weights.
    pub fn hminus_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.modes.len(), self.modes.iter().map(RealMode::hminus_weight))
    }
}

/// Orthonormal complement of the column space of `u` (orthonormal columns) in
/// `R^n`. Coordinates that `u` does not touch give standard basis vectors, so
/// modes free of constraints come out unchanged; the rest is completed by a
/// Householder factorization restricted to the touched coordinates.
fn orthogonal_complement(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let r = u.ncols();
    let (free, touched): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| u.row(i).norm_squared() <= 1e-26);
    let t = touched.len();
    let mut out = DMatrix::zeros(n, n.saturating_sub(r));
    for (c, &i) in free.iter().enumerate() {
        out[(i, c)] = 1.0;
    }
    if t > r {
        let ut = DMatrix::from_fn(t, r, |a, b| u[(touched[a], b)]);
        let qr = ut.qr();
        let mut qt = DMatrix::identity(t, t);
        qr.q_tr_mul(&mut qt);
        // Rows r.. of Q^T span the complement inside the touched block.
        for (c, row) in (r..t).enumerate() {
            for (a, &i) in touched.iter().enumerate() {
                let v = qt[(row, a)];
                out[(i, free.len() + c)] = if v.abs() < 1e-15 { 0.0 } else { v };
            }
        }
    }
    let cols = free.len() + t.saturating_sub(r);
    out.columns(0, cols).into_owned()
}

/// Discrete V (cube harmonics removed) or V-tilde (torus harmonics removed) on
/// the real trig modes of degree `<= cutoff`, with both families of order
/// `cutoff`.
pub fn build_subspace_basis(space: Space, dim: usize, cutoff: usize) -> Result<SubspaceBasis> {
    if dim == 0 || cutoff == 0 {
        return Err(Error::InvalidArgument(format!(
            "need dim >= 1 and cutoff >= 1, got dim {dim}, cutoff {cutoff}"
        )));
    }
    let raw = match space {
        Space::V => build_cube_harmonics(dim, cutoff),
        Space::Vtilde => build_torus_harmonics(dim, cutoff),
    };
    let harmonic = orthonormalize(&raw, DROP_TOLERANCE)?;
    let modes = real_modes(dim, cutoff);

    // The span of the orthonormal members equals that of the kept raw members;
    // normalized raw rows avoid amplifying the orthonormalization roundoff.
    let kept = harmonic.kept_functions();
    let mut rows = DMatrix::zeros(modes.len(), kept.len());
    for (j, h) in kept.iter().enumerate() {
        let r = to_real(&h.to_fourier(cutoff), &modes);
        let n = r.norm();
        rows.set_column(j, &(r / n));
    }
    let u = orthonormal_range(&rows, CONSTRAINT_RANK_TOLERANCE);
    let vectors = orthogonal_complement(&u);
    if vectors.ncols() == 0 {
        return Err(Error::EmptyBasis(format!(
            "{} harmonic constraints leave nothing of the {} modes at cutoff {cutoff}",
            u.ncols(),
            modes.len()
        )));
    }
    Ok(SubspaceBasis {
        space,
        dim,
        cutoff,
        modes,
        vectors,
        harmonic,
    })
}

/// Form matrix `S` and H^-1 Gram `M` on a subspace basis.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub s: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

pub fn assemble_pencil(basis: &SubspaceBasis) -> Result<Pencil> {
    let b = &basis.vectors;
    let w = basis.hminus_weights();
    let mut wb = b.clone();
    for (mut row, &wi) in wb.row_iter_mut().zip(w.iter()) {
        row *= wi;
    }
    let s = b.transpose() * b;
    let m = b.transpose() * wb;
    let pencil = Pencil {
        s: symmetrize(s),
        m: symmetrize(m),
    };
    if pencil.m.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite("H^-1 Gram of the subspace basis".into()));
    }
    Ok(pencil)
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// Sorted eigenpairs of `S x = lambda M x` with `M`-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub space: Space,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub first: usize,
    pub max_residual: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, j: usize) -> DVector<f64> {
        DVector::from_column_slice(self.vectors.column(j).as_slice())
    }

    pub fn clusters(&self) -> Vec<Cluster> {
        cluster_values(&self.values, &self.residuals)
    }
}

/// Groups ascending values whose relative gap is within [`CLUSTER_TOLERANCE`].
pub fn cluster_values(values: &[f64], residuals: &[f64]) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let r = residuals.get(i).copied().unwrap_or(0.0);
        if let Some(last) = out.last_mut() {
            let anchor = values[last.first];
            let scale = anchor.abs().max(v.abs());
            if (v - anchor).abs() <= CLUSTER_TOLERANCE * scale || (scale == 0.0) {
                let m = last.multiplicity as f64;
                last.value = (last.value * m + v) / (m + 1.0);
                last.multiplicity += 1;
                last.max_residual = last.max_residual.max(r);
                continue;
            }
        }
        out.push(Cluster {
            value: v,
            multiplicity: 1,
            first: i,
            max_residual: r,
        });
    }
    out
}

/// Cholesky congruence: `L^-1 S L^-T y = lambda y`, `x = L^-T y`.
pub fn solve_eigen(pencil: &Pencil, space: Space) -> Result<EigenSystem> {
    let n = pencil.m.nrows();
    let chol = pencil
        .m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("pencil mass matrix".into()))?;
    let l = chol.l();
    let a = l
        .solve_lower_triangular(&pencil.s)
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&a.transpose())
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let c = symmetrize(c);
    let eig = SymmetricEigen::try_new(c, 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence(format!("symmetric eigen-solve of size {n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let vectors = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let sx = &pencil.s * &vectors;
    let mx = &pencil.m * &vectors;
    let residuals = (0..n)
        .map(|j| (sx.column(j) - mx.column(j) * values[j]).norm())
        .collect();
    Ok(EigenSystem {
        values,
        vectors,
        residuals,
        space,
    })
}

/// Discrete `A f`: the `g` with `M g = S f`.
pub fn apply_a(f: &DVector<f64>, pencil: &Pencil) -> Result<DVector<f64>> {
    let chol = pencil
        .m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("pencil mass matrix".into()))?;
    Ok(chol.solve(&(&pencil.s * f)))
}

/// `|| Delta phi + lambda phi ||` in the H^-1(T^N) norm for the eigenpair `j`,
/// with `phi` normalized in L^2.
pub fn strong_residual(basis: &SubspaceBasis, eig: &EigenSystem, j: usize) -> f64 {
    let phi = basis.combination(&eig.vector(j));
    let phi = phi.scale_real(1.0 / phi.l2_norm());
    let r = phi
        .laplacian()
        .add(&phi.scale_real(eig.values[j]))
        .expect("same dimension");
    hminus_inner_grad(&r, &r).expect("same dimension").re.max(0.0).sqrt()
}

/// `A_K = A_V (+) 0` on `V_h (+) V_1`.
#[derive(Debug, Clone)]
pub struct KreinOperator {
    pub basis: SubspaceBasis,
    pub pencil: Pencil,
    pub v_part: EigenSystem,
}

impl KreinOperator {
    /// Orthonormalized cube harmonics spanning the kernel.
    pub fn kernel(&self) -> &HarmonicBasis {
        &self.basis.harmonic
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel().rank()
    }

    /// Zero with the kernel multiplicity, then the V spectrum.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.kernel_dim()];
        out.extend_from_slice(&self.v_part.values);
        out
    }

    /// `(h_i | v_j) / ||h_i||` for the kept raw kernel members `h_i` (same
    /// span as the orthonormal ones, free of their coefficient growth) and V
    /// basis vectors `v_j`.
    pub fn block_pairings(&self) -> DMatrix<f64> {
        let k = self.kernel();
        let kept = k.kept_functions();
        let mut integrals = crate::harmonic::FactorIntegrals::default();
        let mut out = DMatrix::zeros(kept.len(), self.basis.len());
        for (i, h) in kept.iter().enumerate() {
            let norm = integrals.inner(h, h).sqrt();
            let p = self.basis.pairings(&h.to_fourier(self.basis.cutoff)) / norm;
            out.set_row(i, &p.transpose());
        }
        out
    }
}

pub fn krein_extension(dim: usize, cutoff: usize) -> Result<KreinOperator> {
    let basis = build_subspace_basis(Space::V, dim, cutoff)?;
    let pencil = assemble_pencil(&basis)?;
    let v_part = solve_eigen(&pencil, Space::V)?;
    Ok(KreinOperator {
        basis,
        pencil,
        v_part,
    })
}

/// A basis together with its pencil and eigen-decomposition.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub basis: SubspaceBasis,
    pub pencil: Pencil,
    pub eig: EigenSystem,
}

pub fn discretize(space: Space, dim: usize, cutoff: usize) -> Result<Discretization> {
    let basis = build_subspace_basis(space, dim, cutoff)?;
    let pencil = assemble_pencil(&basis)?;
    let eig = solve_eigen(&pencil, space)?;
    Ok(Discretization { basis, pencil, eig })
}

impl KreinOperator {
    /// The V block as a stand-alone discretization.
    pub fn v_discretization(&self) -> Discretization {
        Discretization {
            basis: self.basis.clone(),
            pencil: self.pencil.clone(),
            eig: self.v_part.clone(),
        }
    }
}
