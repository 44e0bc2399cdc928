//! The lifting `Id_m^-1` of Laplacians into the annihilator of the torus
//! harmonics, the operator `L = Id_m^-1 Delta`, and the H^-1 Gauss-Green check.
//!
//! Test functions vanishing on the boundary are discretized by the trig
//! polynomials of degree `<= K` whose traces on every face vanish. For a trig
//! polynomial `z` the face trace on `x_j = 0` (equal to the one on `x_j = 1`) has
//! coefficients `sum_{k_j} z(k)`, so this space is cut out by linear conditions
//! on the coefficients.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{hminus_inner_pn, l2_inner, moment0, multi_indices, poisson_solve_torus, FourierField};
use crate::harmonic::{build_torus_harmonics, harmonic_lift, HarmonicBasis};

/// A periodic distribution together with its membership diagnostics for H.
#[derive(Debug, Clone)]
pub struct DualFunctional {
    pub rep: FourierField,
    /// `max_h |<w, h>| / ||h||` over the truncated torus harmonics.
    pub harmonic_residual: f64,
    /// Mismatch of the pairings with zero-trace test functions.
    pub test_residual: f64,
    pub in_h: bool,
}

/// Orthonormal basis (columns) of the span of the trace functionals.
fn trace_row_space(dim: usize, cutoff: usize) -> DMatrix<f64> {
    let probe = FourierField::zeros(dim, cutoff);
    let modes = probe.coeffs().len();
    let faces: Vec<Vec<i64>> = multi_indices(dim - 1, cutoff).collect();
    let mut t = DMatrix::zeros(modes, dim * faces.len());
    for axis in 0..dim {
        for (f, kp) in faces.iter().enumerate() {
            let mut k = kp.clone();
            k.insert(axis, 0);
            for kj in -(cutoff as i64)..=cutoff as i64 {
                k[axis] = kj;
                let i = probe.index_of(&k).expect("inside cutoff");
                t[(i, axis * faces.len() + f)] = 1.0;
            }
        }
    }
    orthonormal_range(&t, 1e-10)
}

/// Orthonormal basis of the column space, rank decided relative to the
/// largest singular value.
pub(crate) fn orthonormal_range(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sv = &svd.singular_values;
    let max = sv.max();
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > rel_tol * max).collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Rows `conj(h^(k))` of the exact harmonic pairings on `[-K, K]^N`.
fn harmonic_rows(basis: &HarmonicBasis, cutoff: usize) -> (DMatrix<Complex64>, Vec<f64>) {
    let probe = FourierField::zeros(basis.dim, cutoff);
    let modes = probe.coeffs().len();
    let mut rows = DMatrix::zeros(basis.len(), modes);
    let mut norms = Vec::with_capacity(basis.len());
    for (r, h) in basis.functions.iter().enumerate() {
        let fh = h.to_fourier(cutoff);
        for (i, c) in fh.coeffs().iter().enumerate() {
            rows[(r, i)] = c.conj();
        }
        norms.push(basis.gram[(r, r)].sqrt());
    }
    (rows, norms)
}

/// `Id_m^-1 (Delta f)`: the trig polynomial `w` of the same cutoff whose
/// pairings with zero-trace test functions equal those of `delta_f` and which
/// annihilates every truncated torus harmonic.
pub fn idm_inverse(delta_f: &FourierField) -> Result<DualFunctional> {
    let dim = delta_f.dim();
    let cutoff = delta_f.cutoff();
    let w_basis = to_complex(&trace_row_space(dim, cutoff));
    let d = DVector::from_column_slice(delta_f.coeffs());

    // Component of delta_f seen by the zero-trace test space.
    let z_part = &d - &w_basis * (w_basis.adjoint() * &d);

    let torus = build_torus_harmonics(dim, cutoff);
    let (h_rows, h_norms) = harmonic_rows(&torus, cutoff);
    let a = &h_rows * &w_basis;
    let rhs = -(&h_rows * &z_part);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-10 * max).count();
    let expected = a.nrows().min(a.ncols());
    if rank < expected {
        return Err(Error::RankDeficient { rank, expected });
    }
    let alpha = svd
        .solve(&rhs, 1e-10 * max)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let w = &z_part + &w_basis * alpha;

    let mut rep = FourierField::zeros(dim, cutoff);
    rep.coeffs_mut().copy_from_slice(w.as_slice());

    let pairings = &h_rows * &w;
    let harmonic_residual = pairings
        .iter()
        .zip(&h_norms)
        .map(|(p, n)| p.norm() / n)
        .fold(0.0, f64::max);
    let diff = &w - &d;
    let test_residual = (&diff - &w_basis * (w_basis.adjoint() * &diff)).norm();
    let scale = rep.l2_norm().max(1.0);
    Ok(DualFunctional {
        rep,
        harmonic_residual,
        test_residual,
        in_h: harmonic_residual <= 1e-10 * scale,
    })
}

/// `L f = Id_m^-1 (Delta f)` for a trig polynomial `f`.
pub fn op_l(f: &FourierField) -> Result<DualFunctional> {
    idm_inverse(&f.laplacian())
}

/// `u_{Lf}`, the torus Poisson solve of the representative.
pub fn recover_u(lf: &DualFunctional) -> FourierField {
    poisson_solve_torus(&lf.rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussGreen {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// Both sides of `(Id_m^-1 Delta f | h)_{H^-1} = -(f | h) + (R gamma_0 f | h)`
/// using the primitive form of the H^-1 product. `h` is truncated or padded to
/// the cutoff of `f`.
pub fn gauss_green_check(f: &FourierField, h: &FourierField) -> Result<GaussGreen> {
    if f.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: h.dim(),
        });
    }
    let h = h.resized(f.cutoff());
    let lf = op_l(f)?;
    let lift = harmonic_lift(f)?;
    let lhs = hminus_inner_pn(&lf.rep, &h)?;
    let rhs = -l2_inner(f, &h)? + l2_inner(&lift.to_fourier(f.cutoff()), &h)?;
    Ok(GaussGreen {
        lhs,
        rhs,
        gap: (lhs - rhs).norm(),
    })
}

/// `mu_0(L f)`, zero for every input.
pub fn mean_of_l(f: &FourierField) -> Result<Complex64> {
    Ok(moment0(&op_l(f)?.rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::hminus_inner_grad;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_lifts_are_the_laplacian() {
        for f in [
            FourierField::cos_mode(1, 5, &[1], 1.0),
            FourierField::sin_mode(1, 5, &[1], 1.0),
        ] {
            let lf = op_l(&f).unwrap();
            let diff = lf.rep.sub(&f.laplacian()).unwrap();
            assert!(diff.max_abs() < 1e-12, "{diff:?}");
            assert!(lf.in_h);
            assert!(lf.test_residual < 1e-12);
        }
        let lf = op_l(&FourierField::constant(1, 4, 1.0)).unwrap();
        assert!(lf.rep.max_abs() < 1e-14);
    }

    #[test]
    fn recover_u_in_one_dimension() {
        let f = FourierField::constant(1, 3, 1.0)
            .add(&FourierField::cos_mode(1, 3, &[1], 1.0))
            .unwrap();
        let u = recover_u(&op_l(&f).unwrap());
        let want = FourierField::cos_mode(1, 3, &[1], 1.0);
        assert!(u.sub(&want).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn two_dimensional_lift_differs_from_laplacian() {
        // The torus harmonic cos(2 pi x1) cosh(2 pi (x2 - 1/2)) pairs with
        // Delta f to -2 pi tanh(pi) (after the 1/cosh(pi) scaling), so Delta f
        // itself is not in H and L f has to correct it.
        let f = FourierField::cos_mode(2, 4, &[1, 1], 1.0);
        let lf = op_l(&f).unwrap();
        assert!(lf.in_h, "harmonic residual {}", lf.harmonic_residual);
        assert!(lf.test_residual < 1e-9);
        assert_abs_diff_eq!(moment0(&lf.rep).norm(), 0.0, epsilon = 1e-12);
        let delta = f.laplacian();
        let h = crate::harmonic::HarmonicFunction::new(vec![
            crate::harmonic::Factor::Cos(2),
            crate::harmonic::Factor::Cosh(4),
        ]);
        let pairing: Complex64 = delta
            .iter()
            .map(|(k, c)| c * h.fourier_coefficient(&k).conj())
            .sum();
        assert_abs_diff_eq!(pairing.re, -2.0 * PI * PI.tanh(), epsilon = 1e-12);
        assert!(lf.rep.sub(&delta).unwrap().l2_norm() > 1.0);
    }

    #[test]
    fn gauss_green_worked_examples() {
        let one = FourierField::constant(1, 6, 1.0);
        let cos = FourierField::cos_mode(1, 6, &[1], 1.0);

        let g = gauss_green_check(&one, &cos).unwrap();
        assert!(g.lhs.norm() < 1e-12 && g.rhs.norm() < 1e-12);

        let g = gauss_green_check(&cos, &one).unwrap();
        assert_abs_diff_eq!(g.lhs.re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g.rhs.re, 1.0, epsilon = 1e-10);

        let g = gauss_green_check(&cos, &cos).unwrap();
        assert_abs_diff_eq!(g.lhs.re, -0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(g.rhs.re, -0.5, epsilon = 1e-10);
    }

    #[test]
    fn gauss_green_in_two_dimensions() {
        let f = FourierField::cos_mode(2, 3, &[1, 2], 1.0)
            .add(&FourierField::sin_mode(2, 3, &[0, 1], 0.5))
            .unwrap()
            .add(&FourierField::constant(2, 3, 0.25))
            .unwrap();
        let h = FourierField::cos_mode(2, 3, &[1, 0], 1.0)
            .add(&FourierField::constant(2, 3, 2.0))
            .unwrap()
            .add(&FourierField::sin_mode(2, 3, &[1, 2], -0.7))
            .unwrap();
        let g = gauss_green_check(&f, &h).unwrap();
        assert!(g.gap < 1e-9 * (1.0 + f.h1_norm()) * (1.0 + h.l2_norm()), "{g:?}");
    }

    #[test]
    fn primitive_and_gradient_forms_differ_off_zero_mean() {
        // The identity must use the primitive form: with mu_0(h) != 0 the
        // gradient form loses the cross term.
        let cos = FourierField::cos_mode(1, 4, &[1], 1.0);
        let one = FourierField::constant(1, 4, 1.0);
        let w = op_l(&cos).unwrap().rep;
        assert_abs_diff_eq!(hminus_inner_grad(&w, &one).unwrap().norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hminus_inner_pn(&w, &one).unwrap().re, 1.0, epsilon = 1e-12);
    }
}
