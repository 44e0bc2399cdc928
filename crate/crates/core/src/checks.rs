//! Named invariant suites. Each assertion carries the measured value and the
//! bound it is held to, so drivers can print pass/fail lines verbatim.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolution::{
    evolve, first_moments, krein_evolve, project_initial, propagate, MomentFamily, Projection,
};
use crate::fourier::{moment0, project_by_quadrature, FourierField};
use crate::galerkin::{discretize, from_real, krein_extension, real_modes, Discretization, Space};
use crate::harmonic::{
    build_cube_harmonics, build_torus_harmonics, orthonormalize, project_out, weak_periodicity_residual,
    Field, FactorIntegrals, HarmonicBasis, HarmonicFunction, DROP_TOLERANCE,
};
use crate::hminus::{gauss_green_check, mean_of_l, op_l, recover_u};
use crate::oracles::{fd_krein_1d, fd_periodic_1d, secular_roots_1d, RootBranch};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    GaussGreen,
    Moments,
    Periodicity,
    Spectrum,
    KreinBc,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::GaussGreen,
        Suite::Moments,
        Suite::Periodicity,
        Suite::Spectrum,
        Suite::KreinBc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GaussGreen => "gaussgreen",
            Suite::Moments => "moments",
            Suite::Periodicity => "periodicity",
            Suite::Spectrum => "spectrum",
            Suite::KreinBc => "kreinbc",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Assertion {
    /// Passes when `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    /// Passes when `value == expected`.
    pub fn count(name: impl Into<String>, value: usize, expected: usize) -> Self {
        Self {
            name: name.into(),
            value: value as f64,
            bound: expected as f64,
            passed: value == expected,
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: value {:.6e}, bound {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.bound
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub dim: usize,
    pub cutoff: usize,
    pub seed: u64,
}

impl CheckConfig {
    pub fn new(dim: usize, cutoff: usize) -> Self {
        Self { dim, cutoff, seed: 0x5eed }
    }
}

pub fn run_suite(suite: Suite, config: &CheckConfig) -> Result<Vec<Assertion>> {
    if config.dim == 0 || config.cutoff == 0 {
        return Err(Error::InvalidArgument("dim and cutoff must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match suite {
        Suite::GaussGreen => gauss_green_suite(config, &mut rng),
        Suite::Moments => moments_suite(config, &mut rng),
        Suite::Periodicity => periodicity_suite(config, &mut rng),
        Suite::Spectrum => spectrum_suite(config, &mut rng),
        Suite::KreinBc => krein_suite(config, &mut rng),
    }
}

/// Real trig polynomial with coefficients uniform in `[-1, 1]` damped by
/// `1 / (1 + |k|^2)`.
pub fn random_trig(rng: &mut impl Rng, dim: usize, cutoff: usize) -> FourierField {
    let modes = real_modes(dim, cutoff);
    let a = DVector::from_iterator(
        modes.len(),
        modes.iter().map(|m| {
            let k2: i64 = m.k.iter().map(|k| k * k).sum();
            rng.random_range(-1.0..1.0) / (1.0 + k2 as f64)
        }),
    );
    from_real(&a, &modes, dim, cutoff)
}

/// Fourier data of a random product of per-axis quadratics.
fn random_polynomial(rng: &mut impl Rng, dim: usize, cutoff: usize) -> FourierField {
    let coeffs: Vec<[f64; 3]> = (0..dim)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect();
    project_by_quadrature(dim, cutoff, cutoff + 2, |x| {
        let v: f64 = coeffs
            .iter()
            .zip(x)
            .map(|(c, &xi)| c[0] + c[1] * xi + c[2] * xi * xi)
            .product();
        Complex64::new(v, 0.0)
    })
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// `prod_i cos(2 pi k_i x_i)` for a few multi-indices within the cutoff.
fn neumann_products(dim: usize, cutoff: usize) -> Vec<FourierField> {
    let c = cutoff as i64;
    let mut single = vec![0; dim];
    single[0] = c.min(2);
    let ks = [vec![1; dim], (0..dim as i64).map(|i| i % c + 1).collect(), single];
    ks.iter()
        .map(|k| {
            let nonzero: Vec<usize> = (0..dim).filter(|&i| k[i] != 0).collect();
            let weight = 0.5f64.powi(nonzero.len() as i32);
            let mut f = FourierField::zeros(dim, cutoff);
            for signs in 0..(1u32 << nonzero.len()) {
                let mut kk = k.clone();
                for (b, &i) in nonzero.iter().enumerate() {
                    if signs & (1 << b) != 0 {
                        kk[i] = -kk[i];
                    }
                }
                f.set(&kk, f.get(&kk) + weight);
            }
            f
        })
        .collect()
}

fn gauss_green_suite(config: &CheckConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>> {
    let (dim, cutoff) = (config.dim, config.cutoff);
    let mut out = Vec::new();

    let k1 = cutoff.max(2);
    let one = FourierField::constant(1, k1, 1.0);
    let cos = FourierField::cos_mode(1, k1, &[1], 1.0);
    let h_cases = [(&one, &cos, (0.0, 0.0)), (&cos, &one, (1.0, 1.0)), (&cos, &cos, (-0.5, -0.5))];
    let mut worst: f64 = 0.0;
    for (f, h, (l, r)) in h_cases {
        let g = gauss_green_check(f, h)?;
        worst = worst.max((g.lhs - l).norm()).max((g.rhs - r).norm());
    }
    out.push(Assertion::at_most("worked examples (lhs, rhs)", worst, 1e-10));

    let pairs = 50;
    let mut worst_gap: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for p in 0..pairs {
        let f = random_trig(rng, dim, cutoff);
        let h = if p % 2 == 0 {
            random_trig(rng, dim, cutoff)
        } else {
            random_polynomial(rng, dim, cutoff)
        };
        let g = gauss_green_check(&f, &h)?;
        let scale = (1.0 + f.h1_norm()) * (1.0 + h.l2_norm());
        worst_gap = worst_gap.max(g.gap / scale);
        worst_mean = worst_mean.max(mean_of_l(&f)?.norm());
    }
    out.push(Assertion::at_most(
        format!("gap / ((1+|f|_H1)(1+|h|_L2)) over {pairs} random pairs"),
        worst_gap,
        1e-8,
    ));
    out.push(Assertion::at_most("|mu0(L f)| on random f", worst_mean, 1e-12));

    let mut lap_err: f64 = 0.0;
    let mut recover_err: f64 = 0.0;
    for f in neumann_products(dim, cutoff) {
        let shifted = f.add(&FourierField::constant(dim, cutoff, 1.0))?;
        let lf = op_l(&shifted)?;
        let lap = shifted.laplacian();
        lap_err = lap_err.max(lf.rep.sub(&lap)?.l2_norm() / lap.l2_norm());
        let u = recover_u(&lf);
        recover_err = recover_err.max(u.sub(&f)?.l2_norm());
    }
    out.push(Assertion::at_most(
        "L f equals Delta f on Neumann cosine products (relative)",
        lap_err,
        1e-10,
    ));
    out.push(Assertion::at_most("u_{Lf} = f - mu0(f) on Neumann cosine products", recover_err, 1e-10));
    Ok(out)
}

fn random_initial(rng: &mut ChaCha8Rng, system: &Discretization) -> Result<DVector<f64>> {
    let u0 = random_trig(rng, system.basis.dim, system.basis.cutoff);
    Ok(project_initial(&u0, &system.basis, Projection::H)?.coefficients)
}

fn family_of(system: &Discretization) -> MomentFamily {
    MomentFamily::new(&system.basis.harmonic, system.basis.cutoff)
}

fn moments_suite(config: &CheckConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>> {
    let (dim, cutoff) = (config.dim, config.cutoff);
    let mut out = Vec::new();
    let times = [0.0, 1e-3, 1e-2, 0.1];
    for space in [Space::V, Space::Vtilde] {
        let system = discretize(space, dim, cutoff)?;
        let family = family_of(&system);
        let label = match space {
            Space::V => "V",
            Space::Vtilde => "V~",
        };

        let fields: Vec<FourierField> = (0..system.basis.len()).map(|j| system.basis.field(j)).collect();
        let pair = max_of(fields.iter().flat_map(|v| family.pairings(v)));
        out.push(Assertion::at_most(format!("{label} basis orthogonal to its harmonic family"), pair, 1e-10));
        let mean = max_of(fields.iter().map(|v| moment0(v).norm()));
        out.push(Assertion::at_most(format!("{label} basis mean"), mean, 1e-12));

        if space == Space::V {
            let worst = max_of((0..system.eig.len()).map(|j| {
                let phi = system.basis.combination(&system.eig.vector(j));
                let phi = phi.scale_real(1.0 / phi.l2_norm());
                let m = first_moments(&phi);
                max_of(m.into_iter().map(f64::abs)).max(moment0(&phi).norm())
            }));
            out.push(Assertion::at_most("V eigenfunction mass and first moments", worst, 1e-10));
        }

        let mut pair_ratio: f64 = 0.0;
        let mut moment_abs: f64 = 0.0;
        for _ in 0..20 {
            let c0 = random_initial(rng, &system)?;
            let trace = evolve(&c0, &system, &times, &family)?;
            for i in 0..trace.len() {
                pair_ratio = pair_ratio.max(trace.max_pairing(i) / trace.l2_norms[i]);
                if space == Space::V {
                    moment_abs = moment_abs.max(trace.mass[i].abs());
                    moment_abs = moment_abs.max(max_of(trace.first_moments[i].iter().map(|m| m.abs())));
                }
            }
        }
        out.push(Assertion::at_most(
            format!("{label} evolution: max harmonic pairing / |u|_L2 over 20 orbits"),
            pair_ratio,
            1e-9,
        ));
        if space == Space::V {
            out.push(Assertion::at_most("V evolution: |mass| and |int x_i u|", moment_abs, 1e-9));
        }
    }
    Ok(out)
}

fn periodicity_suite(config: &CheckConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>> {
    let (dim, cutoff) = (config.dim, config.cutoff);
    let mut out = Vec::new();
    let cube = orthonormalize(&build_cube_harmonics(dim, cutoff), DROP_TOLERANCE)?;
    let torus = orthonormalize(&build_torus_harmonics(dim, cutoff), DROP_TOLERANCE)?;

    let points: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let pointwise = |b: &HarmonicBasis| {
        max_of(b.functions.iter().flat_map(|h| {
            points.iter().map(move |x| {
                let (lap, scale) = h.laplacian(x);
                lap.abs() / scale.max(f64::MIN_POSITIVE)
            })
        }))
    };
    out.push(Assertion::at_most("cube members harmonic (|Delta h| / scale)", pointwise(&cube), 1e-9));
    out.push(Assertion::at_most("torus members harmonic (|Delta h| / scale)", pointwise(&torus), 1e-9));

    let panels = cutoff + 2;
    let weak = max_of(torus.functions.iter().flat_map(|h| weak_periodicity_residual(h, cutoff, panels)));
    out.push(Assertion::at_most("torus members weakly periodic", weak, 1e-10));

    let inclusion = max_of(torus.functions.iter().map(|h| cube.reconstruction_residual(h)));
    out.push(Assertion::at_most("span(torus) inside span(cube)", inclusion, 1e-10));

    for (label, b) in [("cube", &cube), ("torus", &torus)] {
        let g = b.orthonormal_gram();
        let n = g.nrows();
        let err = (g - DMatrix::identity(n, n)).abs().max();
        out.push(Assertion::at_most(format!("{label} orthonormal Gram equals identity"), err, 1e-10));

        let f = Field::from_trig(random_trig(rng, dim, cutoff));
        let once = project_out(&f, b);
        let twice = project_out(&once, b);
        let mut integrals = FactorIntegrals::default();
        let diff = twice.add(&scaled_field(&once, -1.0))?;
        let err = diff.inner(&diff, &mut integrals)?.re.max(0.0).sqrt();
        out.push(Assertion::at_most(format!("{label} projectOut idempotent"), err, 1e-12));
    }

    if dim == 1 {
        let f = Field::from_trig(random_trig(rng, 1, cutoff));
        let p = project_out(&f, &cube);
        let mut integrals = FactorIntegrals::default();
        let m0 = p.pair(&HarmonicFunction::constant(1), &mut integrals).norm();
        let m1 = p.pair(&HarmonicFunction::affine(1, 0), &mut integrals).norm();
        out.push(Assertion::at_most("1D cube projectOut kills int f and int x f", m0.max(m1), 1e-10));
    }

    let system = discretize(Space::Vtilde, dim, cutoff)?;
    let c0 = random_initial(rng, &system)?;
    let family = family_of(&system);
    let trace = evolve(&c0, &system, &[0.0, 0.01, 0.1], &family)?;
    let weak = max_of(trace.states.iter().flat_map(|c| {
        let u = system.basis.combination(c);
        weak_periodicity_residual(&u, cutoff, panels)
    }));
    out.push(Assertion::at_most("V~ evolved states weakly periodic", weak, 1e-10));
    Ok(out)
}

fn scaled_field(f: &Field, s: f64) -> Field {
    let mut out = Field::from_trig(f.trig.scale_real(s));
    out.harmonic = f.harmonic.iter().map(|(c, h)| (c * s, h.clone())).collect();
    out
}

fn spectrum_suite(config: &CheckConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>> {
    let (dim, cutoff) = (config.dim, config.cutoff);
    let mut out = Vec::new();
    let v = discretize(Space::V, dim, cutoff)?;
    let vt = discretize(Space::Vtilde, dim, cutoff)?;

    for (label, sys) in [("V", &v), ("V~", &vt)] {
        let p = &sys.pencil;
        let n = p.s.nrows();
        let sym = (&p.s - p.s.transpose()).abs().max().max((&p.m - p.m.transpose()).abs().max());
        out.push(Assertion::at_most(format!("{label} pencil symmetric"), sym, 1e-12));
        let s_id = (&p.s - DMatrix::identity(n, n)).abs().max();
        out.push(Assertion::at_most(format!("{label} form matrix is the identity"), s_id, 1e-12));
        let s_norm = p.s.norm();
        let res = max_of(sys.eig.residuals.iter().copied()) / s_norm;
        out.push(Assertion::at_most(format!("{label} eigen residual / |S|"), res, 1e-9));
        let min = sys.eig.values.first().copied().unwrap_or(0.0);
        out.push(Assertion {
            name: format!("{label} eigenvalues positive"),
            value: min,
            bound: 0.0,
            passed: min > 0.0,
        });
        let x = &sys.eig.vectors;
        let gram = x.transpose() * &p.m * x;
        let orth = (gram - DMatrix::identity(n, n)).abs().max();
        out.push(Assertion::at_most(format!("{label} eigenvectors M-orthonormal"), orth, 1e-9));
    }

    // V inside V-tilde, and the min-max consequence.
    let bt = &vt.basis.vectors;
    let b = &v.basis.vectors;
    let incl = (b - bt * (bt.transpose() * b)).abs().max();
    out.push(Assertion::at_most("span(V basis) inside span(V~ basis)", incl, 1e-9));
    let order = max_of(
        v.eig
            .values
            .iter()
            .zip(&vt.eig.values)
            .map(|(a, t)| (t - a) / a.max(1.0)),
    );
    out.push(Assertion::at_most("lambda_n(V~) <= lambda_n(V) (relative excess)", order, 1e-9));

    if dim == 1 {
        let mut err: f64 = 0.0;
        let clusters = vt.eig.clusters();
        let mult_ok = clusters.len() == cutoff && clusters.iter().all(|c| c.multiplicity == 2);
        for (k, c) in clusters.iter().enumerate() {
            let want = FOUR_PI_SQ * ((k + 1) * (k + 1)) as f64;
            err = err.max((c.value - want).abs() / want);
        }
        out.push(Assertion::count("V~ (1D) levels with multiplicity 2", if mult_ok { cutoff } else { 0 }, cutoff));
        out.push(Assertion::at_most("V~ (1D) levels equal 4 pi^2 k^2 (relative)", err, 1e-10));

        let levels = 5.min(cutoff);
        let fd = fd_periodic_1d(1000)?;
        let fd_err = max_of((0..levels).map(|k| {
            let g = clusters[k].value;
            (fd[2 * k] - g).abs().max((fd[2 * k + 1] - g).abs()) / g
        }));
        out.push(Assertion::at_most(
            format!("periodic FD (M=1000) vs V~ first {levels} levels"),
            fd_err,
            1e-3,
        ));

        let n_max = 3.min(cutoff);
        let cos_err = max_of((1..=n_max).map(|n| {
            let want = FOUR_PI_SQ * (n * n) as f64;
            v.eig
                .values
                .iter()
                .map(|l| (l - want).abs() / want)
                .fold(f64::INFINITY, f64::min)
        }));
        out.push(Assertion::at_most(format!("V (1D) contains 4 pi^2 n^2, n <= {n_max}"), cos_err, 1e-8));
    }

    // Semigroup laws on a random orbit.
    let family = family_of(&v);
    let c0 = random_initial(rng, &v)?;
    let (s, t) = (0.013, 0.029);
    let direct = propagate(&c0, &v, s + t)?;
    let composed = propagate(&propagate(&c0, &v, s)?, &v, t)?;
    let comp = (&direct - &composed).norm() / c0.norm();
    out.push(Assertion::at_most("semigroup composition", comp, 1e-10));

    let times: Vec<f64> = (0..=20).map(|i| 0.005 * i as f64).collect();
    let trace = evolve(&c0, &v, &times, &family)?;
    let rise = max_of(trace.h_norms.windows(2).map(|w| w[1] - w[0]));
    out.push(Assertion::at_most("H norm nonincreasing (largest rise)", rise, 0.0));
    let lmin = v.eig.values[0];
    let contraction = max_of(trace.h_norms.windows(2).zip(times.windows(2)).map(|(h, t)| {
        h[1] - (-lmin * (t[1] - t[0])).exp() * h[0]
    }));
    out.push(Assertion::at_most(
        "|u(t)|_H <= exp(-lambda_min (t - s)) |u(s)|_H (largest excess)",
        contraction / trace.h_norms[0],
        1e-10,
    ));

    let clusters = v.eig.clusters();
    if clusters.len() >= 2 {
        let gap = clusters[1].value - clusters[0].value;
        let t1 = 25.0 / gap;
        let t2 = t1 + 0.1;
        let tr = evolve(&c0, &v, &[t1, t2], &family)?;
        let rate = (tr.h_norms[0] / tr.h_norms[1]).ln() / (t2 - t1);
        out.push(Assertion::at_most(
            "asymptotic decay rate minus lambda_min",
            (rate - lmin).abs(),
            1e-6,
        ));
    }
    Ok(out)
}

fn krein_suite(config: &CheckConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assertion>> {
    let (dim, cutoff) = (config.dim, config.cutoff);
    let mut out = Vec::new();
    let krein = krein_extension(dim, cutoff)?;
    let spectrum = krein.spectrum();
    let zeros = spectrum.iter().filter(|l| l.abs() <= 1e-8).count();
    out.push(Assertion::count("A_K zero modes equal dim of kernel truncation", zeros, krein.kernel_dim()));
    out.push(Assertion::at_most(
        "kernel block orthogonal to V block",
        krein.block_pairings().abs().max(),
        1e-10,
    ));

    let family = MomentFamily::new(krein.kernel(), cutoff);
    let mut u0 = Field::from_trig(random_trig(rng, dim, cutoff));
    for h in krein.kernel().kept_functions().into_iter().take(2 * dim + 1) {
        u0.add_harmonic(Complex64::new(rng.random_range(-1.0..1.0), 0.0), h);
    }
    let times = [0.0, 1e-3, 1e-2, 0.1, 1.0];
    let trace = krein_evolve(&u0, &krein, &times, &family)?;
    let drift = max_of(trace.kernel.iter().map(|k| (k - &trace.kernel[0]).norm()));
    out.push(Assertion::at_most("Krein kernel component drift", drift, 1e-12));
    let rise = max_of(trace.l2_norms.windows(2).map(|w| w[1] - w[0]));
    out.push(Assertion::at_most("Krein L2 norm nonincreasing (largest rise)", rise, 0.0));

    if dim == 1 {
        let fd = fd_krein_1d(2000, 6)?;
        out.push(Assertion::at_most(
            "FD (M=2000) kernel Rayleigh quotients",
            max_of(fd.kernel.iter().map(|l| l.abs())),
            1e-6,
        ));
        let roots = secular_roots_1d(6)?;
        let agree = max_of(
            roots
                .iter()
                .zip(&fd.eigenvalues)
                .take(5)
                .map(|(r, l)| (r.lambda - l).abs() / r.lambda),
        );
        out.push(Assertion::at_most("secular roots vs FD (M=2000), first 5", agree, 5e-3));
        out.push(Assertion::at_most(
            "FD (M=2000) first eigenvalue vs 4 pi^2",
            (fd.eigenvalues[0] - FOUR_PI_SQ).abs() / FOUR_PI_SQ,
            1e-3,
        ));

        let grids = [250, 500, 1000, 2000];
        let errors: Vec<f64> = grids
            .iter()
            .map(|&m| fd_krein_1d(m, 1).map(|s| (s.eigenvalues[0] - roots[0].lambda).abs()))
            .collect::<Result<_>>()?;
        let slope = fit_slope(&grids, &errors);
        out.push(Assertion::at_most("FD convergence order minus 2", (slope - 2.0).abs(), 0.2));

        let n_max = 3.min(cutoff);
        let cos_err = max_of((1..=n_max).map(|n| {
            let want = FOUR_PI_SQ * (n * n) as f64;
            spectrum
                .iter()
                .map(|l| (l - want).abs() / want)
                .fold(f64::INFINITY, f64::min)
        }));
        out.push(Assertion::at_most(format!("A_K contains 4 pi^2 n^2, n <= {n_max}"), cos_err, 1e-8));

        // Ritz values bound the secular (non-cosine) roots from above.
        let secular: Vec<f64> = secular_roots_1d(2 * cutoff + 4)?
            .into_iter()
            .filter(|r| r.branch == RootBranch::Secular)
            .map(|r| r.lambda)
            .collect();
        let galerkin: Vec<f64> = krein
            .v_part
            .values
            .iter()
            .copied()
            .filter(|&l| {
                let n = (l.sqrt() / (2.0 * PI)).round();
                n < 1.0 || (l - FOUR_PI_SQ * n * n).abs() > 1e-6 * l
            })
            .collect();
        let below = max_of(
            galerkin
                .iter()
                .zip(&secular)
                .map(|(g, s)| (s - g) / s),
        );
        out.push(Assertion::at_most("Galerkin non-cosine eigenvalues >= secular roots", below, 1e-8));
    }
    Ok(out)
}

/// Least-squares slope of `log e` against `log M`, sign flipped.
fn fit_slope(grids: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = grids.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let grids = [10, 20, 40];
        let errors: Vec<f64> = grids.iter().map(|&m| 3.0 / (m as f64).powi(2)).collect();
        assert!((fit_slope(&grids, &errors) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_suites_pass() {
        let config = CheckConfig::new(1, 6);
        for suite in Suite::ALL {
            for a in run_suite(suite, &config).unwrap() {
                assert!(a.passed, "{suite}: {a}");
            }
        }
    }
}
