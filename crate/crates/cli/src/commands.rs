use std::fmt::Write as _;
use std::io::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;

use momentheat::checks::{run_suite, CheckConfig};
use momentheat::evolution::{evolve, krein_evolve_split, project_initial, EvolutionTrace, KreinSplit, MomentFamily};
use momentheat::fourier::project_by_quadrature;
use momentheat::galerkin::{discretize, krein_extension, to_real, Cluster};
use momentheat::harmonic::FnEvaluator;
use momentheat::oracles::quadrature_inner;

use crate::config::{RunConfig, SpaceChoice};
use crate::error::CliError;
use crate::expr::{parse_ic, Expr};

/// Discarded components above this fraction of `||u0||` trigger a warning.
/// The Krein split measures the remainder as a square-root difference, so the
/// threshold sits well above sqrt(eps).
const DISCARD_WARNING: f64 = 1e-7;

pub fn float(v: f64) -> String {
    // Normalize -0 so that sign noise never changes the bytes.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// Eigenvalue clusters of the configured operator at `cutoff`.
pub fn spectrum_clusters(cfg: &RunConfig, cutoff: usize) -> Result<Vec<Cluster>, CliError> {
    let mut clusters = match cfg.space {
        SpaceChoice::Krein => {
            let krein = krein_extension(cfg.dim, cutoff)?;
            let mut out = vec![Cluster {
                value: 0.0,
                multiplicity: krein.kernel_dim(),
                first: 0,
                max_residual: 0.0,
            }];
            out.extend(krein.v_part.clusters().into_iter().map(|c| Cluster {
                first: c.first + krein.kernel_dim(),
                ..c
            }));
            out.retain(|c| c.multiplicity > 0);
            out
        }
        choice => discretize(choice.space(), cfg.dim, cutoff)?.eig.clusters(),
    };
    if let Some(n) = cfg.count {
        clusters.truncate(n);
    }
    Ok(clusters)
}

fn cluster_rows(out: &mut String, clusters: &[Cluster], cutoff: Option<usize>) {
    for (i, c) in clusters.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{}",
            i + 1,
            float(c.value),
            c.multiplicity,
            float(c.max_residual)
        );
        if let Some(k) = cutoff {
            let _ = write!(out, ",{k}");
        }
        out.push('\n');
    }
}

pub fn eig_csv(cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = String::from("index,lambda,multiplicity,residual\n");
    cluster_rows(&mut out, &spectrum_clusters(cfg, cfg.cutoff)?, None);
    Ok(out)
}

pub fn sweep_csv(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.cutoffs.is_empty() {
        return Err(CliError::Config("sweep needs --cutoffs".into()));
    }
    let results: Vec<Result<Vec<Cluster>, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .cutoffs
            .iter()
            .map(|&k| s.spawn(move || spectrum_clusters(cfg, k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut out = String::from("index,lambda,multiplicity,residual,cutoff\n");
    for (&k, clusters) in cfg.cutoffs.iter().zip(results) {
        cluster_rows(&mut out, &clusters?, Some(k));
    }
    Ok(out)
}

/// Runs an evolution and returns the CSV together with any warnings.
pub fn evolve_csv(cfg: &RunConfig) -> Result<(String, Vec<String>), CliError> {
    let text = cfg
        .ic
        .as_deref()
        .ok_or_else(|| CliError::Config("evolve needs --ic".into()))?;
    let expr = parse_ic(text, cfg.dim)?;
    let (dim, cutoff) = (cfg.dim, cfg.cutoff);
    let u0 = project_by_quadrature(dim, cutoff, cutoff + 2, |x| Complex64::new(expr.eval(x), 0.0));
    let times = cfg.times();
    let mut warnings = Vec::new();
    let trace = match cfg.space {
        SpaceChoice::Krein => {
            let krein = krein_extension(dim, cutoff)?;
            let split = krein_split_by_quadrature(&expr, &u0, &krein, cfg)?;
            if split.discarded_norm > DISCARD_WARNING * u0.l2_norm().max(f64::MIN_POSITIVE) {
                warnings.push(format!(
                    "warning: initial condition has a component of L2 norm {:.6e} outside V_h (+) V_1; it is discarded",
                    split.discarded_norm
                ));
            }
            let family = MomentFamily::new(krein.kernel(), cutoff);
            krein_evolve_split(&split, &krein, &times, &family)?
        }
        choice => {
            let system = discretize(choice.space(), dim, cutoff)?;
            let p = project_initial(&u0, &system.basis, cfg.projection)?;
            if p.discarded_norm > DISCARD_WARNING * u0.l2_norm().max(f64::MIN_POSITIVE) {
                warnings.push(format!(
                    "warning: initial condition has a component of norm {:.6e} outside the subspace; it is discarded",
                    p.discarded_norm
                ));
            }
            let family = MomentFamily::new(&system.basis.harmonic, cutoff);
            evolve(&p.coefficients, &system, &times, &family)?
        }
    };
    Ok((trace_csv(&trace, dim), warnings))
}

fn krein_split_by_quadrature(
    expr: &Expr,
    u0: &momentheat::fourier::FourierField,
    krein: &momentheat::galerkin::KreinOperator,
    cfg: &RunConfig,
) -> Result<KreinSplit, CliError> {
    let kb = krein.kernel();
    let c = &kb
        .orthonormal
        .as_ref()
        .ok_or_else(|| CliError::Config("kernel family is not orthonormalized".into()))?
        .coefficients;
    let ic = FnEvaluator {
        dim: cfg.dim,
        f: |x: &[f64]| expr.eval(x),
    };
    let panels = cfg.cutoff + 2;
    let mut raw = DVector::zeros(kb.functions.len());
    for (i, h) in kb.functions.iter().enumerate() {
        if c.row(i).iter().any(|&v| v != 0.0) {
            raw[i] = quadrature_inner(&ic, h, panels)?.re;
        }
    }
    let kernel = c.transpose() * raw;
    let v_part = krein.basis.vectors.transpose() * to_real(u0, &krein.basis.modes);
    let total = quadrature_inner(&ic, &ic, panels)?.re;
    let kept = v_part.norm_squared() + kernel.norm_squared();
    Ok(KreinSplit {
        v_part,
        kernel,
        discarded_norm: (total - kept).max(0.0).sqrt(),
    })
}

pub fn trace_csv(trace: &EvolutionTrace, dim: usize) -> String {
    let mut out = String::from("t,l2_norm,h_norm,mass");
    for i in 1..=dim {
        let _ = write!(out, ",moment_x{i}");
    }
    out.push_str(",max_harmonic_pairing\n");
    for i in 0..trace.len() {
        let mut fields = vec![
            float(trace.times[i]),
            float(trace.l2_norms[i]),
            float(trace.h_norms[i]),
            float(trace.mass[i]),
        ];
        fields.extend(trace.first_moments[i].iter().map(|&m| float(m)));
        fields.push(float(trace.max_pairing(i)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Assertion lines and whether all of them passed.
pub fn check_report(cfg: &RunConfig) -> Result<(String, usize, usize), CliError> {
    let suite = cfg
        .suite
        .ok_or_else(|| CliError::Config("check needs --suite".into()))?;
    let assertions = run_suite(
        suite,
        &CheckConfig {
            dim: cfg.dim,
            cutoff: cfg.cutoff,
            seed: cfg.seed,
        },
    )?;
    let mut out = String::new();
    for a in &assertions {
        let _ = writeln!(out, "{a}");
    }
    let failed = assertions.iter().filter(|a| !a.passed).count();
    Ok((out, failed, assertions.len()))
}

/// Writes `text` to the configured output path, or to stdout.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use momentheat::checks::Suite;
    use std::f64::consts::PI;

    fn config(space: SpaceChoice, cutoff: usize) -> RunConfig {
        RunConfig {
            space,
            cutoff,
            ..RunConfig::default()
        }
    }

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(float(1.0), "1.0000000000000000e0");
        assert_eq!(float(-0.0), "0.0000000000000000e0");
        assert_eq!(float(4.0 * PI * PI).parse::<f64>().unwrap(), 4.0 * PI * PI);
    }

    #[test]
    fn first_vtilde_row_is_four_pi_squared_twice() {
        let csv = eig_csv(&config(SpaceChoice::Vtilde, 8)).unwrap();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let lambda: f64 = row[1].parse().unwrap();
        assert!((lambda / (4.0 * PI * PI) - 1.0).abs() < 1e-10);
        assert_eq!(row[2], "2");
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn krein_spectrum_starts_with_the_kernel() {
        let mut cfg = config(SpaceChoice::Krein, 8);
        cfg.count = Some(3);
        let clusters = spectrum_clusters(&cfg, 8).unwrap();
        assert_eq!(clusters.len(), 3);
        assert_eq!((clusters[0].value, clusters[0].multiplicity), (0.0, 2));
        assert!((clusters[1].value / (4.0 * PI * PI) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_initial_condition_vanishes_in_v() {
        let mut cfg = config(SpaceChoice::V, 6);
        cfg.ic = Some("1".into());
        cfg.samples = 3;
        let (csv, warnings) = evolve_csv(&cfg).unwrap();
        assert_eq!(warnings.len(), 1);
        for line in csv.lines().skip(1) {
            let values: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert!(values[1..].iter().all(|v| v.abs() < 1e-12), "{line}");
        }
    }

    #[test]
    fn krein_keeps_kernel_data() {
        let mut cfg = config(SpaceChoice::Krein, 6);
        cfg.ic = Some("x + cos(2*pi*x)".into());
        cfg.samples = 2;
        cfg.t_end = 1.0;
        let (csv, warnings) = evolve_csv(&cfg).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        // The cosine decays; x survives in the kernel.
        let norm_x = (1.0f64 / 3.0).sqrt();
        assert!((last[1] - norm_x).abs() < 1e-10, "{}", last[1]);
        assert!((last[3] - 0.5).abs() < 1e-10);
        assert!((last[4] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn sweep_appends_the_cutoff() {
        let mut cfg = config(SpaceChoice::Vtilde, 1);
        cfg.cutoffs = vec![2, 3];
        cfg.count = Some(1);
        let csv = sweep_csv(&cfg).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,lambda,multiplicity,residual,cutoff");
        assert!(lines[1].ends_with(",2") && lines[2].ends_with(",3"));
    }

    #[test]
    fn check_lines_one_per_assertion() {
        let mut cfg = config(SpaceChoice::V, 6);
        cfg.suite = Some(Suite::GaussGreen);
        let (text, failed, total) = check_report(&cfg).unwrap();
        assert_eq!(failed, 0);
        assert_eq!(text.lines().count(), total);
        assert!(text.lines().all(|l| l.starts_with("PASS ")));
    }
}
