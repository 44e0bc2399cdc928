//! Acceptance criteria, one PASS/FAIL line each. Exits 1 when any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use momentheat::checks::{run_suite, Assertion, CheckConfig, Suite};
use momentheat::galerkin::{discretize, krein_extension, strong_residual, EigenSystem, Space};
use momentheat::oracles::{fd_krein_1d, fd_periodic_1d, secular_roots_1d, RootBranch};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

type Outcome = Result<(bool, String), momentheat::Error>;
type Criterion = Box<dyn FnOnce() -> (bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn timed(limit: Option<f64>, f: impl FnOnce() -> Outcome) -> (bool, String) {
    let start = Instant::now();
    let (mut passed, mut detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    match limit {
        Some(l) => {
            detail.push_str(&format!("; runtime {secs:.2} s (limit {l} s)"));
            passed &= secs < l;
        }
        None => detail.push_str(&format!("; runtime {secs:.2} s")),
    }
    (passed, detail)
}

/// Suite assertions whose names start with one of `prefixes`, at each `(dim, cutoff)`.
fn selected(suite: Suite, runs: &[(usize, usize)], prefixes: &[&str]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for &(dim, cutoff) in runs {
        let assertions: Vec<Assertion> = run_suite(suite, &CheckConfig::new(dim, cutoff))?
            .into_iter()
            .filter(|a| prefixes.iter().any(|p| a.name.starts_with(p)))
            .collect();
        if assertions.len() < prefixes.len() {
            passed = false;
        }
        for a in assertions {
            passed &= a.passed;
            parts.push(format!(
                "[N={dim} K={cutoff}] {} {} {:.2e} <= {:.2e}",
                if a.passed { "ok" } else { "VIOLATED" },
                a.name,
                a.value,
                a.bound
            ));
        }
    }
    Ok((passed, parts.join("; ")))
}

fn criterion_1() -> Outcome {
    let k = 16;
    let sys = discretize(Space::Vtilde, 1, k)?;
    let clusters = sys.eig.clusters();
    let mut worst: f64 = 0.0;
    let mut multiplicity_ok = clusters.len() == k;
    for (i, c) in clusters.iter().enumerate() {
        let n = (i + 1) as f64;
        worst = worst.max(rel(c.value, FOUR_PI_SQ * n * n));
        multiplicity_ok &= c.multiplicity == 2;
    }
    let fd = fd_periodic_1d(1000)?;
    let mut fd_worst: f64 = 0.0;
    for (i, g) in sys.eig.values.iter().enumerate() {
        fd_worst = fd_worst.max(rel(fd[i], *g));
    }
    Ok((
        worst <= 1e-10 && multiplicity_ok && fd_worst <= 1e-3,
        format!(
            "K={k}: {} levels, multiplicity 2: {multiplicity_ok}, max rel err {worst:.2e} (<= 1e-10); fdPeriodic(1000) max rel dev {fd_worst:.2e} (<= 1e-3)",
            clusters.len()
        ),
    ))
}

fn criterion_2() -> Outcome {
    let krein = krein_extension(1, 32)?;
    let spectrum = krein.spectrum();
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let target = FOUR_PI_SQ * (n * n) as f64;
        let best = spectrum.iter().map(|&l| rel(l, target)).fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    Ok((worst <= 1e-8, format!("K=32: max rel err of 4 pi^2 n^2, n <= 3: {worst:.2e} (<= 1e-8)")))
}

fn is_cosine(lambda: f64) -> bool {
    let n = (lambda / FOUR_PI_SQ).sqrt().round();
    n >= 1.0 && rel(lambda, FOUR_PI_SQ * n * n) <= 1e-6
}

/// Indices of the first `count` eigenvalues off the cosine branch.
fn non_cosine(eig: &EigenSystem, count: usize) -> Vec<usize> {
    (0..eig.len()).filter(|&j| !is_cosine(eig.values[j])).take(count).collect()
}

fn criterion_3() -> Outcome {
    let secular: Vec<f64> = secular_roots_1d(6)?
        .into_iter()
        .filter(|r| r.branch == RootBranch::Secular)
        .map(|r| r.lambda)
        .take(3)
        .collect();
    let fd: Vec<f64> = fd_krein_1d(2000, 8)?
        .eigenvalues
        .into_iter()
        .filter(|&l| !is_cosine_fd(l))
        .take(3)
        .collect();
    let fine = krein_extension(1, 256)?;
    let coarse = krein_extension(1, 64)?;
    let idx = non_cosine(&fine.v_part, 3);
    let galerkin: Vec<f64> = idx.iter().map(|&j| fine.v_part.values[j]).collect();
    let vs_secular = galerkin.iter().zip(&secular).map(|(g, s)| rel(*g, *s)).fold(0.0, f64::max);
    let vs_fd = galerkin.iter().zip(&fd).map(|(g, s)| rel(*g, *s)).fold(0.0, f64::max);
    let r_fine = strong_residual(&fine.basis, &fine.v_part, idx[0]);
    let j = non_cosine(&coarse.v_part, 1)[0];
    let r_coarse = strong_residual(&coarse.basis, &coarse.v_part, j);
    let drop = r_coarse / r_fine;
    let counts_ok = galerkin.len() == 3 && secular.len() == 3 && fd.len() == 3;
    Ok((
        counts_ok && vs_secular <= 0.01 && vs_fd <= 0.01 && drop >= 2.0,
        format!(
            "K=256 non-cosine {galerkin:.4?}; secular {secular:.4?} (max rel {vs_secular:.2e} <= 1e-2); FD(2000) {fd:.4?} (max rel {vs_fd:.2e} <= 1e-2); strongResidual K=64 {r_coarse:.3e}, K=256 {r_fine:.3e}, drop x{drop:.3} (needs >= 2)"
        ),
    ))
}

/// FD cosine-branch values sit within O(h^2) of 4 pi^2 n^2.
fn is_cosine_fd(lambda: f64) -> bool {
    let n = (lambda / FOUR_PI_SQ).sqrt().round();
    n >= 1.0 && rel(lambda, FOUR_PI_SQ * n * n) <= 1e-4
}

fn criterion_8() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for dim in [1, 2] {
        for k in [4, 8, 16] {
            let v = discretize(Space::V, dim, k)?.eig.values;
            let vt = discretize(Space::Vtilde, dim, k)?.eig.values;
            let excess = vt
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b) / b.abs().max(1.0))
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(excess);
            parts.push(format!("N={dim} K={k}: {excess:.2e}"));
        }
    }
    Ok((
        worst <= 1e-9,
        format!("max (lambda_n(V~) - lambda_n(V)) / max(1, lambda_n): {} (<= 1e-9)", parts.join(", ")),
    ))
}

fn run_binary(args: &[&str]) -> std::io::Result<std::process::Output> {
    Command::new(env!("CARGO_BIN_EXE_momentheat")).args(args).output()
}

fn criterion_11() -> Outcome {
    let commands: [&[&str]; 5] = [
        &["eig", "--dim", "1", "--cutoff", "8", "--space", "vtilde"],
        &["eig", "--dim", "2", "--cutoff", "4", "--space", "krein", "--count", "6"],
        &["evolve", "--dim", "2", "--cutoff", "4", "--space", "v", "--ic", "sin(2*pi*x1)*cos(2*pi*x2) + x*y", "--t-end", "0.05", "--samples", "6"],
        &["evolve", "--dim", "1", "--cutoff", "8", "--space", "krein", "--ic", "exp(x) - 2*x^3", "--samples", "4"],
        &["sweep", "--dim", "1", "--space", "v", "--cutoffs", "4,8,16", "--count", "4"],
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for args in commands {
        let a = run_binary(args).map_err(|e| momentheat::Error::InvalidArgument(e.to_string()))?;
        let b = run_binary(args).map_err(|e| momentheat::Error::InvalidArgument(e.to_string()))?;
        let same = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
        passed &= same;
        parts.push(format!("{} {}: {}", args[0], args[1..].join(" "), if same { "identical" } else { "DIFFERENT" }));
    }
    for suite in Suite::ALL {
        let out = run_binary(&["check", "--suite", suite.name(), "--dim", "1", "--cutoff", "8"])
            .map_err(|e| momentheat::Error::InvalidArgument(e.to_string()))?;
        let ok = out.status.code() == Some(0);
        passed &= ok;
        parts.push(format!("check {suite} (N=1 K=8): exit {:?}", out.status.code()));
    }
    Ok((passed, parts.join("; ")))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 V~ exactness (1D)", Box::new(|| timed(Some(1.0), criterion_1))),
        ("2 Krein cosine branch (1D)", Box::new(|| timed(Some(1.0), criterion_2))),
        ("3 Krein non-cosine branch (1D)", Box::new(|| timed(Some(30.0), criterion_3))),
        (
            "4 Gauss-Green identity",
            Box::new(|| {
                timed(Some(10.0), || {
                    selected(Suite::GaussGreen, &[(1, 8), (2, 6)], &["worked examples", "gap / "])
                })
            }),
        ),
        (
            "5 operator-L identities",
            Box::new(|| {
                timed(None, || {
                    selected(Suite::GaussGreen, &[(1, 8), (2, 6)], &["|mu0(L f)|", "u_{Lf}"])
                })
            }),
        ),
        (
            "6 moment conservation",
            Box::new(|| {
                timed(None, || {
                    selected(
                        Suite::Moments,
                        &[(1, 16), (2, 6)],
                        &["V evolution: max harmonic", "V~ evolution: max harmonic", "V evolution: |mass|"],
                    )
                })
            }),
        ),
        (
            "7 semigroup laws",
            Box::new(|| {
                timed(None, || {
                    selected(
                        Suite::Spectrum,
                        &[(1, 16), (2, 6)],
                        &["semigroup composition", "H norm nonincreasing", "asymptotic decay rate"],
                    )
                })
            }),
        ),
        ("8 min-max ordering", Box::new(|| timed(None, criterion_8))),
        (
            "9 Krein kernel",
            Box::new(|| {
                timed(None, || {
                    selected(Suite::KreinBc, &[(1, 16), (2, 6)], &["A_K zero modes", "Krein kernel component drift"])
                })
            }),
        ),
        (
            "10 harmonic-space hygiene",
            Box::new(|| {
                timed(None, || {
                    selected(
                        Suite::Periodicity,
                        &[(1, 16), (2, 6)],
                        &["cube members harmonic", "torus members harmonic", "torus members weakly", "span(torus)"],
                    )
                })
            }),
        ),
        ("11 CLI determinism", Box::new(|| timed(None, criterion_11))),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let (passed, detail) = run();
        if !passed {
            failures += 1;
        }
        println!("{} criterion {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {failures} of 11 criteria failed");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
