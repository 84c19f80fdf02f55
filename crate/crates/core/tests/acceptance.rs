//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{rel_err, Rng};
use perron_saddle::balancing::balance;
use perron_saddle::cli::{exit_code, EXIT_CONVERGENCE};
use perron_saddle::io::{self, Format};
use perron_saddle::oracle::{oracle_bracket, oracle_spectral_bound, oracle_spectral_radius};
use perron_saddle::perron::{cw_certified_interval, perron_pair};
use perron_saddle::variational::{
    dvf_objective, fiedler_objective, fiedler_to_dvf, inner_infimum, saddle_direct, saddle_iterative, spectral_bound,
    DEFAULT_DIRECT_TOL, DEFAULT_ITERATIVE_TOL, INNER_TOL,
};
use perron_saddle::{Error, Matrix};

const ORACLE_EPS: f64 = 1e-13;
const PERRON_TOL: f64 = 1e-12;

struct Outcome {
    failed: usize,
    /// First few failure descriptions.
    failures: Vec<String>,
    summary: String,
    budget: Option<Duration>,
}

impl Outcome {
    fn new(budget: Option<Duration>) -> Self {
        Outcome {
            failed: 0,
            failures: Vec::new(),
            summary: String::new(),
            budget,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failed += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }
}

fn two_by_two() -> Matrix {
    Matrix::from_rows(&[[0.0, 2.0], [8.0, 0.0]]).unwrap()
}

fn oracle(a: &Matrix) -> f64 {
    oracle_spectral_radius(a, ORACLE_EPS).unwrap()
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new(Some(Duration::from_millis(100)));
    let a = two_by_two();
    let values = [
        ("cw_midpoint", cw_certified_interval(&a, 1e-12).unwrap().midpoint()),
        (
            "saddle_direct",
            saddle_direct(&a, DEFAULT_DIRECT_TOL).unwrap().r_estimate,
        ),
        (
            "saddle_iterative",
            saddle_iterative(&a, DEFAULT_ITERATIVE_TOL).unwrap().r_estimate,
        ),
        ("spectral_bound", spectral_bound(&a, DEFAULT_DIRECT_TOL).unwrap()),
        ("oracle", oracle_bracket(&a, ORACLE_EPS).unwrap().midpoint()),
    ];
    for (name, v) in values {
        o.check((v - 4.0).abs() <= 1e-7, || format!("{name} = {v}"));
    }
    let cert = saddle_direct(&a, DEFAULT_DIRECT_TOL).unwrap();
    let x = cert.x_hat.as_slice();
    let unit = std::f64::consts::FRAC_1_SQRT_2;
    o.check(x.iter().all(|xi| (xi - unit).abs() <= 1e-9), || {
        format!("x_hat = {x:?}")
    });
    let balanced = balance(&a, 1e-12).unwrap().balanced;
    let target = [0.0, 4.0, 4.0, 0.0];
    let worst = balanced
        .data()
        .iter()
        .zip(target)
        .map(|(b, t)| (b - t).abs())
        .fold(0.0, f64::max);
    o.check(worst <= 1e-9, || format!("balanced off by {worst:e}"));
    o.summary = format!(
        "values within {:.1e} of 4",
        values.iter().map(|(_, v)| (v - 4.0).abs()).fold(0.0, f64::max)
    );
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new(Some(Duration::from_secs(10)));
    let (mut worst_r, mut worst_gap) = (0.0f64, 0.0f64);
    for k in 0..200 {
        let a = common::standard(k);
        let r = oracle(&a);
        match saddle_direct(&a, DEFAULT_DIRECT_TOL) {
            Ok(c) => {
                let e = rel_err(c.r_estimate, r);
                worst_r = worst_r.max(e);
                worst_gap = worst_gap.max(c.inner_gap.abs());
                o.check(e <= 1e-8, || format!("instance {k}: relative error {e:e}"));
                o.check(c.inner_gap.abs() <= 1e-8, || {
                    format!("instance {k}: inner gap {:e}", c.inner_gap)
                });
            }
            Err(e) => o.check(false, || format!("instance {k}: {e}")),
        }
    }
    o.summary = format!("max rel err {worst_r:.1e}, max inner gap {worst_gap:.1e}");
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new(Some(Duration::from_secs(30)));
    let mut rng = Rng::new(3);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..200 {
        let a = common::standard(k);
        let r = oracle(&a);
        for t in 0..50 {
            let x = rng.positive(a.dim(), 0.01, 100.0);
            let phi = inner_infimum(&a, &x, INNER_TOL).unwrap().phi;
            worst = worst.max(phi - r);
            o.check(phi <= r + 1e-8, || format!("instance {k} trial {t}: phi {phi} > r {r}"));
        }
    }
    o.summary = format!("10000 trials, max phi − r = {worst:.1e}");
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new(None);
    let mut rng = Rng::new(4);
    let (mut worst_z, mut worst_obj, mut worst_probe) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for k in 0..200 {
        let a = common::standard(k);
        let r = oracle(&a);
        let pp = perron_pair(&a, PERRON_TOL).unwrap();
        let m = a.diag_scale(&pp.u, &pp.v).unwrap();
        let b = balance(&m, 1e-13).unwrap();
        let dz = b.z.as_slice().iter().map(|z| (z - 1.0).abs()).fold(0.0, f64::max);
        let dr = (b.objective - r).abs();
        worst_z = worst_z.max(dz);
        worst_obj = worst_obj.max(dr);
        o.check(dz <= 1e-8, || format!("instance {k}: ‖z − e‖∞ = {dz:e}"));
        o.check(dr <= 1e-8, || format!("instance {k}: objective − r = {dr:e}"));
        for _ in 0..100 {
            let z = rng.positive(a.dim(), 0.1, 10.0);
            let probe = b.balanced.diag_similarity(&z).unwrap().total();
            worst_probe = worst_probe.max(b.objective - probe);
            o.check(probe >= b.objective - 1e-9, || {
                format!("instance {k}: probe {probe} beats {}", b.objective)
            });
        }
    }
    o.summary = format!("max ‖z−e‖∞ {worst_z:.1e}, max |obj−r| {worst_obj:.1e}, best probe gain {worst_probe:.1e}");
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new(None);
    let mut rng = Rng::new(5);
    let mut worst = 0.0f64;
    for t in 0..1000u64 {
        let a = common::standard(t % 200);
        let x = rng.positive(a.dim(), 0.01, 100.0);
        let y = rng.positive(a.dim(), 0.01, 100.0);
        let f = fiedler_objective(&a, &x, &y).unwrap();
        let (p, xp) = fiedler_to_dvf(&x, &y).unwrap();
        let d = dvf_objective(&a, &p, &xp).unwrap();
        let e = rel_err(d, f);
        worst = worst.max(e);
        o.check(e <= 1e-12, || format!("triple {t}: fiedler {f} dvf {d}"));
    }
    o.summary = format!("1000 triples, max rel diff {worst:.1e}");
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new(None);
    let mut rng = Rng::new(6);
    let (mut worst_phi, mut worst_y, mut worst_sup) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..100 {
        let s = common::symmetric(k);
        let x = rng.positive(s.dim(), 0.01, 100.0);
        let inner = inner_infimum(&s, &x, INNER_TOL).unwrap();
        let sx = s.mul_slice(x.as_slice());
        let rayleigh = x.as_slice().iter().zip(&sx).map(|(a, b)| a * b).sum::<f64>() / x.dot(&x).unwrap();
        let dphi = (inner.phi - rayleigh).abs();
        let y = inner.y_star.as_slice();
        let dy = y.iter().map(|v| (v / y[0] - 1.0).abs()).fold(0.0, f64::max);
        worst_phi = worst_phi.max(dphi);
        worst_y = worst_y.max(dy);
        o.check(dphi <= 1e-9, || {
            format!("instance {k}: phi {} vs rayleigh {rayleigh}", inner.phi)
        });
        o.check(dy <= 1e-6, || format!("instance {k}: y_star not ∝ e ({dy:e})"));
        match saddle_iterative(&s, DEFAULT_ITERATIVE_TOL) {
            Ok(c) => {
                let e = rel_err(c.r_estimate, oracle(&s));
                worst_sup = worst_sup.max(e);
                o.check(e <= 1e-6, || format!("instance {k}: sup rel err {e:e}"));
            }
            Err(e) => o.check(false, || format!("instance {k}: {e}")),
        }
    }
    o.summary = format!("max |phi−R| {worst_phi:.1e}, max y dev {worst_y:.1e}, max sup rel err {worst_sup:.1e}");
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new(None);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let a = common::metzler(k);
        let base = spectral_bound(&a, DEFAULT_DIRECT_TOL).unwrap();
        let reference = oracle_spectral_bound(&a, ORACLE_EPS).unwrap();
        o.check((base - reference).abs() <= 1e-8 * reference.abs().max(1.0), || {
            format!("instance {k}: s(A) {base} vs oracle {reference}")
        });
        for c in [-3.0, 0.5, 10.0] {
            let shifted = spectral_bound(&a.shifted(c).unwrap(), DEFAULT_DIRECT_TOL).unwrap();
            let e = (shifted - base - c).abs();
            worst = worst.max(e);
            o.check(e <= 1e-9, || format!("instance {k}, c = {c}: off by {e:e}"));
        }
    }
    o.summary = format!("150 shifts, max |Δs − c| {worst:.1e}");
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new(None);
    let mut rng = Rng::new(8);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let a = common::standard(k);
        let y = rng.positive(a.dim(), 0.1, 10.0);
        let r = perron_pair(&a, PERRON_TOL).unwrap().r;
        let rs = perron_pair(&a.diag_similarity(&y).unwrap(), PERRON_TOL).unwrap().r;
        let e = rel_err(rs, r);
        worst = worst.max(e);
        o.check(e <= 1e-9, || format!("instance {k}: {rs} vs {r}"));
    }
    o.summary = format!("max rel diff {worst:.1e}");
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new(None);
    let (mut worst, mut no_convergence) = (0.0f64, 0usize);
    for k in 0..100 {
        let a = common::instance(k, 2, 6);
        match saddle_iterative(&a, DEFAULT_ITERATIVE_TOL) {
            Ok(c) => {
                let e = rel_err(c.r_estimate, oracle(&a));
                worst = worst.max(e);
                o.check(e <= 1e-6, || format!("instance {k}: silent wrong value, rel err {e:e}"));
            }
            Err(e @ (Error::NoConvergence { .. } | Error::SaddleNoConvergence { .. })) => {
                no_convergence += 1;
                o.check(exit_code(&e) == EXIT_CONVERGENCE, || {
                    "NoConvergence not mapped to exit 4".into()
                });
            }
            Err(e) => o.check(false, || format!("instance {k}: unexpected {e}")),
        }
    }
    o.check(no_convergence <= 1, || {
        format!("{no_convergence} NoConvergence out of 100")
    });
    o.summary = format!("max rel err {worst:.1e}, NoConvergence {no_convergence}/100");
    o
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_perron-saddle"))
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new(None);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let file = |name: &str| golden.join(name).to_string_lossy().into_owned();
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "gen_n5_seed42.mtx",
            vec![
                "gen".into(),
                "--n".into(),
                "5".into(),
                "--density".into(),
                "0.4".into(),
                "--seed".into(),
                "42".into(),
            ],
        ),
        (
            "analyze_two_by_two.json",
            vec!["analyze".into(), file("two_by_two.mtx")],
        ),
        (
            "analyze_gen_n5_seed42.json",
            vec!["analyze".into(), file("gen_n5_seed42.mtx")],
        ),
        (
            "certify_two_by_two.json",
            vec![
                "certify".into(),
                file("two_by_two.mtx"),
                "--method".into(),
                "direct".into(),
            ],
        ),
        (
            "certify_iterative_gen_n5_seed42.json",
            vec![
                "certify".into(),
                file("gen_n5_seed42.mtx"),
                "--method".into(),
                "iterative".into(),
            ],
        ),
        (
            "balance_two_by_two.json",
            vec!["balance".into(), file("two_by_two.mtx")],
        ),
    ];
    for (expected, args) in &cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, first) = run_cli(&args);
        let (_, second) = run_cli(&args);
        o.check(code == 0, || format!("{expected}: exit {code}"));
        o.check(first == second, || format!("{expected}: output differs between runs"));
        let want = std::fs::read(golden.join(expected)).unwrap_or_default();
        o.check(first == want, || format!("{expected}: output differs from golden file"));
    }
    let mut round_trips = 0;
    for k in 0..50 {
        let a = common::standard(k);
        for format in [Format::MatrixMarketArray, Format::MatrixMarketCoordinate] {
            let back = io::parse_matrix(io::write_matrix(&a, format).as_bytes(), format).unwrap();
            let same = back
                .data()
                .iter()
                .zip(a.data())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            o.check(same, || format!("instance {k}: {format:?} round trip not exact"));
            round_trips += 1;
        }
    }
    o.summary = format!("{} golden outputs, {round_trips} exact round trips", cases.len());
    o
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("analytic 2x2 instance", criterion_1),
        ("saddle attainment vs oracle", criterion_2),
        ("inner infimum is a lower bound", criterion_3),
        ("balancing optimality at Perron scaling", criterion_4),
        ("Fiedler and DVF objectives agree", criterion_5),
        ("Rayleigh recovery for symmetric input", criterion_6),
        ("spectral bound shift equivariance", criterion_7),
        ("diagonal similarity invariance", criterion_8),
        ("iterative saddle without eigen data", criterion_9),
        ("CLI golden outputs and round trips", criterion_10),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = f();
        let elapsed = start.elapsed();
        if let Some(budget) = o.budget {
            o.check(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"));
        }
        let status = if o.failed == 0 { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status} {name}: {} ({:.3}s)",
            k + 1,
            o.summary,
            elapsed.as_secs_f64()
        );
        for f in &o.failures {
            println!("    {f}");
        }
        if o.failed > 0 {
            println!("    {} failed checks", o.failed);
            failed += 1;
        }
    }
    println!(
        "{} of 10 criteria passed in {:.2}s",
        10 - failed,
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
