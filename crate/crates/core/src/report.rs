//! The `analyze` report and canonical JSON emission.
//!
//! Canonical form: object keys sorted (serde_json's default `Map` is a
//! `BTreeMap`), floats printed as the shortest string that round-trips,
//! two-space indentation and a trailing newline.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::matrix::{Matrix, MatrixClass, PositiveVector};
use crate::variational::{self, SimplexVector};
use crate::{oracle, perron};

/// Largest dimension for which `analyze` runs the bisection oracle by default.
pub const ORACLE_MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CollatzWielandt,
    DvfAtPerron,
    FiedlerAtPerron,
    SaddleDirect,
    SaddleIterative,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::CollatzWielandt,
        Method::DvfAtPerron,
        Method::FiedlerAtPerron,
        Method::SaddleDirect,
        Method::SaddleIterative,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CollatzWielandt => "collatz_wielandt",
            Method::DvfAtPerron => "dvf_at_perron",
            Method::FiedlerAtPerron => "fiedler_at_perron",
            Method::SaddleDirect => "saddle_direct",
            Method::SaddleIterative => "saddle_iterative",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub value: f64,
    pub certificate: Value,
    /// Absent for methods that do not report an iteration count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Seconds; only recorded on request so default output is byte-stable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub input_digest: String,
    pub n: usize,
    pub class: MatrixClass,
    pub results: BTreeMap<Method, MethodResult>,
    pub agreement: f64,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub perron_tol: f64,
    pub cw_eps: f64,
    pub direct_tol: f64,
    pub iterative_tol: f64,
    pub oracle_eps: f64,
    pub force_oracle: bool,
    pub timings: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            perron_tol: perron::DEFAULT_TOL,
            cw_eps: perron::DEFAULT_TOL,
            direct_tol: variational::DEFAULT_DIRECT_TOL,
            iterative_tol: variational::DEFAULT_ITERATIVE_TOL,
            oracle_eps: oracle::DEFAULT_EPS,
            force_oracle: false,
            timings: false,
        }
    }
}

impl AnalyzeOptions {
    fn tolerances(&self) -> BTreeMap<String, f64> {
        [
            ("perron_tol", self.perron_tol),
            ("cw_eps", self.cw_eps),
            ("direct_tol", self.direct_tol),
            ("iterative_tol", self.iterative_tol),
            ("oracle_eps", self.oracle_eps),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// SHA-256 over `n` (u64 LE) followed by the row-major entries' IEEE bits
/// (u64 LE), hex encoded.
pub fn input_digest(a: &Matrix) -> String {
    let mut h = Sha256::new();
    h.update((a.dim() as u64).to_le_bytes());
    for v in a.data() {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Max pairwise `|value_i − value_j|`; zero for fewer than two results.
pub fn agreement(results: &BTreeMap<Method, MethodResult>) -> f64 {
    let values: Vec<f64> = results.values().map(|r| r.value).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, enabled.then(|| start.elapsed().as_secs_f64())))
}

/// Runs every method on a nonnegative irreducible matrix. The first failing
/// solver aborts the analysis with its error.
pub fn analyze(a: &Matrix, opts: &AnalyzeOptions) -> Result<Report> {
    let class = a.classify();
    class.require_nonnegative_irreducible()?;
    let mut results = BTreeMap::new();
    let t = opts.timings;

    let (cw, wall_time) = timed(t, || perron::cw_certified_interval(a, opts.cw_eps))?;
    results.insert(
        Method::CollatzWielandt,
        MethodResult {
            value: cw.midpoint(),
            iterations: None,
            certificate: serde_json::to_value(&cw).expect("serializable"),
            wall_time,
        },
    );

    let (pp, perron_time) = timed(t, || perron::perron_pair(a, opts.perron_tol))?;
    let (dvf, wall_time) = timed(t, || {
        let p = SimplexVector::new(pp.u.hadamard(&pp.v)?.into_vec())?;
        let value = variational::dvf_objective(a, &p, &pp.v)?;
        Ok((value, p))
    })?;
    results.insert(
        Method::DvfAtPerron,
        MethodResult {
            value: dvf.0,
            iterations: Some(pp.iterations),
            certificate: json!({ "p": dvf.1, "x": pp.v, "perron_residual": pp.residual }),
            wall_time: add_times(perron_time, wall_time),
        },
    );
    let (fiedler, wall_time) = timed(t, || variational::fiedler_objective(a, &pp.v, &pp.u))?;
    results.insert(
        Method::FiedlerAtPerron,
        MethodResult {
            value: fiedler,
            iterations: Some(pp.iterations),
            certificate: json!({ "x": pp.v, "y": pp.u, "perron_residual": pp.residual }),
            wall_time: add_times(perron_time, wall_time),
        },
    );

    for (method, solve) in [
        (
            Method::SaddleDirect,
            variational::saddle_direct as fn(&Matrix, f64) -> Result<_>,
        ),
        (Method::SaddleIterative, variational::saddle_iterative),
    ] {
        let tol = if method == Method::SaddleDirect {
            opts.direct_tol
        } else {
            opts.iterative_tol
        };
        let (cert, wall_time) = timed(t, || solve(a, tol))?;
        results.insert(
            method,
            MethodResult {
                value: cert.r_estimate,
                iterations: Some(cert.iterations),
                certificate: serde_json::to_value(&cert).expect("serializable"),
                wall_time,
            },
        );
    }

    if a.dim() <= ORACLE_MAX_DIM || opts.force_oracle {
        let (bracket, wall_time) = timed(t, || oracle::oracle_bracket(a, opts.oracle_eps))?;
        results.insert(
            Method::Oracle,
            MethodResult {
                value: bracket.midpoint(),
                iterations: Some(bracket.bisections),
                certificate: serde_json::to_value(&bracket).expect("serializable"),
                wall_time,
            },
        );
    }

    Ok(Report {
        input_digest: input_digest(a),
        n: a.dim(),
        class,
        agreement: agreement(&results),
        results,
        tolerances: opts.tolerances(),
    })
}

fn add_times(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? + b?)
}

/// Canonical JSON bytes for any serializable value.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let value = serde_json::to_value(value).expect("serializable");
    let mut out = serde_json::to_vec_pretty(&value).expect("in-memory write");
    out.push(b'\n');
    out
}

pub fn write_report(r: &Report) -> Vec<u8> {
    canonical_json(r)
}

/// Values of the classical objectives evaluated at the Perron data, plus the
/// scaled Rayleigh quotient at the closed-form saddle.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub perron_root: f64,
    pub values: BTreeMap<String, f64>,
    pub agreement: f64,
}

pub fn compare(a: &Matrix, tol: f64) -> Result<Comparison> {
    a.classify().require_nonnegative_irreducible()?;
    let pp = perron::perron_pair(a, tol)?;
    let (cw_lo, cw_hi) = variational::cw_ratios(a, &pp.v)?;
    let p = SimplexVector::new(pp.u.hadamard(&pp.v)?.into_vec())?;
    let x_hat: PositiveVector = pp.u.hadamard(&pp.v)?.sqrt();
    let y_hat = pp.u.divide(&pp.v)?.sqrt();
    let values: BTreeMap<String, f64> = [
        ("cw_lower", cw_lo),
        ("cw_upper", cw_hi),
        ("dvf", variational::dvf_objective(a, &p, &pp.v)?),
        ("fiedler", variational::fiedler_objective(a, &pp.v, &pp.u)?),
        ("scaled_rayleigh", variational::scaled_rayleigh(a, &x_hat, &y_hat)?),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let mut all: Vec<f64> = values.values().copied().collect();
    all.push(pp.r);
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Comparison {
        perron_root: pp.r,
        values,
        agreement: hi - lo,
    })
}
