//! Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
//! here; the process exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ewlimit::harness::{
    ibp_battery, jordan_sampling, sweep_delta, sweep_mean, Setup, JORDAN_SAMPLES,
};
use ewlimit::mc::{estimate_columns, CovarianceEstimate};
use ewlimit::ExperimentConfig;
use ewlimit_core::she::she_kernel_equal_time;
use ewlimit_core::{
    build_whittaker_stencil, canonical_site, cell_weights, dual_frequencies, enumerate_sites,
    limit_coefficients, she_kernel, validate_assumptions, z0_covariance, z0_covariance_kernel_form,
    ComplexField, FieldPath, GaussianComponent, GaussianTestFunction, LimitSpec, PolarQuadrature,
    RescaleScheme, RngStream, Site, SpectralModel, Torus, TorusParams, C64,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn config(delta_list: &[f64], replicas: u64, psi: bool) -> ExperimentConfig {
    let psi = if psi {
        r#"[{"amplitude": 1.0, "center": [0.0, 0.0], "sigma": 1.0}]"#
    } else {
        "null"
    };
    let list: Vec<String> = delta_list.iter().map(|d| d.to_string()).collect();
    ExperimentConfig::from_json(&format!(
        r#"{{
        "torus": {{"m": 64, "m2": 32}},
        "drift": {{"D": 2.0, "C": 1.0, "tie_in": true}},
        "rescale": {{"delta_list": [{}], "s": 0.5, "t": 0.5}},
        "test_function": {{"components": [{{"amplitude": 1.0, "center": [0.0, 0.0], "sigma": 1.0}}]}},
        "ic": {{"psi": {psi}}},
        "mc": {{"replicas": {replicas}, "seed": 20240611}},
        "quadrature": {{"quad_n": 6, "eps": 1e-10, "radial_n": 64, "angular_n": 32}}
    }}"#,
        list.join(", ")
    ))
    .expect("acceptance config")
}

fn lcg(state: &mut u64) -> f64 {
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}

fn fourier_basis() -> Outcome {
    let mut ortho = 0.0f64;
    let mut round = 0.0f64;
    let mut seed = 1u64;
    for m in 3..=8 {
        for m2 in [1, m - 1] {
            let p = TorusParams::new(m, m2).unwrap();
            let t = Torus::new(p);
            let sites = enumerate_sites(&p);
            let freqs = dual_frequencies(&p);
            for (i, a) in freqs.iter().enumerate() {
                for (j, b) in freqs.iter().enumerate() {
                    let ip: C64 = sites
                        .iter()
                        .map(|x| t.basis(*a, x.to_array()) * t.basis(*b, x.to_array()).conj())
                        .sum();
                    ortho = ortho.max((ip - if i == j { 1.0 } else { 0.0 }).norm());
                }
            }
            let f = ComplexField::from_fn(p, |_| C64::new(lcg(&mut seed), lcg(&mut seed)));
            let back = t.inverse(&t.forward(&f));
            for (a, b) in back.values.iter().zip(&f.values) {
                round = round.max((a - b).norm());
            }
        }
    }
    outcome(
        ortho < 1e-12 && round < 1e-12,
        format!("orthonormality defect {ortho:.2e}, roundtrip defect {round:.2e} (tol 1e-12)"),
    )
}

fn assumptions() -> Outcome {
    let mut failed = Vec::new();
    for (d, c) in [(2.0, 1.0), (3.0, 1.0), (1.5, 0.5)] {
        let (s, _) = build_whittaker_stencil(d, c).unwrap();
        let rep = validate_assumptions(&s, 64).unwrap();
        for (name, ok) in rep.checks() {
            if !ok {
                failed.push(format!("({d},{c}) {name}"));
            }
        }
    }
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            "3 stencils x 5 checks pass".to_string()
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

fn whittaker_model(m: i64, m2: i64) -> SpectralModel {
    let (s, w) = build_whittaker_stencil(2.0, 1.0).unwrap();
    SpectralModel::new(TorusParams::new(m, m2).unwrap(), &s, w.v)
}

fn exact_sampler() -> Outcome {
    let model = whittaker_model(4, 2);
    let p = *model.params();
    let sites: Vec<Site> = [[0, 0], [1, 0], [0, -1]]
        .iter()
        .map(|x| canonical_site(*x, &p))
        .collect();
    let n = 200_000;
    // columns: (s,t) = (0.5,0.5) then (0.5,1.0), each over the 9 site pairs
    let est = estimate_columns(
        n,
        18,
        || (),
        |_, r, out| {
            let mut rng = RngStream::new(31, r);
            let path =
                FieldPath::simulate(&model, model.zero_modes(), &[0.5, 1.0], &mut rng).unwrap();
            let a = model.field_at_sites(&path.states[0], &sites).unwrap();
            let b = model.field_at_sites(&path.states[1], &sites).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] = a[i] * a[j];
                    out[9 + 3 * i + j] = a[i] * b[j];
                }
            }
        },
    );
    let mut worst = 0.0f64;
    for (c, e) in est.iter().enumerate() {
        let t = if c < 9 { 0.5 } else { 1.0 };
        let (i, j) = ((c % 9) / 3, c % 3);
        let exact = model
            .analytic_covariance_torus(sites[i].to_array(), 0.5, sites[j].to_array(), t)
            .unwrap();
        worst = worst.max((e.mean - exact).abs() / e.stderr);
    }
    outcome(
        worst <= 4.0,
        format!("18 cells, N={n}, worst |MC - exact| = {worst:.2} stderr (tol 4)"),
    )
}

fn partition_independence() -> Outcome {
    let model = whittaker_model(8, 4);
    let p = *model.params();
    let x = canonical_site([0, 0], &p);
    let y = canonical_site([1, 0], &p);
    let n = 100_000;
    let run = |steps: usize, seed: u64| -> Vec<CovarianceEstimate> {
        let times: Vec<f64> = (1..=steps).map(|i| i as f64 / steps as f64).collect();
        estimate_columns(
            n,
            2,
            || (),
            |_, r, out| {
                let mut rng = RngStream::new(seed, r);
                let path =
                    FieldPath::simulate(&model, model.zero_modes(), &times, &mut rng).unwrap();
                let v = model
                    .field_at_sites(path.states.last().unwrap(), &[x, y])
                    .unwrap();
                out[0] = v[0] * v[0];
                out[1] = v[0] * v[1];
            },
        )
    };
    let one = run(1, 41);
    let eight = run(8, 42);
    let mut worst = 0.0f64;
    for (a, b) in one.iter().zip(&eight) {
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        worst = worst.max((a.mean - b.mean).abs() / se);
    }
    outcome(
        worst <= 4.0,
        format!("Var and nearest-neighbour Cov at t=1, N={n}: worst gap {worst:.2} stderr (tol 4)"),
    )
}

fn jordan() -> Outcome {
    let (bad, worst) = jordan_sampling(JORDAN_SAMPLES, 5).unwrap();
    outcome(
        bad == 0,
        format!("{bad} violations in {JORDAN_SAMPLES} samples, worst relative excess {worst:.1e} (slack 1e-12)"),
    )
}

fn ibp() -> Outcome {
    let cfg = config(&[0.25], 1000, false);
    let setup = Setup::new(&cfg).unwrap();
    let rows = ibp_battery(&setup, &GaussianTestFunction::unit(), 8).unwrap();
    let w1 = rows
        .iter()
        .filter(|r| r.dim == 1)
        .map(|r| r.abs_err)
        .fold(0.0, f64::max);
    let w2 = rows
        .iter()
        .filter(|r| r.dim == 2)
        .map(|r| r.rel_err)
        .fold(0.0, f64::max);
    outcome(
        rows.iter().all(|r| r.pass),
        format!(
            "{} identities; 1-D worst abs {w1:.1e} (tol 1e-10), 2-D worst rel {w2:.1e} (tol 1e-5)",
            rows.len()
        ),
    )
}

fn weight_mass() -> Outcome {
    let (s, _) = build_whittaker_stencil(2.0, 1.0).unwrap();
    let lc = limit_coefficients(&s).unwrap();
    let phis = [
        GaussianTestFunction::unit(),
        GaussianTestFunction::new(vec![
            GaussianComponent {
                amplitude: 1.0,
                center: [0.4, -0.3],
                sigma: 0.9,
            },
            GaussianComponent {
                amplitude: -0.5,
                center: [-0.6, 0.5],
                sigma: 1.4,
            },
        ])
        .unwrap(),
    ];
    let mut worst = 0.0f64;
    for delta in [0.25, 0.04] {
        let sch = RescaleScheme::new(delta, &lc).unwrap();
        for phi in &phis {
            let table = cell_weights(phi, 0.5, &sch, 1e-10, 6).unwrap();
            let want: f64 = phi
                .components()
                .iter()
                .map(|c| c.amplitude * 2.0 * PI * c.sigma * c.sigma)
                .sum();
            worst = worst.max((table.total - want).abs());
        }
    }
    outcome(
        worst < 1e-6,
        format!("worst |total - mass| = {worst:.2e} (tol 1e-6)"),
    )
}

fn mean_convergence() -> Outcome {
    let cfg = config(&[0.2, 0.1, 0.05], 1000, true);
    let rows: Vec<_> = sweep_mean(&cfg)
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    let rel: Vec<f64> = rows.iter().map(|r| r.rel_err).collect();
    let decreasing = rel.windows(2).all(|w| w[1] < w[0]);
    let last = *rel.last().unwrap();
    outcome(
        decreasing && last < 0.05,
        format!(
            "rel_err {} (strictly decreasing, final < 5%)",
            rel.iter()
                .map(|r| format!("{r:.4}"))
                .collect::<Vec<_>>()
                .join(" -> ")
        ),
    )
}

fn covariance_convergence() -> Outcome {
    let cfg = config(&[0.25, 0.1, 0.04], 100_000, false);
    let rows: Vec<_> = match sweep_delta(&cfg) {
        Ok(rows) => rows.into_iter().map(|r| r.unwrap()).collect(),
        Err(e) => return outcome(false, e.to_string()),
    };
    let monotone = rows
        .windows(2)
        .all(|w| w[1].abs_err <= w[0].abs_err + 2.0 * w[0].stderr.max(w[1].stderr));
    let last = rows.last().unwrap();
    let final_ok = last.abs_err <= (0.1 * last.limit_value.abs()).max(4.0 * last.stderr);
    outcome(
        monotone && final_ok,
        format!(
            "limit {:.4}; abs_err {} (nonincreasing up to 2 stderr); final {:.4} <= {:.4}",
            last.limit_value,
            rows.iter()
                .map(|r| format!("{:.4}+-{:.4} [m={}]", r.abs_err, r.stderr, r.m))
                .collect::<Vec<_>>()
                .join(" -> "),
            last.abs_err,
            (0.1 * last.limit_value.abs()).max(4.0 * last.stderr)
        ),
    )
}

fn limit_consistency() -> Outcome {
    let (s, w) = build_whittaker_stencil(2.0, 1.0).unwrap();
    let spec = LimitSpec::from_whittaker(&w, &limit_coefficients(&s).unwrap());
    let phi = GaussianTestFunction::unit();
    let grid = [0.25, 0.5, 1.0];
    let mut worst_z = 0.0f64;
    for &a in &grid {
        for &b in grid.iter().filter(|&&b| b >= a) {
            let z = z0_covariance(&phi, &phi, a, b, &spec, &PolarQuadrature::default()).unwrap();
            let k = z0_covariance_kernel_form(&phi, &phi, a, b, &spec).unwrap();
            worst_z = worst_z.max((z - k).abs() / k.abs());
        }
    }
    let mut worst_k = 0.0f64;
    for d in [0.1, 0.5, 1.0, 2.5] {
        for t in [0.25, 0.5, 1.0] {
            let q = she_kernel([0.0, 0.0], t, [d, 0.0], t, &spec).unwrap();
            let cf = she_kernel_equal_time(d, t, &spec).unwrap();
            worst_k = worst_k.max((q - cf).abs() / cf.abs());
        }
    }
    outcome(
        worst_z < 1e-6 && worst_k < 1e-8,
        format!("spectral vs kernel form {worst_z:.1e} (tol 1e-6); kernel vs E1 {worst_k:.1e} (tol 1e-8)"),
    )
}

fn determinism() -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let cfg_path = dir.path().join("cfg.json");
    let text = serde_json::to_string_pretty(&config(&[0.5, 0.25], 3000, false)).unwrap();
    std::fs::write(&cfg_path, text).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3", "1"] {
        let out = Command::new(env!("CARGO_BIN_EXE_ewlimit"))
            .args(["sweep-delta", "--config"])
            .arg(&cfg_path)
            .args(["--threads", threads, "--seed", "99"])
            .output()
            .expect("run binary");
        if !out.status.success() {
            return outcome(false, format!("exit {:?}", out.status.code()));
        }
        outputs.push(out.stdout);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same && !outputs[0].is_empty(),
        format!(
            "3 runs (threads 1, 3, 1): {} bytes each, identical = {same}",
            outputs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, Duration); 11] = [
        ("fourier basis", fourier_basis, Duration::from_secs(1)),
        ("assumption validation", assumptions, Duration::from_secs(1)),
        ("exact sampler", exact_sampler, Duration::from_secs(120)),
        (
            "partition independence",
            partition_independence,
            Duration::from_secs(120),
        ),
        ("jordan bounds", jordan, Duration::from_secs(1)),
        ("semi-discrete ibp", ibp, Duration::from_secs(30)),
        ("weight mass", weight_mass, Duration::from_secs(5)),
        (
            "mean convergence",
            mean_convergence,
            Duration::from_secs(120),
        ),
        (
            "covariance convergence",
            covariance_convergence,
            Duration::from_secs(1800),
        ),
        (
            "limit consistency",
            limit_consistency,
            Duration::from_secs(10),
        ),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= *budget;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} [{name}]: {}: {}; {:.2} s (budget {} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
