//! End-to-end acceptance checks. Runs every criterion, prints one PASS/FAIL
//! line each and exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use wvqkd::discrimination::{fig31_curve, threshold_error, write_fig31_csv, GaussianPair, ThresholdScheme};
use wvqkd::montecarlo::{density_oracle, oracle_deviation, sample_rounds, SimConfig};
use wvqkd::protocol::{postselection_state, rho_ab, sigma_observable, Bit, ChannelModel, ProtocolParams};
use wvqkd::qmath::{
    mutual_information, Complex, ComplexMatrix, DensityMatrix, JointDistribution, StateVector, HERMITIAN_TOL, PSD_TOL,
    TRACE_TOL,
};
use wvqkd::security::exact::{
    eve_state_exact, joint_prob_exact, secret_fraction_exact, sixstate_limit_check, tolerance_exact,
};
use wvqkd::security::wma::{eve_state_wma, joint_prob_wma, secret_fraction_wma, tolerance_wma};
use wvqkd::security::SecurityReport;
use wvqkd::weakvalues::{postselected_purification_weak_value, weak_value_mixed};

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass_if(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn params(gamma: f64, alpha: f64) -> ProtocolParams {
    ProtocolParams::with_default_bins(gamma, 1.0, alpha).expect("valid parameters")
}

/// splitmix64; enough for drawing test instances.
struct Rng(u64);

impl Rng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn complex(&mut self) -> Complex {
        Complex::new(2.0 * self.uniform() - 1.0, 2.0 * self.uniform() - 1.0)
    }

    fn matrix(&mut self, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| self.complex())
    }
}

fn c1_weak_value_equivalence() -> Outcome {
    let mut rng = Rng(7);
    let mut worst = 0.0f64;
    let mut count = 0;
    for &d in &[2usize, 4] {
        for _ in 0..60 {
            let g = rng.matrix(d);
            let rho = DensityMatrix::from_unnormalized(g.matmul(&g.adjoint()).unwrap()).unwrap();
            let h = rng.matrix(d);
            let obs = h.add(&h.adjoint()).unwrap().scale_real(0.5);
            let post = StateVector::normalized((0..d).map(|_| rng.complex()).collect()).unwrap();
            let a = weak_value_mixed(&obs, &rho, &post).unwrap();
            let b = postselected_purification_weak_value(&obs, &rho, &post).unwrap();
            worst = worst.max((a - b).norm());
            count += 1;
        }
    }
    pass_if(worst < 1e-12, format!("{count} instances, max |difference| {worst:.2e}"))
}

fn c2_sigma_weak_value() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..=10 {
        let eta = 0.05 * k as f64;
        let rho = rho_ab(&ChannelModel::depolarizing(eta).unwrap()).unwrap();
        for a in Bit::BOTH {
            let wv = weak_value_mixed(&sigma_observable(), &rho, &postselection_state(a)).unwrap();
            let expected = a.sign() * (1.0 - 2.0 * eta);
            worst = worst.max((wv - Complex::new(expected, 0.0)).norm());
        }
    }
    pass_if(worst < 1e-12, format!("max deviation from (-1)^a(1-2η): {worst:.2e}"))
}

fn c3_threshold_curve() -> Outcome {
    let pair = GaussianPair::new(0.1, 1.0).unwrap();
    let alphas: Vec<f64> = (0..=5000).map(|k| 0.01 * k as f64).collect();
    let values: Vec<f64> =
        alphas.iter().map(|&alpha| threshold_error(&ThresholdScheme { alpha, bin_width: 0.1 }, &pair)).collect();
    let starts_at_half = values[0] == 0.5;
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let worst =
        alphas.iter().zip(&values).map(|(a, v)| (v - 1.0 / (1.0 + (2.0 * a * 0.1).exp())).abs()).fold(0.0, f64::max);

    let curve = fig31_curve(0.1, &alphas).unwrap();
    let mut buf = Vec::new();
    write_fig31_csv(&mut buf, &curve).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header_ok = lines.next() == Some("alpha,p_err");
    let mut csv_ok = header_ok;
    let mut rows = 0;
    for line in lines {
        let (a, p) = line.split_once(',').unwrap();
        let (a, p): (f64, f64) = (a.parse().unwrap(), p.parse().unwrap());
        let exact = 1.0 / (1.0 + (2.0 * a * 0.1).exp());
        csv_ok &= (p - exact).abs() <= 1e-9 * exact;
        rows += 1;
    }
    csv_ok &= rows == alphas.len();
    pass_if(
        starts_at_half && decreasing && worst < 1e-12 && csv_ok,
        format!("P(0)=0.5: {starts_at_half}, strictly decreasing: {decreasing}, max error {worst:.2e}, CSV rows match: {csv_ok}"),
    )
}

fn c4_wma_pathology() -> Outcome {
    let alphas = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
    let tols: Vec<f64> = alphas.iter().map(|&a| tolerance_wma(&params(0.1, a)).unwrap().eta_tol).collect();
    let t25 = tols[4];
    let t35 = tols[6];
    let monotone = tols.windows(2).all(|w| w[1] >= w[0]);
    let shown: Vec<String> = tols.iter().map(|t| format!("{t:.4}")).collect();
    pass_if(
        t25 > 0.20 && t35 > 0.25 && monotone,
        format!("η_tol(α=5..40) = [{}]; α=25 > 0.20, α=35 > 0.25, nondecreasing: {monotone}", shown.join(", ")),
    )
}

fn c5_exact_no_advantage() -> Outcome {
    let mut violations = Vec::new();
    for gamma in [0.1, 0.2] {
        for alpha in [5.0, 10.0, 20.0, 30.0, 35.0] {
            let p = params(gamma, alpha);
            for k in 129..=500 {
                let eta = k as f64 * 1e-3;
                let f = secret_fraction_exact(eta, &p).unwrap().secret_fraction;
                if f > 0.0 {
                    violations.push(format!("γ={gamma} α={alpha} η={eta}: {f:e}"));
                }
            }
        }
    }
    let tol = tolerance_exact(&params(0.1, 30.0)).unwrap().eta_tol;
    let anchored = (tol - 0.1262).abs() <= 0.002;
    pass_if(
        violations.is_empty() && anchored,
        format!(
            "positive points above 0.129: {}; η_tol(α=30, γ=0.1) = {tol:.6} (|Δ| = {:.4} vs 0.002)",
            if violations.is_empty() { "none".to_string() } else { violations.join("; ") },
            (tol - 0.1262).abs()
        ),
    )
}

fn c6_sixstate_limit() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for eta in [0.05, 0.1, 0.15] {
        let r = sixstate_limit_check(eta, &params(0.1, 10.0)).unwrap();
        let at80 = r.deviations[3];
        ok &= at80 < 1e-6 && r.strictly_decreasing;
        parts.push(format!("η={eta}: |Q-η|(80)={at80:.2e}, decreasing={}", r.strictly_decreasing));
    }
    pass_if(ok, parts.join("; "))
}

fn c7_curve_coincidence() -> Outcome {
    let alphas = [20.0, 25.0, 30.0, 35.0];
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..=200 {
        let eta = k as f64 * 1e-3;
        let f: Vec<f64> =
            alphas.iter().map(|&a| secret_fraction_exact(eta, &params(0.1, a)).unwrap().secret_fraction).collect();
        let spread =
            f.iter().copied().fold(f64::NEG_INFINITY, f64::max) - f.iter().copied().fold(f64::INFINITY, f64::min);
        if spread > worst.0 {
            worst = (spread, eta);
        }
    }
    pass_if(worst.0 <= 1e-3, format!("max spread across α = {:.4} bits at η = {} (limit 1e-3)", worst.0, worst.1))
}

fn c8_oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for eta in [0.0, 0.1, 0.2, 0.4] {
        for alpha in [1.0, 2.0, 5.0] {
            let cfg = SimConfig::new(eta, params(0.1, alpha), 1, 0).unwrap();
            for a in Bit::BOTH {
                for b in Bit::BOTH {
                    density_oracle(a, b, &cfg).unwrap();
                    worst = worst.max(oracle_deviation(a, b, &cfg).unwrap());
                }
            }
        }
    }
    let mut max_z = 0.0f64;
    for eta in [0.0, 0.2] {
        let p = ProtocolParams::new(0.1, 1.0, 2.0, 0.2).unwrap();
        let counts = sample_rounds(&SimConfig::new(eta, p, 1_000_000, 42).unwrap()).unwrap();
        let joint = joint_prob_exact(eta, &p).unwrap();
        let n = counts.conclusive() as f64;
        for a in Bit::BOTH {
            for b in Bit::BOTH {
                let expected = joint.get(a.index(), b.index());
                let observed = counts.for_bit(a).get(b) as f64 / n;
                let z = (observed - expected) / (expected * (1.0 - expected) / n).sqrt();
                max_z = max_z.max(z.abs());
            }
        }
    }
    pass_if(
        worst < 1e-6 && max_z < 3.0,
        format!("oracle max-entry deviation {worst:.2e} (limit 1e-6); Monte Carlo max |z| over joint cells {max_z:.3}"),
    )
}

fn check_density(rho: &DensityMatrix, what: &str, failures: &mut Vec<String>) {
    let m = rho.matrix();
    let herm = m.hermiticity_defect().unwrap();
    let tr = m.trace().unwrap();
    let min = rho.eigen().unwrap().values.iter().copied().fold(f64::INFINITY, f64::min);
    if herm > HERMITIAN_TOL || (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL || min < -PSD_TOL {
        failures.push(format!("{what}: herm {herm:e}, trace {tr}, min eig {min:e}"));
    }
}

fn check_joint(p: &JointDistribution, what: &str, failures: &mut Vec<String>) {
    if (p.total() - 1.0).abs() > 1e-10 || p.cells().iter().flatten().any(|&v| v < 0.0) {
        failures.push(format!("{what}: joint table {:?}", p.cells()));
    }
}

fn check_report(r: &SecurityReport, failures: &mut Vec<String>) {
    let what = format!("{} η={} α={}", r.regime, r.eta, r.params.alpha);
    check_joint(&r.joint, &what, failures);
    if (r.secret_fraction - (r.mi - r.holevo)).abs() > 1e-12 {
        failures.push(format!("{what}: F ≠ I − χ"));
    }
    if (r.mi - mutual_information(&r.joint)).abs() > 1e-12
        || (r.qber - (r.joint.get(0, 1) + r.joint.get(1, 0))).abs() > 1e-12
    {
        failures.push(format!("{what}: report fields inconsistent"));
    }
}

fn run_cli(args: &[&str], threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wvqkd"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn c9_contracts() -> Outcome {
    let mut failures = Vec::new();
    for k in 0..=10 {
        let eta = 0.05 * k as f64;
        for (gamma, alpha) in [(0.1, 1.0), (0.1, 5.0), (0.2, 20.0), (0.1, 35.0)] {
            let p = params(gamma, alpha);
            for a in Bit::BOTH {
                for b in Bit::BOTH {
                    let what = format!("η={eta} γ={gamma} α={alpha} a={} b={}", a.index(), b.index());
                    check_density(&eve_state_exact(a, b, eta, &p).unwrap(), &format!("exact {what}"), &mut failures);
                    check_density(
                        &eve_state_wma(a, b.sign() * alpha, eta, &p).unwrap(),
                        &format!("wma {what}"),
                        &mut failures,
                    );
                }
            }
            check_joint(&joint_prob_wma(eta, &p).unwrap(), "wma", &mut failures);
            check_joint(&joint_prob_exact(eta, &p).unwrap(), "exact", &mut failures);
            check_report(&secret_fraction_wma(eta, &p).unwrap(), &mut failures);
            check_report(&secret_fraction_exact(eta, &p).unwrap(), &mut failures);
            if alpha <= 5.0 {
                let cfg = SimConfig::new(eta, p, 1, 0).unwrap();
                for a in Bit::BOTH {
                    for b in Bit::BOTH {
                        check_density(&density_oracle(a, b, &cfg).unwrap(), "oracle", &mut failures);
                    }
                }
            }
        }
    }

    let runs: [&[&str]; 6] = [
        &["scan", "--gamma", "0.1,0.2", "--alpha", "5,30", "--eta", "0:0.5:0.01"],
        &["tolerance", "--alpha", "0,10,30"],
        &["discriminate"],
        &["compare", "--alpha", "20,30", "--eta", "0:0.3:0.02", "--format", "json"],
        &["qber", "--alpha", "10,80", "--eta", "0:0.5:0.05"],
        &["montecarlo", "--rounds", "300000", "--seed", "7"],
    ];
    let mut reproducible = 0;
    for args in runs {
        let first = run_cli(args, None);
        let second = run_cli(args, Some("1"));
        match (first, second) {
            (Ok(x), Ok(y)) if x == y && !x.is_empty() => reproducible += 1,
            (Ok(_), Ok(_)) => failures.push(format!("{args:?}: output differs between runs")),
            (Err(e), _) | (_, Err(e)) => failures.push(e),
        }
    }
    pass_if(
        failures.is_empty(),
        format!(
            "state/table/report contracts on 44 parameter points; {reproducible}/6 CLI commands byte-identical across runs and thread counts{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(" | ")) }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 weak-value equivalence", c1_weak_value_equivalence, Duration::from_secs(1)),
        ("2 weak value of 1⊗σz", c2_sigma_weak_value, Duration::from_secs(1)),
        ("3 threshold discrimination curve", c3_threshold_curve, Duration::from_secs(1)),
        ("4 first-order tolerance pathology", c4_wma_pathology, Duration::from_secs(30)),
        ("5 exact no-advantage", c5_exact_no_advantage, Duration::from_secs(60)),
        ("6 six-state limit", c6_sixstate_limit, Duration::from_secs(1)),
        ("7 exact curve coincidence", c7_curve_coincidence, Duration::from_secs(30)),
        ("8 oracle equivalence", c8_oracle_equivalence, Duration::from_secs(60)),
        ("9 contract suite", c9_contracts, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = outcome.passed && in_time;
        if !passed {
            failed += 1;
        }
        println!(
            "ACCEPTANCE {} {name}: {} [{:.2}s / {}s]{}",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { " over time budget" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
