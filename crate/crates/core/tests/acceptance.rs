//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report is always printed; exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use keylen::bounds::{ell_exponential_lower_via, ExponentialRoute};
use keylen::cli::{run_sweep, Grid, Mode, SweepLine, SweepRow, SweepSpec};
use keylen::numeric::{binom_cdf_inverse, log_binom_cdf, normal_quantile, BinomialModel};
use keylen::oracle::{verification_suite, Hooks, Level};
use keylen::prob::binary_entropy;
use keylen::{
    ell_exponential_lower, ell_hybrid_lower, ell_spectral_lower, ell_spectral_upper, gaussian_approx, BoundParams,
    BoundResult, BscSource, JointTable, Result, Source,
};

const Q: f64 = 0.11;
const EPS: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rows(lines: Vec<SweepLine>) -> Vec<SweepRow> {
    lines
        .into_iter()
        .map(|l| match l {
            SweepLine::Row(r) => r,
            SweepLine::Skipped { n, eps, reason } => panic!("unexpected skip n={n} eps={eps}: {reason}"),
        })
        .collect()
}

fn n_sweep() -> (Vec<SweepRow>, Duration) {
    let spec = SweepSpec {
        mode: Mode::SweepN,
        q: Some(Q),
        eps: Some(EPS),
        n_grid: Some(Grid { from: 1e2, to: 1e6, count: 100 }),
        ..SweepSpec::default()
    };
    let start = Instant::now();
    let r = rows(run_sweep(&spec).expect("valid sweep"));
    (r, start.elapsed())
}

fn eps_sweeps() -> Vec<SweepRow> {
    let mut out = Vec::new();
    for n in [1_000u64, 10_000, 100_000] {
        let spec = SweepSpec {
            mode: Mode::SweepEps,
            q: Some(Q),
            n: Some(n),
            eps_grid: Some(Grid { from: 1e-15, to: 1e-1, count: 57 }),
            ..SweepSpec::default()
        };
        out.extend(rows(run_sweep(&spec).expect("valid sweep")));
    }
    out
}

fn v(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn max_lower(r: &SweepRow) -> f64 {
    v(r.ell_s_low).max(v(r.ell_e_low)).max(v(r.ell_h_low))
}

fn crossover(sweep: &[SweepRow], elapsed: Duration) -> Outcome {
    let exp_ahead: Vec<bool> = sweep.iter().map(|r| v(r.ell_e_low) > v(r.ell_s_low)).collect();
    let Some(first) = exp_ahead.iter().position(|&a| !a) else {
        return outcome(false, "exponential bound ahead on the whole grid");
    };
    let single_switch = exp_ahead[..first].iter().all(|&a| a) && exp_ahead[first..].iter().all(|&a| !a);
    let (lo, hi) = (sweep[first.saturating_sub(1)].n, sweep[first].n);
    let in_range = first > 0 && lo as f64 >= 5e3 && hi as f64 <= 2e4;
    let fast = elapsed <= Duration::from_secs(10);
    outcome(
        single_switch && in_range && fast,
        format!(
            "n* in ({lo}, {hi}], single switch {single_switch}, {} points in {:.2} s",
            sweep.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn hybrid_dominance(sweep: &[SweepRow], eps_rows: &[SweepRow]) -> Outcome {
    let mut checked = 0;
    let mut worst_spectral = f64::INFINITY;
    let mut worst_exponential = f64::INFINITY;
    for r in sweep.iter().chain(eps_rows) {
        checked += 1;
        worst_spectral = worst_spectral.min(v(r.ell_h_low) - v(r.ell_s_low));
        worst_exponential = worst_exponential.min(v(r.ell_h_low) - v(r.ell_e_low));
    }
    outcome(
        worst_spectral >= 0.0 && worst_exponential >= 0.0,
        format!("{checked} points, min(h − s) = {worst_spectral:.3e}, min(h − e) = {worst_exponential:.3e} nats"),
    )
}

fn sandwich(sweep: &[SweepRow], eps_rows: &[SweepRow]) -> Outcome {
    let mut gap = f64::INFINITY;
    for r in sweep.iter().chain(eps_rows) {
        gap = gap.min(v(r.ell_s_up) - max_lower(r));
    }
    let mut gauss_ok = 0;
    let mut gauss_total = 0;
    for r in sweep.iter().filter(|r| r.n >= 1_000) {
        gauss_total += 1;
        let g = v(r.gauss);
        if g >= max_lower(r) && g <= v(r.ell_s_up) {
            gauss_ok += 1;
        }
    }
    outcome(
        gap >= 0.0 && gauss_ok == gauss_total,
        format!("min(upper − max lower) = {gap:.3e} nats; Gaussian inside on {gauss_ok}/{gauss_total} points n ≥ 1e3"),
    )
}

fn rate() -> Outcome {
    let n = 1_000_000u64;
    let params = BoundParams::with_defaults(EPS, Source::Bsc(BscSource::new(Q, n).unwrap())).unwrap();
    let h = binary_entropy(Q);
    let low = ell_hybrid_lower(&params).unwrap().value_nats / n as f64;
    let up = ell_spectral_upper(&params).unwrap().value_nats / n as f64;
    let ok = (low - h).abs() <= 0.02 && (up - h).abs() <= 0.02;
    outcome(ok, format!("h(q) = {h:.5}, hybrid/n = {low:.5}, upper/n = {up:.5} nats"))
}

fn proven_inequalities() -> Outcome {
    let start = Instant::now();
    let report = verification_suite(42, Level::Full, &Hooks::default()).expect("suite runs");
    let elapsed = start.elapsed();
    let summary: Vec<String> = report
        .reports
        .iter()
        .map(|r| format!("{} {}/{}", r.lemma, if r.pass { "ok" } else { "FAIL" }, r.instances))
        .collect();
    let appendix_count = report
        .reports
        .iter()
        .filter(|r| ["monotonicity", "spectral_direct", "spectral_converse"].contains(&r.lemma.as_str()))
        .map(|r| r.instances)
        .min()
        .unwrap_or(0);
    let ok = report.pass && appendix_count >= 200 && elapsed <= Duration::from_secs(300);
    outcome(ok, format!("{} in {:.1} s", summary.join(", "), elapsed.as_secs_f64()))
}

fn numerics() -> Outcome {
    let mut worst = 0.0f64;
    for (num, den) in [(11, 100), (1, 4), (1, 2)] {
        let q = num as f64 / den as f64;
        for n in 1..=30u64 {
            let exact = common::rational_binom_cdf(n, num, den);
            let model = BinomialModel::new(n, q).unwrap();
            for k in 0..=n {
                let want = common::to_f64(&exact[k as usize]);
                let got = log_binom_cdf(&model, k as i64).unwrap().prob();
                worst = worst.max((got - want).abs() / want);
            }
        }
    }
    let mut round_trips = true;
    for q in [0.11, 0.25, 0.5] {
        for n in 1..=30u64 {
            let model = BinomialModel::new(n, q).unwrap();
            let cdf = |k: i64| if k < 0 { 0.0 } else { log_binom_cdf(&model, k).unwrap().prob() };
            for eps in [1e-12, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.9] {
                let k = binom_cdf_inverse(&model, eps).unwrap();
                round_trips &= cdf(k) > eps && cdf(k - 1) <= eps;
            }
        }
    }
    let median = binom_cdf_inverse(&BinomialModel::new(10, 0.5).unwrap(), 0.5).unwrap();
    let oracle = common::normal_quantile_by_bisection(1e-10);
    let z = normal_quantile(1e-10).unwrap();
    let ok = worst <= 1e-12 && round_trips && median == 5 && (z - oracle).abs() <= 1e-3 && (z + 6.3613).abs() <= 1e-3;
    outcome(
        ok,
        format!(
            "max rel err {worst:.2e}, B⁻¹(10, 0.5, 0.5) = {median}, round trips {round_trips}, Φ⁻¹(1e-10) = {z:.6} (oracle {oracle:.6})"
        ),
    )
}

type Bound = fn(&BoundParams) -> Result<BoundResult>;

fn path_consistency() -> Outcome {
    let bounds: [(&str, Bound); 5] = [
        ("spectral_lower", ell_spectral_lower),
        ("spectral_upper", ell_spectral_upper),
        ("exponential_lower", ell_exponential_lower),
        ("hybrid_lower", ell_hybrid_lower),
        ("gaussian", gaussian_approx),
    ];
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let mut cases = 0;
    for q in [0.11, 0.25] {
        for n in 1..=10u64 {
            let bsc = BscSource::new(q, n).unwrap();
            let table: JointTable = bsc.materialize().unwrap();
            for eps in [0.2, 0.05] {
                let closed = BoundParams::with_defaults(eps, Source::Bsc(bsc)).unwrap();
                let general = BoundParams::with_defaults(eps, Source::Table(&table)).unwrap();
                let mut check = |name: &str, a: f64, b: f64| {
                    cases += 1;
                    let d = (a - b).abs();
                    if d > worst || d.is_nan() {
                        worst = if d.is_nan() { f64::INFINITY } else { d };
                        worst_at = format!("{name} q={q} n={n} ε={eps}");
                    }
                };
                for (name, f) in bounds {
                    check(name, f(&closed).unwrap().value_nats, f(&general).unwrap().value_nats);
                }
                for route in [ExponentialRoute::Gallager, ExponentialRoute::Renyi] {
                    let a = ell_exponential_lower_via(&closed, route).unwrap().value_nats;
                    let b = ell_exponential_lower_via(&general, route).unwrap().value_nats;
                    check(&format!("{route:?}"), a, b);
                }
            }
        }
    }
    outcome(worst <= 1e-9, format!("{cases} comparisons, max |Δ| = {worst:.2e} nats at {worst_at}"))
}

fn main() {
    let (sweep, elapsed) = n_sweep();
    let eps_rows = eps_sweeps();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 crossover", Box::new(|| crossover(&sweep, elapsed))),
        ("2 hybrid dominance", Box::new(|| hybrid_dominance(&sweep, &eps_rows))),
        ("3 sandwich", Box::new(|| sandwich(&sweep, &eps_rows))),
        ("4 rate convergence", Box::new(rate)),
        ("5 proven inequalities", Box::new(proven_inequalities)),
        ("6 numerics", Box::new(numerics)),
        ("7 path consistency", Box::new(path_consistency)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check();
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
