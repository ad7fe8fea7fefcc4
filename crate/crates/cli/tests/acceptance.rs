//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion (with the measured values indented above it) and exits
//! non-zero if any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use uipt::chain::{growth_exponent_probe, run_chain, sample_step, ChainOptions, Checkpoints};
use uipt::combinatorics::{
    expected_step, hitting_prob, marked_partition, partition, to_f64, triangulation_count, FreePeelLaw, FreeSizeLaw,
    MarkedStepLaw, StepLaw,
};
use uipt::experiments::{
    chain_increments, fit_exponent, grow_replicas, heavy_tail_probe, stable_limit_gof, step_law_gof, Quantity,
};
use uipt::mesh::Mesh;
use uipt::peeling::{grow_uipt, sample_free_full, FreeSizeSampler, GrowthMode, GrowthOptions, StepBudget};
use uipt::percolation::{estimate_survival, subcritical_logbound_probe, sweep, Engine, PercOptions};
use uipt::rng::RandomSource;
use uipt::stats::{chi_square, ks_two_sample, median, merge_buckets, two_proportion_p_value};

const SIGNIFICANCE: f64 = 0.001;

type Criterion = (&'static str, fn(&mut Checks));

struct Check {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), ok, detail: detail.into() });
    }

    fn window(&mut self, name: impl Into<String>, value: f64, lo: f64, hi: f64) {
        self.add(name, (lo..=hi).contains(&value), format!("{value:.4} in [{lo}, {hi}]"));
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `P(X = -k)` for `k = 1..=m`, from `p(1) = m / (2(2m+1))` and the
/// ratio `p(k+1)/p(k) = (2k-1)(m-k) / ((k+2)(2m-2k+1))`.
fn step_down_oracle(m: u64) -> Vec<BigRational> {
    let m = m as i64;
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let mut p = rat(m, 2 * (2 * m + 1));
    for k in 1..=m {
        out.push(p.clone());
        p *= rat((2 * k - 1) * (m - k), (k + 2) * (2 * m - 2 * k + 1));
    }
    out
}

fn exact_laws(c: &mut Checks) {
    let one = BigRational::one();
    let (mut step_ok, mut drift_ok, mut marked_ok, mut peel_ok) = (true, true, true, true);
    for m in 0..=200u64 {
        let law = StepLaw::new(m);
        let down = step_down_oracle(m);
        let up = rat(2 * m as i64 + 3, 3 * m as i64 + 3);
        let total = down.iter().fold(up.clone(), |acc, p| acc + p);
        step_ok &= total == one && law.p_up == up && law.p_down == down && law.total_mass() == one;
        if m <= 100 {
            let drift = down.iter().enumerate().fold(up.clone(), |acc, (i, p)| acc - p * BigInt::from(i + 1));
            drift_ok &= expected_step(m) == drift;
        }
        let marked = MarkedStepLaw::new(m);
        marked_ok &= marked.total_mass() == one
            && marked.rows().iter().fold(BigRational::zero(), |acc, r| acc + &r.mass) == one;
        let peel = FreePeelLaw::new(m);
        peel_ok &= peel.total_mass() == one && peel.rows().iter().fold(BigRational::zero(), |acc, r| acc + &r.mass) == one;
    }
    c.add("step law equals the ratio-recurrence oracle and sums to 1, m <= 200", step_ok, "exact");
    c.add("drift equals sum of x P(x), m <= 100", drift_ok, "exact");
    c.add("marked step law sums to 1, m <= 200", marked_ok, "exact");
    c.add("free peel law sums to 1, m <= 200", peel_ok, "exact");

    let hit_ok = (1..=100u64).all(|n| hitting_prob(n, 0).unwrap() == rat(1, 2 * n as i64 + 1));
    c.add("return probability to 0 is 1/(2n+1), n <= 100", hit_ok, "exact");

    let catalan_ok = (0..=30u64).all(|m| {
        let catalan = BigRational::new(factorial(2 * m), factorial(m) * factorial(m + 1));
        triangulation_count(0, m) == catalan
    });
    c.add("vertex-free count is Catalan(m), m <= 30", catalan_ok, "exact");

    let marked_ok = (0..=30u64).all(|m| {
        let factor = rat(((m + 1) * (2 * m + 1)) as i64, 3);
        marked_partition(m) == partition(m) * factor
    });
    c.add("marked partition is Z_m (m+1)(2m+1)/3, m <= 30", marked_ok, "exact");
}

fn samplers(c: &mut Checks) {
    let source = RandomSource::new(2026, 2);
    for (i, m) in [1u64, 5, 50].into_iter().enumerate() {
        let g = step_law_gof(m, 1_000_000, SIGNIFICANCE, &mut source.fork(i as u64).rng()).unwrap();
        c.add(
            format!("step sampler chi-square at m = {m}, 10^6 draws"),
            g.passed,
            format!("statistic {:.2}, critical {:.2}, p {:.4}", g.statistic, g.threshold, g.p_value.unwrap_or(f64::NAN)),
        );
    }

    let n_max = 400u64;
    let law = FreeSizeLaw::new(3, n_max).unwrap();
    let mut probs: Vec<f64> = law.probs.iter().map(to_f64).collect();
    probs.push(to_f64(&law.tail_mass));
    let mut observed = vec![0u64; probs.len()];
    let mut rng = source.fork(10).rng();
    let mut sampler = FreeSizeSampler::new();
    for _ in 0..100_000 {
        let n = sampler.sample(3, &mut rng);
        observed[n.min(n_max + 1) as usize] += 1;
    }
    let (obs, p) = merge_buckets(&observed, &probs, 5.0);
    let chi = chi_square(&obs, &p, SIGNIFICANCE).unwrap();
    c.add(
        "free size sampler chi-square at m = 3, 10^5 draws",
        chi.passes(),
        format!("statistic {:.2}, critical {:.2}, dof {}", chi.statistic, chi.critical, chi.dof),
    );

    // Runs that climb to `level` pass through it exactly (up-steps are +1),
    // so their remaining hit chance is the exact first-passage probability
    // from `level`.
    let level = 300u64;
    let runs = 100_000u64;
    let opts = ChainOptions { checkpoints: Checkpoints::At(Vec::new()), absorb_at_zero: true, escape_level: Some(level) };
    let hits = (0..runs)
        .filter(|&i| {
            let t = run_chain(5, u64::MAX, &[2], &opts, &mut source.fork(100 + i).rng()).unwrap();
            t.targets[0].hit()
        })
        .count() as u64;
    let exact = to_f64(&hitting_prob(5, 2).unwrap());
    let late = to_f64(&hitting_prob(level, 2).unwrap());
    let estimate = (hits as f64 + (runs - hits) as f64 * late) / runs as f64;
    let se = (exact * (1.0 - exact) / runs as f64).sqrt();
    c.add(
        "hit frequency from 5 to 2 within 3 SE",
        (estimate - exact).abs() <= 3.0 * se,
        format!(
            "empirical {estimate:.5} (raw {:.5}, censored at {level}), exact {exact:.5}, se {se:.5}",
            hits as f64 / runs as f64
        ),
    );
}

fn stable_limit(c: &mut Checks) {
    let g = stable_limit_gof(200, 10_000, 0.1, RandomSource::new(2026, 3)).unwrap();
    c.add(
        "KS distance of rescaled marked sizes at m = 200, 10^4 replicas",
        g.passed,
        format!("distance {:.4} <= {}, censored {}", g.statistic, g.threshold, g.censored),
    );
}

fn growth_exponents(c: &mut Checks) {
    let source = RandomSource::new(2026, 4);
    let skeleton = grow_replicas(128, 100, &GrowthOptions::new(GrowthMode::Skeleton), source.fork(0)).unwrap();
    c.add("skeleton replicas complete", skeleton.aborted.is_empty(), format!("aborted {:?}", skeleton.aborted));
    for (q, lo, hi) in [(Quantity::LayerTime, 2.6, 3.4), (Quantity::Boundary, 1.6, 2.4), (Quantity::Hull, 3.5, 4.5)] {
        let fit = fit_exponent(&skeleton.traces, q, 16, 128).unwrap();
        c.window(format!("skeleton {} slope, r in [16, 128], 100 replicas", q.name()), fit.slope, lo, hi);
    }

    let options = GrowthOptions { step_budget: 20_000_000, ..GrowthOptions::new(GrowthMode::Full) };
    let full = grow_replicas(32, 400, &options, source.fork(1)).unwrap();
    c.add(
        "full-mode replicas kept (at least 30)",
        full.traces.len() >= 30,
        format!("kept {}, over step budget {}", full.traces.len(), full.aborted.len()),
    );
    let fit = fit_exponent(&full.traces, Quantity::Ball, 16, 32).unwrap();
    c.window("full-mode ball slope, r in [16, 32]", fit.slope, 3.4, 4.6);
}

fn chain_scaling(c: &mut Checks) {
    let source = RandomSource::new(2026, 5);
    let probe = growth_exponent_probe(1_000_000, 50, source.fork(0)).unwrap();
    c.window("boundary chain slope, horizon 10^6, 50 replicas", probe.slope, 0.6, 0.75);

    let mut slopes = [Vec::new(), Vec::new()];
    let mut monotone = true;
    let increments = source.fork(1);
    for i in 0..50 {
        let xs = chain_increments(1_000_000, &mut increments.fork(i).rng());
        for (j, gamma) in [2u32, 3].into_iter().enumerate() {
            let h = heavy_tail_probe(&xs, gamma).unwrap();
            monotone &= h.values.windows(2).all(|w| w[0] <= w[1]);
            slopes[j].push(h.slope);
        }
    }
    c.window("power-2 jump sum slope", uipt::stats::mean(&slopes[0]), 1.1, 1.6);
    c.window("power-3 jump sum slope", uipt::stats::mean(&slopes[1]), 1.7, 2.3);
    c.add("jump sums are monotone in time", monotone, "");
}

fn percolation(c: &mut Checks) {
    let source = RandomSource::new(2026, 6);
    let opts = PercOptions::default();
    let survival = |p: f64, horizon: u64, stream: u64| {
        estimate_survival(p, horizon, 1000, Engine::Reduced, &opts, source.fork(stream)).unwrap()
    };

    let low = survival(0.4, 100_000, 0);
    c.add("survival at p = 0.40, horizon 10^5", low.fraction <= 0.01, format!("{:.3} <= 0.01", low.fraction));
    let high = survival(0.6, 100_000, 1);
    c.add("survival at p = 0.60, horizon 10^5", high.fraction >= 0.2, format!("{:.3} >= 0.2", high.fraction));

    let short = survival(0.5, 1_000, 2);
    let long = survival(0.5, 100_000, 3);
    let pv = two_proportion_p_value(short.survived, 1000, long.survived, 1000);
    c.add(
        "survival at p = 0.50 decreases from horizon 10^3 to 10^5",
        long.fraction < short.fraction && pv < SIGNIFICANCE,
        format!("{:.3} -> {:.3}, p-value {pv:.2e}", short.fraction, long.fraction),
    );

    let ps: Vec<f64> = (0..=10).map(|i| 0.45 + 0.01 * i as f64).collect();
    let sw = sweep(&ps, 100_000, 1000, Engine::Reduced, &opts, source.fork(4), 0.1).unwrap();
    let crossing = sw.crossing.unwrap_or(f64::NAN);
    c.window("survival 0.1 crossing, horizon 10^5", crossing, 0.45, 0.55);

    for (i, p) in [0.3, 0.5, 0.7].into_iter().enumerate() {
        let stream = source.fork(10 + i as u64);
        let reduced = estimate_survival(p, 10_000, 1000, Engine::Reduced, &opts, stream.fork(0)).unwrap();
        let full = estimate_survival(p, 10_000, 1000, Engine::Full, &opts, stream.fork(1)).unwrap();
        let pv = two_proportion_p_value(reduced.survived, 1000, full.survived, 1000);
        c.add(
            format!("engines agree on survival at p = {p}"),
            pv >= SIGNIFICANCE,
            format!("reduced {:.3}, full {:.3}, p-value {pv:.3}", reduced.fraction, full.fraction),
        );
        let deaths = |e: &uipt::percolation::SurvivalEstimate| -> Vec<f64> {
            e.outcomes.iter().filter_map(|o| o.death_step()).map(|s| s as f64).collect()
        };
        let ks = ks_two_sample(&deaths(&reduced), &deaths(&full)).unwrap();
        c.add(
            format!("engines agree on death times at p = {p}"),
            ks.p_value >= SIGNIFICANCE,
            format!("KS {:.4}, p-value {:.3}", ks.distance, ks.p_value),
        );
    }

    let medians: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let b = subcritical_logbound_probe(0.4, h, 1000, source.fork(20 + i as u64)).unwrap();
            median(&b.max_black.iter().map(|&x| x as f64).collect::<Vec<_>>())
        })
        .collect();
    let growth = medians[2] / medians[0];
    c.add(
        "subcritical max black median grows at most x3 from horizon 10^3 to 10^5",
        growth <= 3.0,
        format!("medians {medians:?}, ratio {growth:.2}"),
    );
}

/// Peels a random triangulation for `steps` steps at randomly chosen frontier
/// edges, filling every hole with a free triangulation.
fn random_peel(seed: u64, steps: u64) -> Result<(), String> {
    let mut rng = RandomSource::new(2026, 7).fork(seed).rng();
    let mut mesh = Mesh::root_triangle();
    let mut m = 1u64;
    let mut budget = StepBudget::new(u64::MAX);
    for t in 0..steps {
        let s = sample_step(m, &mut rng);
        let offset = sample_step(8, &mut rng).delta.unsigned_abs();
        let edge = (0..offset).fold(mesh.frontier_edge().unwrap(), |e, _| mesh.next(e));
        if s.delta > 0 {
            mesh.peel_attach_new(edge).map_err(|e| e.to_string())?;
            m += 1;
        } else {
            let k = s.delta.unsigned_abs();
            let closed = mesh.peel_attach_back(edge, k as usize, s.side).map_err(|e| e.to_string())?;
            let filler = sample_free_full(k - 1, &mut rng, &mut budget).map_err(|e| e.to_string())?;
            mesh.glue_hole(closed.detached, &filler).map_err(|e| e.to_string())?;
            m -= k;
        }
        if mesh.frontier_len() as u64 != m + 2 {
            return Err(format!("step {t}: frontier {} but boundary parameter {m}", mesh.frontier_len()));
        }
        if mesh.euler_characteristic() != 2 {
            return Err(format!("step {t}: Euler characteristic {}", mesh.euler_characteristic()));
        }
        if t % 2500 == 2499 {
            mesh.validate().map_err(|v| format!("step {t}: {v}"))?;
        }
    }
    mesh.validate().map_err(|v| v.to_string())
}

fn structural(c: &mut Checks) {
    let failures: Vec<String> = (0..100).filter_map(|seed| random_peel(seed, 10_000).err()).collect();
    c.add(
        "validate and Euler relation over 10^4 random peel steps, 100 seeds",
        failures.is_empty(),
        failures.first().cloned().unwrap_or_default(),
    );

    let options = GrowthOptions { record_layer_frontiers: true, ..GrowthOptions::new(GrowthMode::Full) };
    let source = RandomSource::new(2026, 8);
    let (mut layers_ok, mut ball_ok) = (true, true);
    for i in 0..100 {
        let g = grow_uipt(16, &mut source.fork(i).rng(), &options).unwrap();
        let mesh = g.mesh.as_ref().unwrap();
        let dist = mesh.bfs_distances(0);
        for (rec, frontier) in g.trace.layers.iter().zip(&g.layer_frontiers) {
            layers_ok &= frontier.iter().all(|&v| dist[v as usize] == rec.r);
            ball_ok &= rec.ball.is_some_and(|b| b <= rec.hull);
        }
        layers_ok &= g.layer_frontiers.len() == 16;
    }
    c.add("frontier at layer completion sits at BFS distance r, r <= 16, 100 runs", layers_ok, "");
    c.add("ball volume never exceeds hull volume", ball_ok, "");
}

/// Output files of one run; the saved config names its own directory, so
/// that line is dropped.
fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let mut bytes = fs::read(&p).unwrap();
            if name == "config.toml" {
                let text = String::from_utf8(bytes).unwrap();
                bytes = text.lines().filter(|l| !l.starts_with("out_dir")).collect::<Vec<_>>().join("\n").into_bytes();
            }
            (name, bytes)
        })
        .collect();
    files.sort();
    files
}

fn cli_determinism(c: &mut Checks) {
    let runs: [&[&str]; 6] = [
        &["laws", "--marked-law", "7"],
        &["chain", "--m0", "3", "--horizon", "20000", "--targets", "1,0", "--replicas", "20"],
        &["grow", "--mode", "full", "--r-max", "6", "--replicas", "8", "--export-mesh"],
        &["perc", "--p", "0.45,0.55", "--engine", "full", "--horizon", "2000", "--replicas", "30"],
        &["gof", "--m-list", "2,9", "--draws", "20000", "--stable-m", "15", "--replicas", "1000"],
        &[
            "report", "--r-max", "8", "--fit-from", "2", "--chain-horizon", "10000", "--p", "0.4,0.6",
            "--perc-horizon", "500", "--stable-m", "10", "--draws", "10000", "--replicas", "15",
        ],
    ];
    for args in runs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut ok = true;
        for d in &dirs {
            let out = Command::new(env!("CARGO_BIN_EXE_uipt"))
                .args(args)
                .args(["--seed", "11", "--out-dir"])
                .arg(d.path())
                .env_remove("UIPT_OUT_DIR")
                .output()
                .unwrap();
            ok &= out.status.success();
        }
        let (a, b) = (outputs(dirs[0].path()), outputs(dirs[1].path()));
        c.add(format!("`uipt {}` twice gives identical files", args[0]), ok && a == b, format!("{} files", a.len()));
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exact laws", exact_laws),
        ("samplers against exact laws", samplers),
        ("stable limit of marked sizes", stable_limit),
        ("growth exponents", growth_exponents),
        ("boundary chain scaling", chain_scaling),
        ("percolation", percolation),
        ("structural invariants", structural),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut checks = Checks::default();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(&mut checks)));
        if let Err(e) = outcome {
            let msg = e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string()));
            checks.add("criterion ran to completion", false, msg.unwrap_or_default());
        }
        for ch in &checks.0 {
            println!("    [{}] {}: {}", if ch.ok { "ok" } else { "FAILED" }, ch.name, ch.detail);
        }
        let pass = checks.0.iter().all(|ch| ch.ok);
        failed += usize::from(!pass);
        println!(
            "criterion {} ({title}): {} [{} checks, {:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            checks.0.len(),
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
