use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use uipt::chain::{log_checkpoints, run_chain, ChainEnd, ChainOptions, Checkpoints};
use uipt::combinatorics::{to_f64, FreePeelLaw, FreeSizeLaw, LawRow, MarkedStepLaw, StepLaw};
use uipt::experiments::{
    chain_increments, corrupted_step, emit_report, fit_exponent, fit_log_log, grow_replicas, heavy_tail_probe,
    ks_report, rescaled_marked_sizes, stable_limit_gof, step_law_gof, step_law_gof_with, wrong_tail_cdf, FitResult,
    GofReport, Quantity, Report,
};
use uipt::peeling::{grow_uipt, GrowthMode, GrowthOptions, PeelRule, Start};
use uipt::percolation::{survival_curve, Engine, InitialColors, PercOptions, Sweep, Verdict};
use uipt::rng::RandomSource;
use uipt::stats;

use crate::config::{
    ChainArgs, Command, EngineArg, GofArgs, GrowArgs, InitialArg, LawsArgs, ModeArg, PercArgs, ReportArgs, RuleArg,
    RunConfig,
};
use crate::Failure;

/// The stable-limit test is meaningless on fewer samples.
const MIN_STABLE_REPLICAS: usize = 1000;

pub fn execute(cfg: &RunConfig) -> Result<(), Failure> {
    let source = RandomSource::new(cfg.seed, 0);
    match &cfg.command {
        Command::Laws(a) => laws(cfg, a),
        Command::Chain(a) => chain(cfg, a, source),
        Command::Grow(a) => grow(cfg, a, source),
        Command::Perc(a) => perc(cfg, a, source),
        Command::Gof(a) => gof(cfg, a, source),
        Command::Report(a) => report(cfg, a, source),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::io(&path, e))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(dir, name, &text)
}

/// Fields that must be set once defaults are applied.
fn req<T: Clone>(v: &Option<T>) -> T {
    v.clone().expect("filled by defaults")
}

fn law_csv(rows: &[LawRow]) -> String {
    let mut out = String::from("outcome,probability,decimal\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.label, r.mass, to_f64(&r.mass));
    }
    out
}

fn laws(cfg: &RunConfig, a: &LawsArgs) -> Result<(), Failure> {
    let chosen = [a.step_law, a.marked_law, a.free_peel_law, a.free_size_law].iter().filter(|x| x.is_some()).count();
    if chosen != 1 {
        return Err(Failure::Config(
            "give exactly one of --step-law, --marked-law, --free-peel-law, --free-size-law".into(),
        ));
    }
    let (name, rows) = if let Some(m) = a.step_law {
        ("step_law", StepLaw::new(m).rows())
    } else if let Some(m) = a.marked_law {
        ("marked_law", MarkedStepLaw::new(m).rows())
    } else if let Some(m) = a.free_peel_law {
        ("free_peel_law", FreePeelLaw::new(m).rows())
    } else {
        let m = a.free_size_law.expect("one law chosen");
        let n_max = a.n_max.ok_or_else(|| Failure::Config("--free-size-law needs --n-max".into()))?;
        ("free_size_law", FreeSizeLaw::new(m, n_max)?.rows())
    };
    let csv = law_csv(&rows);
    write(&cfg.out_dir, &format!("{name}.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn chain(cfg: &RunConfig, a: &ChainArgs, source: RandomSource) -> Result<(), Failure> {
    let (m0, horizon, targets, absorb) = (req(&a.m0), req(&a.horizon), req(&a.targets), req(&a.absorb));
    if horizon == 0 {
        return Err(Failure::Config("horizon must be positive".into()));
    }
    let options = ChainOptions {
        checkpoints: Checkpoints::At(log_checkpoints(1, horizon, 4)),
        absorb_at_zero: absorb,
        escape_level: a.escape_level,
    };
    let runs = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| run_chain(m0, horizon, &targets, &options, &mut source.fork(i).rng()))
        .collect::<uipt::Result<Vec<_>>>()?;

    let mut traj = String::from("replica,step,m\n");
    let mut summary_csv = String::from("replica,steps,end,final_m,max_m,min_m");
    for t in &targets {
        let _ = write!(summary_csv, ",first_hit_{t}");
    }
    summary_csv.push('\n');
    for (i, r) in runs.iter().enumerate() {
        for (s, m) in &r.samples {
            let _ = writeln!(traj, "{i},{s},{m}");
        }
        let end = match r.end {
            ChainEnd::Horizon => "horizon",
            ChainEnd::Absorbed => "absorbed",
            ChainEnd::Escaped => "escaped",
        };
        let _ = write!(summary_csv, "{i},{},{end},{},{},{}", r.steps, r.final_m, r.max_m, r.min_m);
        for rec in &r.targets {
            let _ = write!(summary_csv, ",{}", rec.first_hit.map(|s| s.to_string()).unwrap_or_default());
        }
        summary_csv.push('\n');
    }
    let hits: Vec<_> = targets
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let n = runs.iter().filter(|r| r.targets[j].hit()).count() as u64;
            let (lo, hi) = stats::wilson_interval(n, runs.len() as u64, 1.96);
            json!({ "target": t, "hits": n, "fraction": n as f64 / runs.len() as f64, "ci_low": lo, "ci_high": hi })
        })
        .collect();
    let growth = if absorb {
        None
    } else {
        let curves: Vec<Vec<(f64, f64)>> = runs
            .iter()
            .map(|r| r.samples.iter().filter(|&&(s, _)| s >= 64).map(|&(s, m)| (s as f64, m as f64)).collect())
            .collect();
        fit_log_log("boundary_vs_steps", &curves).ok()
    };
    write(&cfg.out_dir, "trajectories.csv", &traj)?;
    write(&cfg.out_dir, "runs.csv", &summary_csv)?;
    write_json(&cfg.out_dir, "summary.json", &json!({ "replicas": cfg.replicas, "targets": hits, "growth_fit": growth }))
}

fn growth_options(a: &GrowArgs) -> GrowthOptions {
    let mode = match req(&a.mode) {
        ModeArg::Full => GrowthMode::Full,
        ModeArg::Skeleton => GrowthMode::Skeleton,
    };
    GrowthOptions {
        rule: match req(&a.rule) {
            RuleArg::Trailing => PeelRule::Trailing,
            RuleArg::Leading => PeelRule::Leading,
        },
        start: a.polygon.map_or(Start::RootTriangle, Start::Polygon),
        step_budget: req(&a.step_budget),
        ..GrowthOptions::new(mode)
    }
}

fn layer_fits(traces: &[uipt::peeling::PeelTrace], quantities: &[Quantity], lo: u32, hi: u32) -> Vec<FitResult> {
    quantities.iter().filter_map(|&q| fit_exponent(traces, q, lo, hi).ok()).collect()
}

fn grow(cfg: &RunConfig, a: &GrowArgs, source: RandomSource) -> Result<(), Failure> {
    let r_max = req(&a.r_max);
    let options = growth_options(a);
    let batch = grow_replicas(r_max, cfg.replicas, &options, source)?;
    if batch.traces.is_empty() {
        return Err(uipt::Error::StepBudgetExceeded { budget: options.step_budget }.into());
    }
    let full = options.mode == GrowthMode::Full;

    let mut csv = String::from("replica,r,t,m,hull,ball\n");
    let kept: Vec<u64> = (0..cfg.replicas as u64).filter(|i| !batch.aborted.contains(i)).collect();
    for (i, trace) in kept.iter().zip(&batch.traces) {
        for l in &trace.layers {
            let ball = l.ball.map(|b| b.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{i},{},{},{},{},{ball}", l.r, l.t, l.m, l.hull);
        }
    }
    let mut quantities = vec![Quantity::LayerTime, Quantity::Boundary, Quantity::Hull];
    if full {
        quantities.push(Quantity::Ball);
    }
    let fits = layer_fits(&batch.traces, &quantities, req(&a.fit_from).max(1), r_max);
    write(&cfg.out_dir, "layers.csv", &csv)?;
    write_json(
        &cfg.out_dir,
        "summary.json",
        &json!({ "replicas": cfg.replicas, "aborted": batch.aborted, "fits": fits }),
    )?;

    if req(&a.export_mesh) && full {
        if let Some(&first) = kept.first() {
            let g = grow_uipt(r_max, &mut source.fork(first).rng(), &options)?;
            let mesh = g.mesh.expect("full mode keeps the mesh");
            let sources: Vec<u32> = match options.start {
                Start::RootTriangle => vec![0],
                Start::Polygon(m) => (0..m as u32 + 2).collect(),
            };
            let dist = mesh.multi_source_distances(&sources);
            let path = cfg.out_dir.join("edges.txt");
            let f = File::create(&path).map_err(|e| Failure::io(&path, e))?;
            mesh.write_edge_list(BufWriter::new(f)).map_err(|e| Failure::io(&path, e))?;
            let path = cfg.out_dir.join("vertices.csv");
            let f = File::create(&path).map_err(|e| Failure::io(&path, e))?;
            mesh.write_vertex_csv(&dist, BufWriter::new(f)).map_err(|e| Failure::io(&path, e))?;
        }
    }
    Ok(())
}

fn perc_options(a: &PercArgs) -> (Engine, PercOptions) {
    let engine = match req(&a.engine) {
        EngineArg::Reduced => Engine::Reduced,
        EngineArg::Full => Engine::Full,
    };
    let initial = match req(&a.initial) {
        InitialArg::Random => InitialColors::Random,
        InitialArg::AllBlack => InitialColors::AllBlack,
    };
    let options = PercOptions {
        initial,
        color_holes: req(&a.color_holes),
        step_budget: req(&a.step_budget),
        ..PercOptions::default()
    };
    (engine, options)
}

fn perc(cfg: &RunConfig, a: &PercArgs, source: RandomSource) -> Result<(), Failure> {
    let ps = req(&a.p);
    let (engine, options) = perc_options(a);
    let estimates = survival_curve(&ps, req(&a.horizon), cfg.replicas, engine, &options, source)?;
    let mut csv = String::from("p,replica,verdict,death_step,max_black\n");
    for e in &estimates {
        for (i, o) in e.outcomes.iter().enumerate() {
            let (verdict, step) = match o.verdict {
                Verdict::Died { step } => ("died", step.to_string()),
                Verdict::Survived => ("survived", String::new()),
            };
            let _ = writeln!(csv, "{},{i},{verdict},{step},{}", e.p, o.max_black);
        }
    }
    let rows: Vec<_> = estimates
        .iter()
        .map(|e| {
            json!({
                "p": e.p, "horizon": e.horizon, "replicas": e.replicas, "survived": e.survived,
                "fraction": e.fraction, "ci_low": e.ci_low, "ci_high": e.ci_high,
            })
        })
        .collect();
    let sweep = if estimates.len() > 1 { Some(Sweep::from_estimates(&estimates, req(&a.crossing_level))?) } else { None };
    write(&cfg.out_dir, "perc.csv", &csv)?;
    if let Some(s) = &sweep {
        write(&cfg.out_dir, "sweep.csv", &s.to_csv())?;
    }
    write_json(&cfg.out_dir, "summary.json", &json!({ "estimates": rows, "sweep": sweep }))
}

/// Parameters that determine the results (not where they go or how many
/// threads made them).
fn config_map(cfg: &RunConfig) -> BTreeMap<String, String> {
    let table: toml::Table = toml::from_str(&cfg.to_toml()).expect("own output parses");
    table
        .into_iter()
        .filter(|(k, _)| k != "out_dir" && k != "threads")
        .map(|(k, v)| (k, v.to_string()))
        .collect()
}

/// Step-law and stable-limit tests plus their negative controls.
fn gof_suite(
    m_list: &[u64],
    draws: u64,
    significance: f64,
    stable_m: &[u64],
    max_ks: f64,
    replicas: usize,
    source: RandomSource,
) -> Result<Vec<GofReport>, Failure> {
    let mut out = Vec::new();
    for (j, &m) in m_list.iter().enumerate() {
        out.push(step_law_gof(m, draws, significance, &mut source.fork(j as u64).rng())?);
    }
    if let Some(&m) = m_list.iter().max().filter(|&&m| m > 1) {
        let mut r = step_law_gof_with(m, draws, significance, &mut source.fork(1000).rng(), corrupted_step)?;
        r.name = format!("control_corrupted_step_m{m}");
        out.push(r);
    }
    let replicas = replicas.max(MIN_STABLE_REPLICAS);
    for (j, &m) in stable_m.iter().enumerate() {
        let s = source.fork(2000 + j as u64);
        out.push(stable_limit_gof(m, replicas, max_ks, s)?);
        if j == 0 {
            let xs = rescaled_marked_sizes(m, replicas, s)?;
            out.push(ks_report(&format!("control_wrong_tail_m{m}"), &xs, wrong_tail_cdf, max_ks));
        }
    }
    Ok(out)
}

fn gof(cfg: &RunConfig, a: &GofArgs, source: RandomSource) -> Result<(), Failure> {
    let mut report = Report::new(config_map(cfg));
    report.gof = gof_suite(
        &req(&a.m_list),
        req(&a.draws),
        req(&a.significance),
        &req(&a.stable_m),
        req(&a.max_ks),
        cfg.replicas,
        source,
    )?;
    report.notes.push("entries named control_* are negative controls and are expected to fail".into());
    emit_report(&report, &cfg.out_dir)?;
    Ok(())
}

fn report(cfg: &RunConfig, a: &ReportArgs, source: RandomSource) -> Result<(), Failure> {
    let mut report = Report::new(config_map(cfg));
    let (r_max, fit_from) = (req(&a.r_max), req(&a.fit_from));

    let batch = grow_replicas(r_max, cfg.replicas, &GrowthOptions::new(GrowthMode::Skeleton), source.fork(0))?;
    report.fits = layer_fits(&batch.traces, &[Quantity::LayerTime, Quantity::Boundary, Quantity::Hull], fit_from, r_max);

    let horizon = req(&a.chain_horizon);
    let chains: Vec<Vec<i64>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| chain_increments(horizon, &mut source.fork(1).fork(i).rng()))
        .collect();
    let boundary: Vec<Vec<(f64, f64)>> = chains
        .iter()
        .map(|xs| {
            let mut m = 1i64;
            let checkpoints = log_checkpoints(64, horizon, 4);
            let mut next = checkpoints.iter().peekable();
            let mut pts = Vec::new();
            for (t, x) in xs.iter().enumerate() {
                m += x;
                if next.peek() == Some(&&(t as u64 + 1)) {
                    next.next();
                    pts.push(((t + 1) as f64, m as f64));
                }
            }
            pts
        })
        .collect();
    if let Ok(f) = fit_log_log("chain_boundary", &boundary) {
        report.fits.push(f);
    }
    for gamma in [2u32, 3] {
        let probes = chains.iter().map(|xs| heavy_tail_probe(xs, gamma)).collect::<uipt::Result<Vec<_>>>()?;
        let curves: Vec<Vec<(f64, f64)>> = probes
            .iter()
            .map(|p| p.checkpoints.iter().zip(&p.values).map(|(&c, &v)| (c as f64, v)).collect())
            .collect();
        report.fits.push(fit_log_log(&format!("jump_sum_{gamma}"), &curves)?);
        report.heavy_tails.extend(probes.into_iter().take(1));
    }

    report.gof = gof_suite(
        &[1, 5, 50],
        req(&a.draws),
        req(&a.significance),
        &[req(&a.stable_m)],
        req(&a.max_ks),
        cfg.replicas,
        source.fork(2),
    )?;

    let estimates = survival_curve(
        &req(&a.p),
        req(&a.perc_horizon),
        cfg.replicas,
        Engine::Reduced,
        &PercOptions::default(),
        source.fork(3),
    )?;
    report.sweeps.push(Sweep::from_estimates(&estimates, 0.1)?);
    if !batch.aborted.is_empty() {
        report.notes.push(format!("growth replicas over budget: {:?}", batch.aborted));
    }
    report.notes.push("entries named control_* are negative controls and are expected to fail".into());
    emit_report(&report, &cfg.out_dir)?;
    if let Some(s) = report.sweeps.first() {
        write(&cfg.out_dir, "sweep.csv", &s.to_csv())?;
    }
    Ok(())
}
