use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use likenet::analysis::{
    analyze_records, clustering_scatter_csv, coalition_sweep, degree_representation,
    exp_percentile_edges, outlying_pair, rate_representation, reciprocity_curve,
    stability_vs_metric, star_comparison, star_comparison_with_records, Metric,
};
use likenet::ensemble::{read_records, run_ensemble_to_files, EnsembleConfig, SystemRecord};
use likenet::{
    eigenvector_centrality, generate_ba, generate_star, likedness_centrality, Graph, RateMatrix,
    StrategicTail,
};
use log::{info, warn};

use crate::args::{
    AnalyzeArgs, CoalitionArgs, Common, EnsembleArgs, GenerateArgs, Measure, Model, SolveArgs,
    StarCompareArgs,
};

/// Files written by a command. Unless `commit` is called they are deleted
/// on drop, so a failed run leaves no half-written results behind.
#[derive(Default)]
struct Outputs {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        self.paths.push(path.to_path_buf());
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for p in &self.paths {
            if fs::remove_file(p).is_ok() {
                warn!("removed partial output {}", p.display());
            }
        }
    }
}

/// Defaults, then the config file, then explicit flags (or their
/// environment variables).
pub fn resolve_config(common: &Common) -> Result<EnsembleConfig> {
    let mut cfg = EnsembleConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_kv_text(&text)
            .with_context(|| format!("in config {}", path.display()))?;
    }
    if let Some(v) = common.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = common.n {
        cfg.n = v;
    }
    if let Some(v) = common.k {
        cfg.k = v;
    }
    if let Some(v) = common.samples {
        cfg.sample_count = v;
    }
    if let Some(v) = common.lambda {
        cfg.rate_lambda = v;
    }
    if let Some(v) = common.workers {
        cfg.workers = v;
    }
    if let Some(v) = common.tolerance {
        cfg.solver.tolerance = v;
    }
    if let Some(v) = common.max_iter {
        cfg.solver.max_iterations = v;
    }
    if let Some(v) = common.relaxation {
        cfg.solver.relaxation = v;
    }
    if let Some(v) = common.strategic_fraction {
        cfg.strategic_fraction = v;
    }
    if let Some(v) = &common.strategic_tail {
        cfg.strategic_tail = v.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut outputs = Outputs::default();
            outputs.write(path, text)?;
            outputs.commit();
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn load_system(graph: &Path, rates: &Path) -> Result<(Graph, RateMatrix)> {
    let g_text =
        fs::read_to_string(graph).with_context(|| format!("reading {}", graph.display()))?;
    let g =
        Graph::from_edge_list(&g_text).with_context(|| format!("parsing {}", graph.display()))?;
    let r_text =
        fs::read_to_string(rates).with_context(|| format!("reading {}", rates.display()))?;
    let r = RateMatrix::parse_auto(&r_text, g.node_count())
        .with_context(|| format!("parsing {}", rates.display()))?;
    r.check_compatible(&g)?;
    Ok((g, r))
}

fn load_records(path: &Path) -> Result<Vec<SystemRecord>> {
    let recs =
        read_records(path, false).with_context(|| format!("reading records {}", path.display()))?;
    if recs.is_empty() {
        bail!("{} holds no records", path.display());
    }
    Ok(recs)
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let g = match args.model {
        Model::Ba => generate_ba(cfg.n, cfg.k, cfg.master_seed)?,
        Model::Star => generate_star(cfg.n)?,
    };
    info!(
        "generated {} nodes, {} edges",
        g.node_count(),
        g.edge_count()
    );
    emit(args.out.as_deref(), &g.to_edge_list())
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let (g, r) = load_system(&args.graph, &args.rates)?;
    let c = match args.measure {
        Measure::Likedness => likedness_centrality(&g, &r, &cfg.solver)?,
        Measure::Eigenvector => eigenvector_centrality(&g, &r, &cfg.solver)?,
    };
    if !c.converged {
        warn!(
            "solver stopped after {} iterations with residual {:e}",
            c.iterations, c.residual
        );
    }
    let mut text = String::from("node,centrality,raw,converged,iterations\n");
    for (i, (v, raw)) in c.values.iter().zip(&c.raw).enumerate() {
        text.push_str(&format!("{i},{v},{raw},{},{}\n", c.converged, c.iterations));
    }
    emit(args.out.as_deref(), &text)
}

pub fn ensemble(args: &EnsembleArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    ensure_dir(&args.out)?;
    let jsonl = args.out.join("records.jsonl");
    let csv = args.out.join("records.csv");
    let summary_path = args.out.join("summary.json");
    let _ = fs::remove_file(&summary_path);
    fs::write(args.out.join("config.txt"), cfg.to_kv_text())?;
    match run_ensemble_to_files(&cfg, &jsonl, &csv, &summary_path, args.resume) {
        Ok(summary) => {
            info!(
                "{} records, {} with non-converged solves, mean stability {:.6}",
                summary.count, summary.nonconverged, summary.mean_stability
            );
            Ok(())
        }
        Err(e) => {
            // Records written so far are complete lines; keep them for
            // --resume but make sure no summary claims the run finished.
            let _ = fs::remove_file(&summary_path);
            warn!("ensemble incomplete; rerun with --resume to continue");
            Err(e.into())
        }
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let records = load_records(&args.records)?;
    ensure_dir(&args.out)?;
    let mut outputs = Outputs::default();
    let dir = &args.out;

    if let Some(other) = &args.compare_with {
        let population = load_records(other)?;
        let s: Vec<&SystemRecord> = records.iter().collect();
        let p: Vec<&SystemRecord> = population.iter().collect();
        let edges = exp_percentile_edges(cfg.rate_lambda, args.bins)?;
        outputs.write(
            &dir.join("rate_representation.csv"),
            &rate_representation(&s, &p, &edges)?.to_csv(),
        )?;
        outputs.write(
            &dir.join("degree_representation.csv"),
            &degree_representation(&s, &p)?.to_csv(),
        )?;
        outputs.commit();
        return Ok(());
    }

    let report = analyze_records(
        &records,
        cfg.strategic_fraction,
        cfg.strategic_tail,
        cfg.rate_lambda,
        args.bins,
    )?;
    let all = &report.all;
    outputs.write(
        &dir.join("rate_representation.csv"),
        &all.rate_representation.to_csv(),
    )?;
    outputs.write(
        &dir.join("degree_representation.csv"),
        &all.degree_representation.to_csv(),
    )?;
    for m in &all.metrics {
        outputs.write(
            &dir.join(format!("stability_vs_{}.csv", m.metric.name())),
            &m.to_csv(),
        )?;
    }
    let refs: Vec<&SystemRecord> = records.iter().collect();
    outputs.write(
        &dir.join("clustering_scatter.csv"),
        &clustering_scatter_csv(&refs),
    )?;
    if report.nonconverged > 0 {
        let converged: Vec<&SystemRecord> = records.iter().filter(|r| r.solver_converged).collect();
        if !converged.is_empty() {
            for metric in Metric::ALL {
                let series = stability_vs_metric(&converged, metric)?;
                outputs.write(
                    &dir.join(format!("stability_vs_{}.converged.csv", metric.name())),
                    &series.to_csv(),
                )?;
            }
        }
    }
    let mut summary = report.summary_json();
    summary["config"] = serde_json::to_value(&cfg)?;
    outputs.write(
        &dir.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    outputs.commit();
    Ok(())
}

fn pick_record(records: &[SystemRecord], tail: StrategicTail) -> &SystemRecord {
    let better = |a: &SystemRecord, b: &SystemRecord| match tail {
        StrategicTail::Highest => a.stability > b.stability,
        StrategicTail::Lowest => a.stability < b.stability,
    };
    let mut best = &records[0];
    for r in &records[1..] {
        if better(r, best) {
            best = r;
        }
    }
    best
}

pub fn coalition(args: &CoalitionArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let (g, r) = match (&args.graph, &args.rates, &args.records) {
        (Some(graph), Some(rates), None) => load_system(graph, rates)?,
        (None, _, Some(path)) => {
            let records = load_records(path)?;
            let rec = pick_record(&records, cfg.strategic_tail);
            info!(
                "using record {} with stability {}",
                rec.record_index, rec.stability
            );
            rec.rebuild(&cfg)?
        }
        _ => bail!("give either --graph with --rates, or --records"),
    };
    let (a, b) = match (args.a, args.b) {
        (Some(a), Some(b)) => (a, b),
        _ => outlying_pair(&g)?,
    };
    let joint_rates: Vec<f64> = if args.joint_rates.is_empty() {
        (0..=20).map(|i| i as f64 * 0.25).collect()
    } else {
        args.joint_rates.clone()
    };
    let points = coalition_sweep(&g, &r, a, b, &joint_rates, &cfg.solver)?;
    let curve = reciprocity_curve(&g, &r, &exp_percentile_edges(cfg.rate_lambda, args.bins)?)?;

    ensure_dir(&args.out)?;
    let mut outputs = Outputs::default();
    let mut text = String::from("joint_rate,member_a,member_b,others_mean,converged\n");
    for p in &points {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            p.joint_rate, p.member_a, p.member_b, p.others_mean, p.converged
        ));
    }
    outputs.write(&args.out.join("coalition.csv"), &text)?;
    outputs.write(&args.out.join("reciprocity.csv"), &curve.to_csv())?;
    outputs.write(&args.out.join("graph.txt"), &g.to_edge_list())?;
    outputs.write(&args.out.join("rates.csv"), &r.to_csv())?;
    let meta = serde_json::json!({ "member_a": a, "member_b": b });
    outputs.write(
        &args.out.join("coalition.json"),
        &(serde_json::to_string_pretty(&meta)? + "\n"),
    )?;
    outputs.commit();
    Ok(())
}

pub fn star_compare(args: &StarCompareArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let cmp = match (&args.records, args.ba_samples) {
        (Some(path), _) => {
            star_comparison_with_records(&cfg, args.star_samples, &load_records(path)?)?
        }
        (None, Some(ba)) => star_comparison(args.star_samples, ba, &cfg)?,
        (None, None) => star_comparison(args.star_samples, cfg.sample_count, &cfg)?,
    };
    info!(
        "star mean {:.6} vs hub mean {:.6} ({} hub records), relative difference {:+.4}",
        cmp.star_mean_stability,
        cmp.ba_hub_mean_stability,
        cmp.ba_hub_count,
        cmp.relative_difference
    );
    emit(
        Some(&args.out),
        &(serde_json::to_string_pretty(&cmp)? + "\n"),
    )
}
