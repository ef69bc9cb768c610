use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use plancomp::flow::{build_flow_parallel, build_flow_stratified, emit_sankey, FlowTable, StyleConfig};
use plancomp::graphectory::{build_graphectory, graphectory_stats, to_dot};
use plancomp::ingest::{to_canonical, TrajectoryRecord};
use plancomp::plan::PlanChoice;
use plancomp::report::{render_csv, render_text, ReportInputs, TestResult};
use plancomp::scores::{
    corpus_langutories, read_scores_jsonl, score_corpus, with_jobs, write_scores_csv, write_scores_jsonl, ScoreRecord,
    METRIC_NAMES,
};
use plancomp::stats::{
    deterministic_subset_from_outcomes, group_scores, intersection_table_from_outcomes, mann_whitney_u, mcnemar,
    pearson_test, write_summary_csv, GroupField, IntersectionTable, Outcomes, TestMethod,
};
use plancomp::variants::{catalogue, render_prompt, reminder_positions, PLAN_MARKER};
use serde::Serialize;

use crate::inputs::{self, file_stem, write};
use crate::{CompareArgs, Global, IntersectArgs, ReportArgs, TestKind, VariantsAction};

const DEFAULT_BASE_PROMPT: &str = "You are an autonomous programming agent working in a repository.\n\
Resolve the issue described below and submit your changes when done.\n\n{{PLAN}}\n";

#[derive(Serialize)]
struct IngestManifest<'a> {
    loaded: usize,
    trajectories: Vec<&'a str>,
    failures: Vec<Failure>,
}

#[derive(Serialize)]
struct Failure {
    path: PathBuf,
    error: String,
}

pub fn ingest(g: &Global, paths: &[PathBuf]) -> Result<()> {
    let loaded = inputs::load(paths, g.format, g.jobs, &g.out)?;
    let dir = g.out.join("trajectories");
    for t in &loaded.corpus.trajectories {
        write(&dir.join(format!("{}.jsonl", file_stem(&t.trajectory_id))), to_canonical(t))?;
    }
    let manifest = IngestManifest {
        loaded: loaded.corpus.len(),
        trajectories: loaded.corpus.trajectories.iter().map(|t| t.trajectory_id.as_str()).collect(),
        failures: loaded
            .failures
            .iter()
            .map(|(p, e)| Failure { path: p.clone(), error: e.clone() })
            .collect(),
    };
    write(&g.out.join("ingest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    println!("ingested {} trajectories into {}", manifest.loaded, dir.display());
    Ok(())
}

fn summary_fields(g: &Global) -> Vec<GroupField> {
    if g.by.is_empty() {
        vec![GroupField::Model, GroupField::Difficulty]
    } else {
        g.by.clone()
    }
}

pub fn score(g: &Global, paths: &[PathBuf]) -> Result<()> {
    let plan = inputs::plan_choice(g.plan.as_deref())?;
    let classifier = inputs::classifier(g.classifier_config.as_deref())?;
    let loaded = inputs::load(paths, g.format, g.jobs, &g.out)?;
    let scores = score_corpus(&loaded.corpus, &plan, &classifier, g.jobs)?;

    let mut jsonl = Vec::new();
    write_scores_jsonl(&scores, &mut jsonl)?;
    write(&g.out.join("scores.jsonl"), jsonl)?;
    let mut csv = Vec::new();
    write_scores_csv(&scores, &mut csv)?;
    write(&g.out.join("scores.csv"), csv)?;

    let fields = summary_fields(g);
    let groups = group_scores(&scores, &fields);
    let mut summary = Vec::new();
    write_summary_csv(&groups, &fields, &mut summary)?;
    write(&g.out.join("summary.csv"), summary)?;

    println!("scored {} trajectories against plan {}", scores.len(), plan.name());
    for grp in &groups {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.2}"));
        println!(
            "  {:<30} n={:<5} PPC={} POC={} PPF={} PC={}",
            grp.key.to_string(),
            grp.trajectories,
            fmt(grp.ppc.map(|m| m.mean)),
            fmt(grp.poc.map(|m| m.mean)),
            fmt(grp.ppf.map(|m| m.mean)),
            fmt(grp.pc.map(|m| m.mean)),
        );
    }
    Ok(())
}

fn stratum_key(t: &TrajectoryRecord, fields: &[GroupField]) -> String {
    fields
        .iter()
        .map(|f| match f {
            GroupField::Model => t.model_name.clone(),
            GroupField::Setting => t.plan_setting_name.clone(),
            GroupField::Difficulty => t.difficulty.to_string(),
            GroupField::Resolved => match t.resolved {
                Some(true) => "resolved".into(),
                Some(false) => "unresolved".into(),
                None => "unlabelled".into(),
            },
        })
        .collect::<Vec<_>>()
        .join("_")
}

pub fn flow(g: &Global, paths: &[PathBuf]) -> Result<()> {
    let plan = inputs::plan_choice(g.plan.as_deref())?;
    let classifier = inputs::classifier(g.classifier_config.as_deref())?;
    let loaded = inputs::load(paths, g.format, g.jobs, &g.out)?;
    let langs = corpus_langutories(&loaded.corpus, &classifier, g.jobs)?;
    let table = with_jobs(g.jobs, || build_flow_parallel(&langs, g.stages))??;
    if let Err(why) = table.check_conservation() {
        bail!("flow conservation violated: {why}");
    }

    let mut style = StyleConfig::default();
    if let PlanChoice::Spec(spec) = &plan {
        style.plan_letters = spec.expected_sequence().to_vec();
    }
    let titled = |label: &str, t: &FlowTable| StyleConfig {
        title: Some(format!("Phase flow: {label} (n={})", t.population)),
        ..style.clone()
    };
    let art = emit_sankey(&table, &titled("all", &table), &g.out, "flow")?;
    println!("flow over {} trajectories -> {}", table.population, art.svg.display());

    if !g.by.is_empty() {
        let strata = build_flow_stratified(
            loaded
                .corpus
                .trajectories
                .iter()
                .zip(&langs)
                .map(|(t, l)| (stratum_key(t, &g.by), l)),
            g.stages,
        )?;
        let mut merged = FlowTable::new(g.stages)?;
        for (key, t) in &strata {
            let art = emit_sankey(t, &titled(key, t), &g.out, &format!("flow_{}", file_stem(key)))?;
            println!("  stratum {key}: {} trajectories -> {}", t.population, art.svg.display());
            merged = merged.merge(t)?;
        }
        if merged != table {
            bail!("stratified flows do not sum to the unstratified flow");
        }
    }
    Ok(())
}

pub fn graph(g: &Global, paths: &[PathBuf]) -> Result<()> {
    let loaded = inputs::load(paths, g.format, g.jobs, &g.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trajectory_id", "nc", "tec", "lc"])?;
    for t in &loaded.corpus.trajectories {
        let graph = build_graphectory(t)?;
        let s = graphectory_stats(&graph);
        write(
            &g.out.join("graphs").join(format!("{}.dot", file_stem(&t.trajectory_id))),
            to_dot(&graph, &t.trajectory_id),
        )?;
        w.write_record([t.trajectory_id.clone(), s.nc.to_string(), s.tec.to_string(), s.lc.to_string()])?;
    }
    write(&g.out.join("graph_stats.csv"), w.into_inner().context("flushing graph stats")?)?;
    println!("wrote {} graphs to {}", loaded.corpus.len(), g.out.join("graphs").display());
    Ok(())
}

#[derive(Serialize)]
struct ReminderFile {
    period_steps: usize,
    trajectory_length: usize,
    positions: Vec<usize>,
    text: String,
}

pub fn variants(g: &Global, action: VariantsAction) -> Result<()> {
    let mut settings = catalogue();
    match action {
        VariantsAction::List => {
            for s in &settings {
                let formulation = s.spec.as_ref().map_or("-".to_string(), |p| p.to_string());
                println!(
                    "{:<16} {:<13} {:<24} {}",
                    s.name.as_str(),
                    s.variation_kind.as_str(),
                    formulation,
                    s.description
                );
            }
            Ok(())
        }
        VariantsAction::Emit { base, templates, length } => {
            if let Some(path) = templates {
                let map: BTreeMap<String, String> = serde_json::from_str(&inputs::read(&path, "template file")?)
                    .with_context(|| format!("parsing {}", path.display()))?;
                for (name, text) in map {
                    let name: plancomp::plan::SettingName = name.parse()?;
                    let slot = settings.iter_mut().find(|s| s.name == name).expect("catalogue is complete");
                    *slot = slot.clone().with_template(text);
                }
            }
            let base = match base {
                Some(p) => inputs::read(&p, "base prompt")?,
                None => DEFAULT_BASE_PROMPT.to_string(),
            };
            if !base.contains(PLAN_MARKER) {
                bail!("base prompt has no {PLAN_MARKER} marker");
            }
            let only = match g.plan.as_deref() {
                Some(name) => Some(name.parse::<plancomp::plan::SettingName>()?),
                None => None,
            };
            let dir = g.out.join("prompts");
            let mut emitted = 0;
            for s in settings.iter().filter(|s| only.is_none_or(|n| n == s.name)) {
                write(&dir.join(format!("{}.txt", s.name.as_str())), render_prompt(s, &base)?)?;
                if let Some(schedule) = s.reminder() {
                    let file = ReminderFile {
                        period_steps: schedule.period_steps(),
                        trajectory_length: length,
                        positions: reminder_positions(&schedule, length),
                        text: schedule.reminder_text.clone(),
                    };
                    write(
                        &dir.join(format!("{}.reminder.json", s.name.as_str())),
                        serde_json::to_string_pretty(&file)? + "\n",
                    )?;
                }
                emitted += 1;
            }
            write(&dir.join("catalogue.json"), serde_json::to_string_pretty(&settings)? + "\n")?;
            println!("wrote {emitted} prompt variants to {}", dir.display());
            Ok(())
        }
    }
}

fn read_scores(path: &Path) -> Result<Vec<ScoreRecord>> {
    let text = inputs::read(path, "score file")?;
    read_scores_jsonl(text.as_bytes()).with_context(|| format!("parsing {}", path.display()))
}

fn check_metric(name: &str) -> Result<()> {
    if !METRIC_NAMES.contains(&name) {
        bail!("unknown metric `{name}`; expected one of {}", METRIC_NAMES.join(", "));
    }
    Ok(())
}

fn outcomes(records: &[ScoreRecord], source: &Path) -> Result<Outcomes> {
    let mut out = Outcomes::new();
    for r in records {
        if out.insert(r.instance_id.clone(), r.resolved).is_some() {
            bail!("instance {} appears twice in {}", r.instance_id, source.display());
        }
    }
    Ok(out)
}

pub fn compare(g: &Global, args: &CompareArgs) -> Result<()> {
    check_metric(&args.metric)?;
    let a = read_scores(&args.a)?;
    let b_path = || args.b.as_deref().context("--b is required for this test");
    let result = match args.test {
        TestKind::Mannwhitney => {
            let b = read_scores(b_path()?)?;
            let xa: Vec<f64> = a.iter().filter_map(|r| r.metric(&args.metric)).collect();
            let xb: Vec<f64> = b.iter().filter_map(|r| r.metric(&args.metric)).collect();
            let mw = mann_whitney_u(&xa, &xb).with_context(|| format!("metric {}", args.metric))?;
            TestResult {
                test: "mannwhitney".into(),
                metric: args.metric.clone(),
                a: args.a.display().to_string(),
                b: b_path()?.display().to_string(),
                n_a: xa.len(),
                n_b: xb.len(),
                statistic: mw.u,
                p_value: Some(mw.p_value),
                method: Some(mw.method),
            }
        }
        TestKind::Mcnemar => {
            let b = read_scores(b_path()?)?;
            let (oa, ob) = (outcomes(&a, &args.a)?, outcomes(&b, b_path()?)?);
            let pairs: Vec<(bool, bool)> = oa
                .iter()
                .filter_map(|(id, ra)| Some(((*ra)?, ob.get(id).copied().flatten()?)))
                .collect();
            if pairs.is_empty() {
                bail!("no instance is labelled in both score files");
            }
            let skipped = oa.len().max(ob.len()) - pairs.len();
            if skipped > 0 {
                eprintln!("warning: {skipped} instances lack a paired outcome label and were skipped");
            }
            let m = mcnemar(&pairs);
            TestResult {
                test: "mcnemar".into(),
                metric: "resolved".into(),
                a: args.a.display().to_string(),
                b: b_path()?.display().to_string(),
                n_a: pairs.len(),
                n_b: pairs.len(),
                statistic: m.statistic,
                p_value: Some(m.p_value),
                method: Some(m.method),
            }
        }
        TestKind::Pearson => {
            check_metric(&args.against)?;
            let (x, y): (Vec<f64>, Vec<f64>) = a
                .iter()
                .filter_map(|r| Some((r.metric(&args.metric)?, r.metric(&args.against)?)))
                .unzip();
            let p = pearson_test(&x, &y).with_context(|| format!("{} vs {}", args.metric, args.against))?;
            TestResult {
                test: "pearson".into(),
                metric: args.metric.clone(),
                a: args.a.display().to_string(),
                b: args.against.clone(),
                n_a: p.n,
                n_b: p.n,
                statistic: p.r,
                p_value: Some(p.p_value),
                method: None::<TestMethod>,
            }
        }
    };
    let name = format!("compare_{}_{}.json", result.test, file_stem(&result.metric));
    write(&g.out.join(&name), serde_json::to_string_pretty(&result)? + "\n")?;
    println!(
        "{} on {}: statistic={:.4} p={} (n={}, {})",
        result.test,
        result.metric,
        result.statistic,
        result.p_value.map_or("-".into(), |p| format!("{p:.6}")),
        result.n_a,
        result.n_b
    );
    Ok(())
}

fn setting_of(spec: &str) -> Result<(String, PathBuf, Vec<ScoreRecord>)> {
    let (name, path) = match spec.split_once('=') {
        Some((n, p)) if !n.is_empty() && !Path::new(spec).exists() => (Some(n.to_string()), PathBuf::from(p)),
        _ => (None, PathBuf::from(spec)),
    };
    let records = read_scores(&path)?;
    let name = name.unwrap_or_else(|| {
        let mut names = records.iter().map(|r| r.plan_setting_name.as_str());
        match names.next() {
            Some(first) if names.all(|n| n == first) => first.to_string(),
            _ => path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned()),
        }
    });
    Ok((name, path, records))
}

pub fn intersect(g: &Global, args: &IntersectArgs) -> Result<()> {
    let mut by_setting: BTreeMap<String, Outcomes> = BTreeMap::new();
    for spec in &args.settings {
        let (name, path, records) = setting_of(spec)?;
        let o = outcomes(&records, &path)?;
        if by_setting.insert(name.clone(), o).is_some() {
            bail!("setting {name} given twice; use name=path to disambiguate");
        }
    }
    if !args.deterministic_runs.is_empty() {
        let runs = args
            .deterministic_runs
            .iter()
            .map(|p| outcomes(&read_scores(p)?, p))
            .collect::<Result<Vec<_>>>()?;
        let keep = deterministic_subset_from_outcomes(&runs)?;
        write(
            &g.out.join("deterministic_subset.txt"),
            keep.iter().map(|id| format!("{id}\n")).collect::<String>(),
        )?;
        eprintln!("restricting to {} instances with consistent outcomes", keep.len());
        for o in by_setting.values_mut() {
            o.retain(|id, _| keep.contains(id));
        }
    }
    let table: IntersectionTable = intersection_table_from_outcomes(&by_setting)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    write(&g.out.join("intersection.csv"), csv)?;
    for (set, n) in table.rows() {
        println!("{:>6}  {}", n, set.iter().cloned().collect::<Vec<_>>().join(" & "));
    }
    Ok(())
}

fn read_tests(path: &Path) -> Result<Vec<TestResult>> {
    let text = inputs::read(path, "test result file")?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    })
}

pub fn report(g: &Global, args: &ReportArgs) -> Result<()> {
    let scores = read_scores(&args.scores)?;
    let intersection = match &args.intersection {
        Some(p) => Some(IntersectionTable::read_csv(&inputs::read(p, "intersection table")?)?),
        None => None,
    };
    let tests = args.tests.iter().map(|p| read_tests(p)).collect::<Result<Vec<_>>>()?.concat();
    let inputs = ReportInputs {
        scores: &scores,
        intersection: intersection.as_ref(),
        tests: (!args.tests.is_empty()).then_some(tests.as_slice()),
    };
    write(&g.out.join("report.txt"), render_text(&inputs))?;
    write(&g.out.join("report.csv"), render_csv(&inputs)?)?;
    println!("wrote {} and {}", g.out.join("report.txt").display(), g.out.join("report.csv").display());
    Ok(())
}
