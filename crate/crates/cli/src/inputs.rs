//! Input discovery and shared loading for the trajectory commands.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use plancomp::classify::{Classifier, ClassifierConfig};
use plancomp::ingest::{load_corpus_lenient, Corpus, LogFormat, ParseOptions};
use plancomp::plan::{PlanChoice, PlanSpec, SettingName};
use plancomp::scores::with_jobs;
use walkdir::WalkDir;

fn wanted_extension(path: &Path, format: LogFormat) -> bool {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    match format {
        LogFormat::Canonical => matches!(ext, "jsonl" | "ndjson"),
        LogFormat::SweAgent => matches!(ext, "traj" | "json"),
    }
}

/// Expands directories into their trajectory files. Explicit file arguments
/// are kept whatever their extension. Output is sorted and de-duplicated.
pub fn expand_inputs(inputs: &[PathBuf], format: LogFormat) -> Result<Vec<PathBuf>> {
    let mut out = BTreeSet::new();
    for input in inputs {
        if input.is_dir() {
            for entry in WalkDir::new(input).sort_by_file_name() {
                let entry = entry.with_context(|| format!("walking {}", input.display()))?;
                if entry.file_type().is_file() && wanted_extension(entry.path(), format) {
                    out.insert(entry.into_path());
                }
            }
        } else if input.exists() {
            out.insert(input.clone());
        } else {
            bail!("input not found: {}", input.display());
        }
    }
    Ok(out.into_iter().collect())
}

pub struct Loaded {
    pub corpus: Corpus,
    pub failures: Vec<(PathBuf, String)>,
}

/// Loads every input, keeping going past unparseable files. A failures file
/// is written to `out` when any input failed.
pub fn load(inputs: &[PathBuf], format: LogFormat, jobs: usize, out: &Path) -> Result<Loaded> {
    let files = expand_inputs(inputs, format)?;
    if files.is_empty() {
        eprintln!("warning: no trajectory files found in the given inputs");
    }
    let opts = ParseOptions::with_format(format);
    let report = with_jobs(jobs, || load_corpus_lenient(&files, &opts))??;
    let failures: Vec<(PathBuf, String)> = report
        .failures
        .into_iter()
        .map(|(p, e)| (p, e.to_string()))
        .collect();
    if !failures.is_empty() {
        let mut text = String::new();
        for (p, e) in &failures {
            eprintln!("warning: skipped {}: {e}", p.display());
            text.push_str(&format!("{}\t{e}\n", p.display()));
        }
        write(&out.join("failures.txt"), text)?;
    }
    eprintln!(
        "loaded {} trajectories from {} files ({} failed)",
        report.corpus.len(),
        files.len(),
        failures.len()
    );
    if report.corpus.is_empty() && !failures.is_empty() {
        bail!("no input could be parsed; see {}", out.join("failures.txt").display());
    }
    Ok(Loaded {
        corpus: report.corpus,
        failures,
    })
}

/// A catalogue setting name or a path to a JSON plan spec.
pub fn plan_choice(plan: Option<&str>) -> Result<PlanChoice> {
    let plan = plan.unwrap_or("standard");
    if let Ok(name) = plan.parse::<SettingName>() {
        return Ok(PlanChoice::from_setting(name));
    }
    let path = Path::new(plan);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
        let spec = PlanSpec::from_json(&text).with_context(|| format!("parsing plan {}", path.display()))?;
        return Ok(PlanChoice::Spec(spec));
    }
    bail!("`{plan}` is neither a plan setting nor a plan spec file")
}

pub fn classifier(config: Option<&Path>) -> Result<Classifier> {
    let cfg = match config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading classifier config {}", p.display()))?;
            ClassifierConfig::from_json(&text).with_context(|| format!("parsing classifier config {}", p.display()))?
        }
        None => ClassifierConfig::default(),
    };
    Ok(Classifier::new(&cfg)?)
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn read(path: &Path, what: &str) -> Result<String> {
    if !path.exists() {
        bail!("missing {what}: {}", path.display());
    }
    fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))
}

/// File-name-safe rendering of an identifier.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
