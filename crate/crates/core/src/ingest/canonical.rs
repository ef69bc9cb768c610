use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize};

use super::{truncate_excerpt, ActionKind, Difficulty, ParseOptions, StepRecord, TrajectoryRecord};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    trajectory_id: String,
    instance_id: String,
    #[serde(default = "unknown")]
    model_name: String,
    #[serde(default = "unknown")]
    plan_setting_name: String,
    #[serde(default, deserialize_with = "lenient_difficulty")]
    difficulty: Difficulty,
    #[serde(default)]
    resolved: Option<bool>,
}

fn unknown() -> String {
    "unknown".to_string()
}

fn lenient_difficulty<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Difficulty, D::Error> {
    let raw = Option::<String>::deserialize(d)?;
    match raw {
        None => Ok(Difficulty::Unknown),
        Some(s) => s.parse().map_err(serde::de::Error::custom),
    }
}

pub(super) fn parse(raw: &str, opts: &ParseOptions) -> Result<TrajectoryRecord> {
    let mut lines = raw
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header_text) = lines.next().ok_or(Error::EmptyTrajectory)?;
    let header: Header = serde_json::from_str(header_text).map_err(|e| Error::MalformedRecord {
        line: header_line,
        message: format!("header: {e}"),
    })?;

    let mut steps: Vec<StepRecord> = Vec::new();
    let mut submit_line = None;
    for (line, text) in lines {
        let mut step: StepRecord = serde_json::from_str(text).map_err(|e| Error::MalformedRecord {
            line,
            message: e.to_string(),
        })?;
        let expected = steps.len() + 1;
        if step.index != expected {
            return Err(Error::MalformedRecord {
                line,
                message: format!("step index {} out of sequence, expected {expected}", step.index),
            });
        }
        if let Some(prev) = submit_line {
            return Err(Error::MalformedRecord {
                line,
                message: format!("step follows the submit on line {prev}"),
            });
        }
        if step.action_kind == ActionKind::Submit {
            submit_line = Some(line);
        }
        step.output_excerpt = truncate_excerpt(&step.output_excerpt, opts.excerpt_budget);
        steps.push(step);
    }
    if steps.is_empty() {
        return Err(Error::EmptyTrajectory);
    }

    Ok(TrajectoryRecord {
        trajectory_id: header.trajectory_id,
        instance_id: header.instance_id,
        model_name: header.model_name,
        plan_setting_name: header.plan_setting_name,
        difficulty: header.difficulty,
        resolved: header.resolved,
        steps,
    })
}

/// Serialises a record in the canonical line-delimited format.
pub fn write_canonical<W: Write>(rec: &TrajectoryRecord, mut out: W) -> Result<()> {
    let header = Header {
        trajectory_id: rec.trajectory_id.clone(),
        instance_id: rec.instance_id.clone(),
        model_name: rec.model_name.clone(),
        plan_setting_name: rec.plan_setting_name.clone(),
        difficulty: rec.difficulty,
        resolved: rec.resolved,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    for step in &rec.steps {
        serde_json::to_writer(&mut out, step)?;
        out.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

pub fn to_canonical(rec: &TrajectoryRecord) -> String {
    let mut buf = Vec::new();
    write_canonical(rec, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
