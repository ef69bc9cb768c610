//! Adapter for SWE-agent `.traj` dumps.
//!
//! A dump is a JSON object whose `trajectory` array holds one entry per turn
//! with `action`, `observation` and `thought`. Actions are either SWE-agent
//! tool calls (`open`, `create`, `edit`, `str_replace_editor ...`, `submit`)
//! or raw shell commands.

use std::collections::HashSet;
use std::path::Path;

use serde_json::Value;

use super::{truncate_excerpt, ActionKind, Difficulty, ParseOptions, StepRecord, TrajectoryRecord};
use crate::error::{Error, Result};

const VIEW_COMMANDS: &[&str] = &["cat", "head", "tail", "less", "more", "nl", "bat"];
const SEARCH_COMMANDS: &[&str] = &["grep", "egrep", "rg", "ag", "find", "ls", "tree", "fd"];

pub(super) fn parse(raw: &str, opts: &ParseOptions) -> Result<TrajectoryRecord> {
    let root: Value = serde_json::from_str(raw).map_err(|e| Error::MalformedRecord {
        line: e.line(),
        message: e.to_string(),
    })?;
    let entries = root
        .get("trajectory")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedRecord {
            line: 1,
            message: "missing `trajectory` array".into(),
        })?;
    if entries.is_empty() {
        return Err(Error::EmptyTrajectory);
    }

    let info = root.get("info").cloned().unwrap_or(Value::Null);
    let stem = opts
        .source_name
        .as_deref()
        .and_then(|s| Path::new(s).file_stem())
        .map(|s| s.to_string_lossy().into_owned());
    let str_field = |v: &Value, key: &str| v.get(key).and_then(Value::as_str).map(str::to_string);

    let trajectory_id = str_field(&root, "trajectory_id")
        .or_else(|| stem.clone())
        .ok_or_else(|| Error::MalformedRecord {
            line: 1,
            message: "no trajectory id and no source name to derive one from".into(),
        })?;
    let instance_id = str_field(&info, "instance_id")
        .or_else(|| str_field(&root, "instance_id"))
        .or_else(|| str_field(&root, "environment"))
        .or(stem)
        .unwrap_or_else(|| trajectory_id.clone());
    let model_name = str_field(&info, "model_name")
        .or_else(|| str_field(&root, "model_name"))
        .unwrap_or_else(|| "unknown".into());
    let plan_setting_name = str_field(&root, "plan_setting_name")
        .or_else(|| str_field(&info, "plan_setting_name"))
        .unwrap_or_else(|| "unknown".into());
    let difficulty = str_field(&info, "difficulty")
        .and_then(|d| d.parse().ok())
        .unwrap_or(Difficulty::Unknown);
    let resolved = info.get("resolved").and_then(Value::as_bool);

    let mut mapper = ActionMapper::default();
    let mut steps: Vec<StepRecord> = entries
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let observation = entry
                .get("observation")
                .and_then(Value::as_str)
                .unwrap_or_default();
            let (kind, target, command) = match entry.get("action") {
                Some(Value::String(action)) => {
                    let (kind, target) = mapper.map(action);
                    (kind, target, action.clone())
                }
                Some(other) => (ActionKind::Other, None, other.to_string()),
                None => (ActionKind::Other, None, String::new()),
            };
            StepRecord {
                index: i + 1,
                action_kind: kind,
                target_path: target,
                command_text: command,
                output_excerpt: truncate_excerpt(observation, opts.excerpt_budget),
                is_error: looks_like_error(observation),
            }
        })
        .collect();

    // Retried submissions: only a final submit keeps its kind.
    let last = steps.len();
    for step in &mut steps {
        if step.action_kind == ActionKind::Submit && step.index != last {
            step.action_kind = ActionKind::Other;
        }
    }

    Ok(TrajectoryRecord {
        trajectory_id,
        instance_id,
        model_name,
        plan_setting_name,
        difficulty,
        resolved,
        steps,
    })
}

fn looks_like_error(observation: &str) -> bool {
    let head = observation.trim_start();
    head.starts_with("Traceback")
        || head.starts_with("Error:")
        || head.starts_with("ERROR:")
        || head.contains("Your proposed edit has introduced new syntax error")
        || head.starts_with("No replacement was performed")
}

/// Maps one SWE-agent action string onto an action kind and target path.
/// Stateless convenience wrapper around the adapter's mapper.
pub fn map_action(action: &str) -> (ActionKind, Option<String>) {
    ActionMapper::default().map(action)
}

/// Tracks the open file (for `edit`, which acts on it) and the files the
/// agent has written (to tell create from edit for shell redirections).
#[derive(Default)]
struct ActionMapper {
    open_file: Option<String>,
    written: HashSet<String>,
}

impl ActionMapper {
    fn map(&mut self, action: &str) -> (ActionKind, Option<String>) {
        let first_line = action.lines().next().unwrap_or_default();
        let segment = last_segment(first_line);
        let tokens: Vec<&str> = segment.split_whitespace().collect();
        let Some(&head) = tokens.first() else {
            return (ActionKind::Message, None);
        };
        let arg = |i: usize| tokens.get(i).map(|s| unquote(s).to_string());

        match head {
            "open" => {
                self.open_file = arg(1);
                (ActionKind::FileView, arg(1))
            }
            "goto" | "scroll_up" | "scroll_down" => (ActionKind::FileView, self.open_file.clone()),
            "find_file" | "search_dir" => (ActionKind::FileSearch, arg(2)),
            "search_file" => (ActionKind::FileSearch, arg(2).or_else(|| self.open_file.clone())),
            "create" => {
                let path = arg(1);
                self.open_file = path.clone();
                self.note_written(&path);
                (ActionKind::FileCreate, path)
            }
            "edit" | "insert" => (ActionKind::FileEdit, self.open_file.clone()),
            "submit" => (ActionKind::Submit, None),
            "str_replace_editor" | "str_replace_based_edit_tool" | "edit_file" => {
                let path = arg(2);
                match tokens.get(1).copied() {
                    Some("view") => (ActionKind::FileView, path),
                    Some("create") => {
                        self.note_written(&path);
                        (ActionKind::FileCreate, path)
                    }
                    Some("str_replace") | Some("insert") | Some("undo_edit") => (ActionKind::FileEdit, path),
                    _ => (ActionKind::Other, path),
                }
            }
            "sed" if tokens.iter().any(|t| t.starts_with("-i")) => {
                (ActionKind::FileEdit, tokens.last().map(|t| unquote(t).to_string()))
            }
            _ => {
                if let Some(path) = redirect_target(segment) {
                    let kind = if self.written.contains(&path) {
                        ActionKind::FileEdit
                    } else {
                        ActionKind::FileCreate
                    };
                    self.written.insert(path.clone());
                    return (kind, Some(path));
                }
                if VIEW_COMMANDS.contains(&head) {
                    let path = tokens[1..]
                        .iter()
                        .rev()
                        .find(|t| !t.starts_with('-'))
                        .map(|t| unquote(t).to_string());
                    return (ActionKind::FileView, path);
                }
                if SEARCH_COMMANDS.contains(&head) || (head == "git" && tokens.get(1) == Some(&"grep")) {
                    return (ActionKind::FileSearch, None);
                }
                (ActionKind::ShellExec, None)
            }
        }
    }

    fn note_written(&mut self, path: &Option<String>) {
        if let Some(p) = path {
            self.written.insert(p.clone());
        }
    }
}

/// The last `&&`/`;`-separated command that is not a bare `cd`.
fn last_segment(line: &str) -> &str {
    line.split("&&")
        .flat_map(|s| s.split(';'))
        .map(str::trim)
        .filter(|s| !s.is_empty() && !s.starts_with("cd ") && *s != "cd")
        .last()
        .unwrap_or_else(|| line.trim())
}

/// Target of a `> file` or `tee file` write, for `cat`/`echo`/`printf`/`tee`.
fn redirect_target(segment: &str) -> Option<String> {
    let tokens: Vec<&str> = segment.split_whitespace().collect();
    let head = *tokens.first()?;
    if head == "tee" {
        return tokens[1..].iter().find(|t| !t.starts_with('-')).map(|t| unquote(t).to_string());
    }
    if !matches!(head, "cat" | "echo" | "printf") {
        return None;
    }
    for (i, tok) in tokens.iter().enumerate() {
        let rest = tok.trim_start_matches('>');
        if tok.starts_with('>') {
            if !rest.is_empty() {
                return Some(unquote(rest).to_string());
            }
            return tokens.get(i + 1).map(|t| unquote(t).to_string());
        }
    }
    None
}

fn unquote(s: &str) -> &str {
    s.trim_matches(|c| c == '"' || c == '\'')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_trajectory_with, LogFormat};

    #[test]
    fn maps_tool_calls() {
        assert_eq!(map_action("open src/nanops.py"), (ActionKind::FileView, Some("src/nanops.py".into())));
        assert_eq!(map_action("create reproduce.py").0, ActionKind::FileCreate);
        assert_eq!(
            map_action("str_replace_editor str_replace /testbed/a.py --old_str x --new_str y"),
            (ActionKind::FileEdit, Some("/testbed/a.py".into()))
        );
        assert_eq!(map_action("str_replace_editor view /testbed").0, ActionKind::FileView);
        assert_eq!(map_action("cd /testbed && python reproduce.py").0, ActionKind::ShellExec);
        assert_eq!(map_action("grep -rn foo .").0, ActionKind::FileSearch);
        assert_eq!(map_action("cat setup.py"), (ActionKind::FileView, Some("setup.py".into())));
        assert_eq!(
            map_action("cat > reproduce.py << 'EOF'\nprint(1)\nEOF"),
            (ActionKind::FileCreate, Some("reproduce.py".into()))
        );
        assert_eq!(map_action("submit").0, ActionKind::Submit);
        assert_eq!(map_action("   ").0, ActionKind::Message);
    }

    #[test]
    fn edit_applies_to_open_file() {
        let mut m = ActionMapper::default();
        m.map("open pkg/core.py");
        assert_eq!(m.map("edit 10:12\nreturn x\nend_of_edit"), (ActionKind::FileEdit, Some("pkg/core.py".into())));
    }

    #[test]
    fn parses_traj_dump() {
        let raw = r#"{
            "trajectory": [
                {"action": "find_file nanops.py", "observation": "Found 1 match", "thought": ""},
                {"action": "create reproduce.py", "observation": "[File: reproduce.py]", "thought": ""},
                {"action": "submit", "observation": "Traceback (most recent call last)", "thought": ""},
                {"action": {"tool": "weird"}, "observation": "", "thought": ""},
                {"action": "submit", "observation": "diff --git", "thought": ""}
            ],
            "info": {"exit_status": "submitted", "instance_id": "pandas-dev__pandas-1", "resolved": true}
        }"#;
        let opts = ParseOptions {
            format: LogFormat::SweAgent,
            source_name: Some("runs/pandas-dev__pandas-1.traj".into()),
            ..Default::default()
        };
        let rec = parse_trajectory_with(raw, &opts).unwrap();
        assert_eq!(rec.trajectory_id, "pandas-dev__pandas-1");
        assert_eq!(rec.resolved, Some(true));
        assert_eq!(rec.steps.len(), 5);
        assert_eq!(rec.steps[2].action_kind, ActionKind::Other);
        assert!(rec.steps[2].is_error);
        assert_eq!(rec.steps[3].action_kind, ActionKind::Other);
        assert_eq!(rec.steps[4].action_kind, ActionKind::Submit);
    }

    #[test]
    fn empty_dump_is_rejected() {
        let opts = ParseOptions {
            format: LogFormat::SweAgent,
            source_name: Some("x.traj".into()),
            ..Default::default()
        };
        assert!(matches!(
            parse_trajectory_with(r#"{"trajectory": []}"#, &opts),
            Err(Error::EmptyTrajectory)
        ));
        assert!(matches!(
            parse_trajectory_with("{", &opts),
            Err(Error::MalformedRecord { .. })
        ));
    }
}
