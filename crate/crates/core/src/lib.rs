//! Plan-compliance analytics for programming-agent trajectories.
//!
//! Trajectories are ingested into [`TrajectoryRecord`]s, classified into
//! phase letters, abstracted as a [`Langutory`] and a graph, and scored
//! against a [`PlanSpec`]. Phase flows, prompt variants and the statistical
//! comparisons used to analyse the scores live alongside.

pub mod classify;
pub mod compliance;
pub mod error;
pub mod flow;
pub mod graphectory;
pub mod ingest;
pub mod langutory;
pub mod phase;
pub mod plan;
pub mod report;
pub mod scores;
pub mod stats;
pub mod variants;

pub use classify::{Classifier, ClassifierConfig};
pub use compliance::{score_langutory, score_trajectory, ComplianceScores};
pub use error::{Error, Result};
pub use flow::{build_flow, FlowTable};
pub use graphectory::{build_graphectory, graphectory_stats, GraphectoryGraph, GraphectoryStats};
pub use ingest::{load_corpus, parse_trajectory, ActionKind, Corpus, Difficulty, LogFormat, StepRecord, TrajectoryRecord};
pub use langutory::{build_langutory, Langutory};
pub use phase::PhaseLetter;
pub use plan::{PlanChoice, PlanSpec, SettingName};
pub use scores::{score_corpus, ScoreRecord};
