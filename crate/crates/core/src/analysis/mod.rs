//! Quantitative analysis of trial logs: accuracies, classification reports,
//! group breakdowns, response times, gaze entropy and gaze maps, and the
//! paired t-test and two-way ANOVA used to compare conditions.

mod gaze;
mod metrics;
mod report;
mod stats;

pub use gaze::{gaze_entropy, gaze_histogram, gaze_map, scott_bandwidth, shannon_bits, EntropyGrid, GazeMap, DEFAULT_GRID};
pub use metrics::{
    accuracy_all, accuracy_true, breakdown, classification_report, report_from_counts, AverageMetrics, BreakdownKey,
    ClassMetrics, ClassificationReport, ConfusionCounts, FpMapping, GroupRow, OutcomeCounts,
};
pub use report::{analyze, condition_gaze_map, AnalysisReport, ConditionSummary, ReportOptions, SessionSummary};
pub use stats::{format_p, paired_t, sample_sd, sem, trial_time_stats, two_way_anova, AnovaEffect, AnovaTable, TTest, TrialTimeStats};
