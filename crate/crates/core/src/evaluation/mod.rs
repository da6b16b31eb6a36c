//! Ten-level interpolated precision, fixed-cutoff recall and precision,
//! baseline comparisons, and the confidence by threshold battery.

pub mod battery;
pub mod metrics;
pub mod report;

pub use battery::{run_battery, Battery, BatteryConfig, Cell, CellOutput, DEFAULT_THRESHOLDS};
pub use metrics::{fixed_k_metrics, interpolated_precision, QrelSet, RECALL_LEVELS};
pub use report::{pct_change, report, report_header, summarize, Changes, EvalReport, Summary};
