use std::io::Write;

use crate::corpus::smart::DocId;
use crate::error::{Error, Result};
use crate::evaluation::metrics::{fixed_k_metrics, interpolated_precision, QrelSet, RECALL_LEVELS};
use crate::retrieval::RankedRun;

/// Effectiveness of one run averaged over the judged queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub query_ids: Vec<DocId>,
    /// Mean interpolated precision per recall level.
    pub levels: [f64; 10],
    /// Mean of the ten level means.
    pub average: f64,
    pub recall_at_k: f64,
    pub precision_at_k: f64,
    pub k: usize,
}

impl Summary {
    /// Summary from already-averaged figures.
    pub fn from_levels(levels: [f64; 10], recall_at_k: f64, precision_at_k: f64, k: usize) -> Self {
        Summary {
            query_ids: Vec::new(),
            levels,
            average: levels.iter().sum::<f64>() / 10.0,
            recall_at_k,
            precision_at_k,
            k,
        }
    }
}

/// Evaluate a full ranking. Every query with judgments is evaluated (a
/// query absent from the run scores zero); run queries without judgments are
/// skipped.
pub fn summarize(run: &RankedRun, qrels: &QrelSet, k: usize) -> Result<Summary> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    for q in run.query_ids() {
        if qrels.get(q).is_none() {
            log::warn!("query {q} has no relevance judgments; skipped");
        }
    }
    let query_ids = qrels.query_ids();
    if query_ids.is_empty() {
        return Err(Error::InvalidArgument("no query has relevance judgments".into()));
    }
    let mut levels = [0.0; 10];
    let (mut recall, mut precision) = (0.0, 0.0);
    for &q in &query_ids {
        let relevant = qrels.get(q).expect("judged query");
        let ranking = run.get(q);
        let per_query = interpolated_precision(ranking, relevant)?;
        for (sum, v) in levels.iter_mut().zip(per_query) {
            *sum += v;
        }
        let (r, p) = fixed_k_metrics(&ranking[..ranking.len().min(k)], relevant);
        recall += r;
        precision += p;
    }
    let nq = query_ids.len() as f64;
    for v in &mut levels {
        *v /= nq;
    }
    let mut summary = Summary::from_levels(levels, recall / nq, precision / nq, k);
    summary.query_ids = query_ids;
    Ok(summary)
}

/// Percent change from `base` to `exp`; undefined when `base` is 0.
pub fn pct_change(base: f64, exp: f64) -> Option<f64> {
    (base > 0.0).then(|| 100.0 * (exp - base) / base)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Changes {
    pub levels: [Option<f64>; 10],
    /// Mean of the ten per-level changes.
    pub average: Option<f64>,
    pub recall_at_k: Option<f64>,
    pub precision_at_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub experiment: Summary,
    pub baseline: Option<Summary>,
    pub changes: Option<Changes>,
}

impl EvalReport {
    pub fn single(experiment: Summary) -> Self {
        EvalReport {
            experiment,
            baseline: None,
            changes: None,
        }
    }

    /// Compare against a baseline evaluated on the same queries. The
    /// Average change is the mean of the per-level changes, not the change
    /// of the averages.
    pub fn compare(experiment: Summary, baseline: Summary) -> Result<Self> {
        if experiment.query_ids != baseline.query_ids {
            return Err(Error::Mismatch(format!(
                "baseline evaluates {} queries, experiment {}; query ids differ",
                baseline.query_ids.len(),
                experiment.query_ids.len()
            )));
        }
        if experiment.k != baseline.k {
            return Err(Error::Mismatch(format!(
                "baseline uses k={}, experiment k={}",
                baseline.k, experiment.k
            )));
        }
        let mut levels = [None; 10];
        for (l, slot) in levels.iter_mut().enumerate() {
            *slot = pct_change(baseline.levels[l], experiment.levels[l]);
        }
        let average = levels
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.iter().sum::<f64>() / 10.0);
        let changes = Changes {
            levels,
            average,
            recall_at_k: pct_change(baseline.recall_at_k, experiment.recall_at_k),
            precision_at_k: pct_change(baseline.precision_at_k, experiment.precision_at_k),
        };
        Ok(EvalReport {
            experiment,
            baseline: Some(baseline),
            changes: Some(changes),
        })
    }

    /// Informal significance label for the Average change: 5% is
    /// significant, 10% very significant.
    pub fn significance(&self) -> Option<&'static str> {
        let change = self.changes.as_ref()?.average?;
        Some(match change.abs() {
            c if c >= 10.0 => "very significant",
            c if c >= 5.0 => "significant",
            _ => "not significant",
        })
    }

    /// Tab-separated table: one row per recall level, then Average, Recall
    /// and Precision rows (the last two at the fixed cutoff `k`).
    pub fn write_tsv<W: Write>(&self, header: &str, mut out: W) -> Result<()> {
        let e = &self.experiment;
        writeln!(out, "# {header} k={} queries={}", e.k, e.query_ids.len())?;
        match (&self.baseline, &self.changes) {
            (Some(b), Some(c)) => {
                writeln!(out, "level\tbaseline\texperiment\tpct_change")?;
                for l in 0..10 {
                    writeln!(
                        out,
                        "{}\t{:.4}\t{:.4}\t{}",
                        RECALL_LEVELS[l],
                        b.levels[l],
                        e.levels[l],
                        fmt_change(c.levels[l])
                    )?;
                }
                writeln!(out, "Average\t{:.4}\t{:.4}\t{}", b.average, e.average, fmt_change(c.average))?;
                writeln!(
                    out,
                    "Recall\t{:.4}\t{:.4}\t{}",
                    b.recall_at_k,
                    e.recall_at_k,
                    fmt_change(c.recall_at_k)
                )?;
                writeln!(
                    out,
                    "Precision\t{:.4}\t{:.4}\t{}",
                    b.precision_at_k,
                    e.precision_at_k,
                    fmt_change(c.precision_at_k)
                )?;
                if let Some(label) = self.significance() {
                    writeln!(out, "# average change: {label}")?;
                }
            }
            _ => {
                writeln!(out, "level\tprecision")?;
                for l in 0..10 {
                    writeln!(out, "{}\t{:.4}", RECALL_LEVELS[l], e.levels[l])?;
                }
                writeln!(out, "Average\t{:.4}", e.average)?;
                writeln!(out, "Recall\t{:.4}", e.recall_at_k)?;
                writeln!(out, "Precision\t{:.4}", e.precision_at_k)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Recall-precision curve as whitespace-separated columns for plotting.
    pub fn write_curve<W: Write>(&self, mut out: W) -> Result<()> {
        match &self.baseline {
            Some(b) => {
                writeln!(out, "# recall baseline experiment")?;
                for l in 0..10 {
                    writeln!(out, "{} {:.6} {:.6}", RECALL_LEVELS[l], b.levels[l], self.experiment.levels[l])?;
                }
            }
            None => {
                writeln!(out, "# recall precision")?;
                for l in 0..10 {
                    writeln!(out, "{} {:.6}", RECALL_LEVELS[l], self.experiment.levels[l])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn fmt_change(change: Option<f64>) -> String {
    change.map_or_else(|| "n/a".to_string(), |c| format!("{c:.2}"))
}

/// Header comment for report files.
pub fn report_header() -> String {
    crate::provenance("eval")
}

/// Evaluate `run` and, when given, compare it with `baseline`.
pub fn report(run: &RankedRun, qrels: &QrelSet, baseline: Option<&RankedRun>, k: usize) -> Result<EvalReport> {
    let experiment = summarize(run, qrels, k)?;
    match baseline {
        Some(b) => EvalReport::compare(experiment, summarize(b, qrels, k)?),
        None => Ok(EvalReport::single(experiment)),
    }
}
