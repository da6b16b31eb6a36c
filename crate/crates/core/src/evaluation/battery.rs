use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::corpus::CorpusIndex;
use crate::error::{Error, Result};
use crate::evaluation::metrics::QrelSet;
use crate::evaluation::report::{report_header, summarize, EvalReport, Summary};
use crate::expansion::{expand_queries, query_file_header, write_query_file, ExpansionStats, QueryVector};
use crate::learner::{learn, BayesNet, Confidence, LearnOptions, DEFAULT_MAX_PARENTS};
use crate::retrieval::{run_header, search_all, RankedRun, DEFAULT_K};

pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub confidences: Vec<Confidence>,
    pub thresholds: Vec<f64>,
    /// Cutoff for the fixed-k metrics.
    pub k: usize,
    pub max_parents: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            confidences: Confidence::ALL.to_vec(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            k: DEFAULT_K,
            max_parents: DEFAULT_MAX_PARENTS,
        }
    }
}

impl BatteryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.confidences.is_empty() || self.thresholds.is_empty() {
            return Err(Error::InvalidArgument("battery needs at least one confidence and one threshold".into()));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidArgument(format!("threshold {t} is not in (0, 1)")));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CellOutput {
    pub queries: Vec<QueryVector>,
    pub stats: ExpansionStats,
    pub run: RankedRun,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub confidence: Confidence,
    pub threshold: f64,
    /// Error message when the cell failed.
    pub outcome: std::result::Result<CellOutput, String>,
}

impl Cell {
    pub fn average_precision(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|o| o.report.experiment.average)
    }

    pub fn average_change(&self) -> Option<f64> {
        self.outcome.as_ref().ok().and_then(|o| o.report.changes.as_ref()?.average)
    }
}

#[derive(Debug, Clone)]
pub struct Battery {
    pub config: BatteryConfig,
    pub baseline_run: RankedRun,
    pub baseline: Summary,
    /// One network per confidence, in configuration order.
    pub networks: Vec<(Confidence, std::result::Result<BayesNet, String>)>,
    /// Row-major: confidences outer, thresholds inner.
    pub cells: Vec<Cell>,
}

/// Learn one network per confidence, expand at every threshold, retrieve and
/// evaluate each cell against the unexpanded baseline. Cell failures are
/// recorded, not propagated.
pub fn run_battery(
    index: &CorpusIndex,
    queries: &[QueryVector],
    qrels: &QrelSet,
    config: &BatteryConfig,
) -> Result<Battery> {
    config.validate()?;
    let depth = index.inverted.n_docs() as usize;
    let baseline_run = search_all(index, queries, depth);
    let baseline = summarize(&baseline_run, qrels, config.k)?;
    log::info!("baseline average precision {:.4}", baseline.average);

    let networks: Vec<(Confidence, std::result::Result<BayesNet, String>)> = config
        .confidences
        .par_iter()
        .map(|&c| {
            let mut options = LearnOptions::new(c);
            options.max_parents = config.max_parents;
            let net = learn(index, options).map_err(|e| e.to_string());
            if let Err(e) = &net {
                log::error!("learning at confidence {c} failed: {e}");
            }
            (c, net)
        })
        .collect();

    let jobs: Vec<(usize, f64)> = (0..networks.len())
        .flat_map(|i| config.thresholds.iter().map(move |&t| (i, t)))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(i, threshold)| {
            let (confidence, net) = &networks[i];
            let outcome = match net {
                Ok(net) => run_cell(index, queries, qrels, net, threshold, &baseline, depth, config.k)
                    .map_err(|e| e.to_string()),
                Err(e) => Err(format!("no network: {e}")),
            };
            if let Err(e) = &outcome {
                log::error!("cell confidence={confidence} threshold={threshold} failed: {e}");
            }
            Cell {
                confidence: *confidence,
                threshold,
                outcome,
            }
        })
        .collect();

    Ok(Battery {
        config: config.clone(),
        baseline_run,
        baseline,
        networks,
        cells,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    index: &CorpusIndex,
    queries: &[QueryVector],
    qrels: &QrelSet,
    net: &BayesNet,
    threshold: f64,
    baseline: &Summary,
    depth: usize,
    k: usize,
) -> Result<CellOutput> {
    let (expanded, stats) = expand_queries(queries, net, threshold)?;
    let run = search_all(index, &expanded, depth);
    let report = EvalReport::compare(summarize(&run, qrels, k)?, baseline.clone())?;
    Ok(CellOutput {
        queries: expanded,
        stats,
        run,
        report,
    })
}

impl Battery {
    /// Successful cell with the highest average precision; ties go to the
    /// earlier cell.
    pub fn best_cell(&self) -> Option<&Cell> {
        self.cells
            .iter()
            .filter(|c| c.outcome.is_ok())
            .fold(None, |best: Option<&Cell>, c| match best {
                Some(b) if b.average_precision() >= c.average_precision() => Some(b),
                _ => Some(c),
            })
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    /// Cells whose average precision beats the baseline.
    pub fn improved_cells(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.average_precision().is_some_and(|p| p > self.baseline.average))
            .count()
    }

    /// `confidence threshold avg_precision avg_pct_change mean_added` rows.
    pub fn write_summary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", crate::provenance(&format!("battery k={}", self.config.k)))?;
        writeln!(
            out,
            "# baseline avg_precision {:.4} queries {}",
            self.baseline.average,
            self.baseline.query_ids.len()
        )?;
        writeln!(out, "confidence\tthreshold\tavg_precision\tavg_pct_change\tmean_added")?;
        for cell in &self.cells {
            match &cell.outcome {
                Ok(o) => writeln!(
                    out,
                    "{}\t{}\t{:.4}\t{}\t{:.2}",
                    cell.confidence,
                    cell.threshold,
                    o.report.experiment.average,
                    cell.average_change().map_or_else(|| "n/a".to_string(), |c| format!("{c:.2}")),
                    o.stats.mean_added()
                )?,
                Err(_) => writeln!(out, "{}\t{}\tfailed\tfailed\tfailed", cell.confidence, cell.threshold)?,
            }
        }
        if let Some(best) = self.best_cell() {
            writeln!(out, "# best confidence {} threshold {}", best.confidence, best.threshold)?;
        }
        writeln!(
            out,
            "# improved {} of {} cells, {} failed",
            self.improved_cells(),
            self.cells.len(),
            self.failed_cells()
        )?;
        out.flush()?;
        Ok(())
    }

    /// Write every artifact into `dir`, using the same formats and headers as
    /// the individual pipeline commands.
    pub fn write_dir(&self, index: &CorpusIndex, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_file(&dir.join("index.idx"), |w| index.write(w))?;
        write_file(&dir.join("baseline.run"), |w| self.baseline_run.write(&run_header(), w))?;
        for (c, net) in &self.networks {
            if let Ok(net) = net {
                write_file(&dir.join(format!("net_c{c}.net")), |w| net.write(w))?;
            }
        }
        for cell in &self.cells {
            let Ok(o) = &cell.outcome else { continue };
            let tag = format!("c{}_t{}", cell.confidence, cell.threshold);
            let header = query_file_header(Some(cell.confidence), cell.threshold);
            write_file(&dir.join(format!("queries_{tag}.exp")), |w| write_query_file(&o.queries, &header, w))?;
            write_file(&dir.join(format!("run_{tag}.run")), |w| o.run.write(&run_header(), w))?;
            write_file(&dir.join(format!("report_{tag}.tsv")), |w| o.report.write_tsv(&report_header(), w))?;
            write_file(&dir.join(format!("pr_{tag}.dat")), |w| o.report.write_curve(w))?;
        }
        write_file(&dir.join("summary.tsv"), |w| self.write_summary(w))
    }
}

/// Create `path` and fill it through a buffered writer; errors name the
/// file.
pub fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let result = File::create(path).map_err(Error::from).and_then(|f| {
        let mut w = BufWriter::new(f);
        fill(&mut w)?;
        w.flush()?;
        Ok(())
    });
    result.map_err(|e| e.in_file(PathBuf::from(path)))
}
