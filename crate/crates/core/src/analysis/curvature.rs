//! Total backward curvature, its greedy-prefix variant, and the greedy
//! approximation audit.

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::enumerate::{apply_unchecked, walk, WalkOptions};
use super::grid::GridSpec;
use crate::error::{BpeError, Result};
use crate::exact::{train_exact_on, ExactOptions};
use crate::greedy::{train_greedy_slow_with, TrainOptions};
use crate::merge::{MergeId, MergeTable};

/// `(1/σ)(1 − e^{−σ})`.
pub fn bound_from_sigma(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(BpeError::Domain(format!("curvature must be positive and finite, got {sigma}")));
    }
    Ok((1.0 - (-sigma).exp()) / sigma)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureWitness {
    pub x: String,
    pub merge_count: usize,
    pub prefix: Vec<String>,
    pub optimum: Vec<String>,
    pub value: f64,
}

/// Everything measured on one `(x, M)` instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceReport {
    pub x: String,
    pub merge_count: usize,
    pub greedy_utility: usize,
    pub optimal_utility: usize,
    /// Optimal sequences used (DFS order, capped).
    pub optima: usize,
    /// More optima may exist beyond the cap.
    pub optima_capped: bool,
    /// `None` when no prefix has positive utility.
    pub sigma: Option<f64>,
    /// `None` when the greedy prefix of length `M − 1` has zero utility.
    pub sigma_prime: Option<f64>,
    pub sigma_witness: Option<CurvatureWitness>,
    pub sigma_prime_witness: Option<CurvatureWitness>,
}

impl InstanceReport {
    /// `κ(greedy)/κ(optimal)`, `None` when the optimum is 0.
    pub fn ratio(&self) -> Option<f64> {
        (self.optimal_utility > 0).then(|| self.greedy_utility as f64 / self.optimal_utility as f64)
    }
}

fn render(table: &MergeTable, seq: &[MergeId]) -> Vec<String> {
    seq.iter().map(|&m| table.render(m)).collect()
}

/// Reports for `x` at every merge count `1..=max_merges`.
pub fn instance_reports(x: &str, max_merges: usize, max_optima: usize) -> Result<Vec<InstanceReport>> {
    let mut table = MergeTable::from_text(x);
    let root = table.lift(x)?;
    let n = root.len();

    // Distinct streams reachable with at most max_merges merges, each with
    // its shortest witness.
    let mut prefixes: FxHashMap<Vec<MergeId>, Vec<MergeId>> = FxHashMap::default();
    walk(
        &mut table,
        root.tokens().to_vec(),
        &[],
        WalkOptions { max_depth: max_merges, canonical: true },
        &mut |_, path| {
            let tokens = path.tokens();
            if tokens.len() < n {
                prefixes
                    .entry(tokens.to_vec())
                    .and_modify(|s| {
                        if path.seq.len() < s.len() {
                            *s = path.seq.to_vec();
                        }
                    })
                    .or_insert_with(|| path.seq.to_vec());
            }
        },
    )?;
    let mut prefixes: Vec<(Vec<MergeId>, Vec<MergeId>)> = prefixes.into_iter().collect();
    prefixes.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.1.cmp(&b.1)));

    let mut reports = Vec::with_capacity(max_merges);
    for m in 1..=max_merges {
        let opts = ExactOptions::new(m).brute().max_optima(max_optima + 1);
        let exact = train_exact_on(table, x, opts)?;
        table = exact.table;
        let optima_capped = exact.optima.len() > max_optima;
        let optima: Vec<Vec<MergeId>> =
            exact.optima.iter().take(max_optima).map(|s| s.items().to_vec()).collect();
        let opt_utility = exact.best_utility;

        let greedy = train_greedy_slow_with(table, x, TrainOptions::new(m))?;
        let greedy_utility = greedy.utility();
        table = greedy.table;

        let mut sigma: Option<(f64, CurvatureWitness)> = None;
        if opt_utility > 0 {
            for (stream, pseq) in prefixes.iter().filter(|(_, s)| s.len() <= m) {
                let kp = n - stream.len();
                for s in &optima {
                    let kps = n - apply_unchecked(&table, stream, s).len();
                    let value = 1.0 - (kps as f64 - opt_utility as f64) / kp as f64;
                    if sigma.as_ref().map_or(true, |(best, _)| value > *best) {
                        sigma = Some((value, CurvatureWitness {
                            x: x.to_string(),
                            merge_count: m,
                            prefix: render(&table, pseq),
                            optimum: render(&table, s),
                            value,
                        }));
                    }
                }
            }
        }

        let mut sigma_prime: Option<(f64, CurvatureWitness)> = None;
        let prefix_seq = &greedy.sequence.items()[..greedy.sequence.len().min(m - 1)];
        let prefix_stream = apply_unchecked(&table, root.tokens(), prefix_seq);
        let kp = n - prefix_stream.len();
        if kp > 0 && opt_utility > 0 {
            for s in &optima {
                let kps = n - apply_unchecked(&table, &prefix_stream, s).len();
                let value = 1.0 - (kps as f64 - opt_utility as f64) / kp as f64;
                if sigma_prime.as_ref().map_or(true, |(best, _)| value > *best) {
                    sigma_prime = Some((value, CurvatureWitness {
                        x: x.to_string(),
                        merge_count: m,
                        prefix: render(&table, prefix_seq),
                        optimum: render(&table, s),
                        value,
                    }));
                }
            }
        }

        reports.push(InstanceReport {
            x: x.to_string(),
            merge_count: m,
            greedy_utility,
            optimal_utility: opt_utility,
            optima: optima.len(),
            optima_capped,
            sigma: sigma.as_ref().map(|s| s.0),
            sigma_prime: sigma_prime.as_ref().map(|s| s.0),
            sigma_witness: sigma.map(|s| s.1),
            sigma_prime_witness: sigma_prime.map(|s| s.1),
        });
    }
    Ok(reports)
}

/// σ′ of one instance: curvature measured only against the greedy prefix of
/// length `M − 1`. `None` when that prefix has zero utility.
pub fn estimate_sigma_prime(x: &str, merge_count: usize) -> Result<Option<f64>> {
    if merge_count == 0 {
        return Ok(None);
    }
    let reports = instance_reports(x, merge_count, super::grid::DEFAULT_MAX_OPTIMA)?;
    Ok(reports.last().and_then(|r| r.sigma_prime))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub grid: GridSpec,
    pub strings: usize,
    pub instances: usize,
    /// Largest σ over the grid; `None` if no instance had one.
    pub sigma: Option<f64>,
    pub sigma_prime: Option<f64>,
    pub bound: Option<f64>,
    pub bound_prime: Option<f64>,
    pub witness: Option<CurvatureWitness>,
    pub witness_prime: Option<CurvatureWitness>,
    /// Instances whose optima were cut off by the cap.
    pub capped_instances: usize,
    /// The grid was cut short by its string budget.
    pub lower_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub x: String,
    pub merge_count: usize,
    pub greedy_utility: usize,
    pub optimal_utility: usize,
    pub ratio: f64,
    pub instance_sigma: f64,
    pub instance_bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridAudit {
    pub curvature: CurvatureReport,
    pub ratios: Vec<RatioRow>,
}

impl GridAudit {
    pub fn failures(&self) -> impl Iterator<Item = &RatioRow> {
        self.ratios.iter().filter(|r| !r.ok)
    }

    pub fn min_ratio(&self) -> Option<&RatioRow> {
        self.ratios.iter().min_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }
}

/// Runs every instance of the grid once and aggregates σ, σ′ and the
/// per-instance ratio check.
pub fn audit_grid(grid: &GridSpec) -> Result<GridAudit> {
    let strings = grid.strings();
    let limit = grid.max_strings.unwrap_or(usize::MAX);
    let lower_bound = strings.len() > limit;
    let mut curvature = CurvatureReport {
        grid: grid.clone(),
        strings: 0,
        instances: 0,
        sigma: None,
        sigma_prime: None,
        bound: None,
        bound_prime: None,
        witness: None,
        witness_prime: None,
        capped_instances: 0,
        lower_bound,
    };
    let mut ratios = Vec::new();
    for x in strings.iter().take(limit) {
        curvature.strings += 1;
        for r in instance_reports(x, grid.max_merges, grid.max_optima)? {
            curvature.instances += 1;
            curvature.capped_instances += r.optima_capped as usize;
            if let Some(w) = r.sigma_witness.clone() {
                if curvature.sigma.map_or(true, |s| w.value > s) {
                    curvature.sigma = Some(w.value);
                    curvature.witness = Some(w);
                }
            }
            if let Some(w) = r.sigma_prime_witness.clone() {
                if curvature.sigma_prime.map_or(true, |s| w.value > s) {
                    curvature.sigma_prime = Some(w.value);
                    curvature.witness_prime = Some(w);
                }
            }
            if let (Some(ratio), Some(sigma)) = (r.ratio(), r.sigma) {
                let instance_bound = bound_from_sigma(sigma)?;
                ratios.push(RatioRow {
                    x: r.x.clone(),
                    merge_count: r.merge_count,
                    greedy_utility: r.greedy_utility,
                    optimal_utility: r.optimal_utility,
                    ratio,
                    instance_sigma: sigma,
                    instance_bound,
                    ok: ratio >= instance_bound,
                });
            }
        }
    }
    curvature.bound = curvature.sigma.map(bound_from_sigma).transpose()?;
    curvature.bound_prime = curvature.sigma_prime.map(bound_from_sigma).transpose()?;
    Ok(GridAudit { curvature, ratios })
}

/// σ over a grid with its witness.
pub fn estimate_sigma(grid: &GridSpec) -> Result<CurvatureReport> {
    Ok(audit_grid(grid)?.curvature)
}

/// Per-instance greedy/optimal ratios against the instance-wise bound.
pub fn greedy_ratio_audit(grid: &GridSpec) -> Result<Vec<RatioRow>> {
    Ok(audit_grid(grid)?.ratios)
}
