//! Seeded experiment drivers: the mixing-time scaling study, degree and
//! self-loop concentration studies, and the regime feasibility table.
//!
//! Every driver is a pure function of its arguments. Randomness is fanned
//! out through per-item sub-streams of the experiment seed and collected in
//! item order, so worker count never changes a result.

use nsis_core::coupling::tmix_upper_estimate;
use nsis_core::dynamics::{check_regime, theorem_bounds, Params};
use nsis_core::graph::VertexId;
use nsis_core::random::{count_self_loops, gen_erdos_renyi, gen_regular_multigraph};
use nsis_core::seeding::sub_seed;
use nsis_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::fit::{fit_nlogn, FitResult};
use crate::report::{fmt_f64, Table};

/// Sub-stream blocks of the experiment seed: graph draws for grid entry `i`
/// use stream `i`, its coalescence replicas use stream `TMIX_STREAM_BASE + i`.
const TMIX_STREAM_BASE: u64 = 1 << 32;

/// Step budget per size: this multiple of the closed-form mixing upper
/// bound (with a floor for tiny instances) before a size is declared timed
/// out and reported as an error row.
const STEP_BUDGET_FACTOR: f64 = 32.0;
const STEP_BUDGET_FLOOR: u64 = 1 << 16;

fn cell_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn cell_opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cell_opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Scaling study
// ---------------------------------------------------------------------------

/// One size of the scaling study. When this size fails (invalid recipe,
/// regime violation, generation failure, or coalescence timeout) the
/// estimate fields stay empty, `error` is set, and the remaining sizes
/// still run.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub a: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    /// Mixing estimate: smallest t with coalescence survival + 3·stderr ≤ ε.
    pub t_hat: Option<u64>,
    /// Lower edge of the estimate's confidence band.
    pub t_lo: Option<u64>,
    pub survival_at_t_hat: Option<f64>,
    pub stderr_at_t_hat: Option<f64>,
    /// Closed-form bounds (n/γ)(ln n + ln(1/ε)) and (n/2β)(ln n + ln(γε/4)).
    pub theorem_upper: Option<f64>,
    pub theorem_lower: Option<f64>,
    /// Whether the lower bound is ≤ 0 and therefore carries no information.
    pub lower_vacuous: Option<bool>,
    pub error: Option<String>,
}

impl ScalingRow {
    fn empty(n: usize) -> Self {
        ScalingRow {
            n,
            a: None,
            lambda: None,
            kappa: None,
            gamma: None,
            beta: None,
            t_hat: None,
            t_lo: None,
            survival_at_t_hat: None,
            stderr_at_t_hat: None,
            theorem_upper: None,
            theorem_lower: None,
            lower_vacuous: None,
            error: None,
        }
    }

    fn with_error(mut self, msg: impl Into<String>) -> Self {
        self.error = Some(msg.into());
        self
    }
}

/// Result of the scaling study: per-size rows plus the `n·ln n` fit over
/// the sizes that produced an estimate.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub config: ExperimentConfig,
    /// The parameter rule, verbatim; per-size values are in the rows.
    pub param_provenance: String,
    pub rows: Vec<ScalingRow>,
    /// `None` when no size produced an estimate.
    pub fit: Option<FitResult>,
}

fn scaling_row(cfg: &ExperimentConfig, idx: usize, n: usize) -> ScalingRow {
    let mut row = ScalingRow::empty(n);

    let params = match cfg.params.resolve(n, &cfg.family) {
        Ok(p) => p,
        Err(e) => return row.with_error(e.to_string()),
    };
    row.a = Some(params.a());
    row.lambda = Some(params.lambda());
    row.kappa = Some(params.kappa());

    let graph = match cfg.family.realize(n, sub_seed(cfg.seed, idx as u64)) {
        Ok(g) => g,
        Err(e) => return row.with_error(e.to_string()),
    };

    let regime = match check_regime(&params, n, graph.max_degree(), None) {
        Ok(r) => r,
        Err(e) => return row.with_error(e.to_string()),
    };
    row.gamma = Some(regime.gamma);
    row.beta = Some(regime.beta);
    if !(regime.p_star_ok && regime.regime_upper) {
        return row.with_error(format!(
            "strong-noise regime violated at n = {n}: kappa = {}, a = {}, p* = {} \
             (need 0 < kappa < 1/(4(n-1)), a > 1 - kappa > 1/2, p* < 1)",
            params.kappa(),
            params.a(),
            regime.p_star
        ));
    }

    let bounds = match theorem_bounds(&graph, &params, cfg.epsilon) {
        Ok(b) => b,
        Err(e) => return row.with_error(e.to_string()),
    };
    row.theorem_upper = Some(bounds.upper);
    row.theorem_lower = Some(bounds.lower);
    row.lower_vacuous = Some(bounds.lower_vacuous);

    let budget = ((bounds.upper * STEP_BUDGET_FACTOR).ceil() as u64).max(STEP_BUDGET_FLOOR);
    match tmix_upper_estimate(
        &graph,
        &params,
        cfg.coupling,
        cfg.epsilon,
        cfg.replicas,
        sub_seed(cfg.seed, TMIX_STREAM_BASE + idx as u64),
        budget,
    ) {
        Ok(est) => {
            row.t_hat = Some(est.t_hat);
            row.t_lo = Some(est.t_lo);
            row.survival_at_t_hat = Some(est.survival_at_t_hat);
            row.stderr_at_t_hat = Some(est.stderr_at_t_hat);
        }
        Err(e) => return row.with_error(e.to_string()),
    }
    row
}

/// Runs the scaling study: one coalescence-based mixing estimate per grid
/// size, the closed-form bounds next to it, and a `t ≈ c·n ln n` fit over
/// the successful sizes.
///
/// Per-size failures (regime violations, timeouts) become error rows and
/// the study continues; only a structurally invalid configuration errors.
pub fn scaling_experiment(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    let rows: Vec<ScalingRow> = cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(idx, &n)| scaling_row(cfg, idx, n))
        .collect();

    let points: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|r| r.t_hat.map(|t| (r.n, t as f64)))
        .collect();
    let fit = if points.is_empty() { None } else { Some(fit_nlogn(&points)?) };

    Ok(ScalingReport {
        config: cfg.clone(),
        param_provenance: cfg.params.describe(&cfg.family),
        rows,
        fit,
    })
}

/// Renders the scaling report as a provenance-stamped CSV table.
pub fn scaling_csv(report: &ScalingReport) -> Table {
    let mut t = Table::new(vec![
        "n",
        "a",
        "lambda",
        "kappa",
        "gamma",
        "beta",
        "t_hat",
        "t_lo",
        "survival_at_t_hat",
        "stderr_at_t_hat",
        "theorem_upper",
        "theorem_lower",
        "lower_vacuous",
        "error",
    ]);
    t.comment("command", "scaling");
    t.comment("family", report.config.family.label());
    t.comment("params", &report.param_provenance);
    t.comment("epsilon", fmt_f64(report.config.epsilon));
    t.comment("replicas", report.config.replicas);
    t.comment("seed", report.config.seed);
    t.comment("coupling", report.config.coupling.name());
    if let Some(fit) = &report.fit {
        t.comment("fit_c", fmt_f64(fit.c));
        t.comment("fit_r_squared", fmt_f64(fit.r_squared));
    }
    for r in &report.rows {
        t.push(vec![
            r.n.to_string(),
            cell_opt_f64(r.a),
            cell_opt_f64(r.lambda),
            cell_opt_f64(r.kappa),
            cell_opt_f64(r.gamma),
            cell_opt_f64(r.beta),
            cell_opt_u64(r.t_hat),
            cell_opt_u64(r.t_lo),
            cell_opt_f64(r.survival_at_t_hat),
            cell_opt_f64(r.stderr_at_t_hat),
            cell_opt_f64(r.theorem_upper),
            cell_opt_f64(r.theorem_lower),
            cell_opt_bool(r.lower_vacuous),
            r.error.clone().unwrap_or_default(),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------
// Degree concentration on G(n, p)
// ---------------------------------------------------------------------------

/// Extreme degrees of one sampled graph.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GraphDegreeRow {
    pub index: usize,
    pub min_degree: usize,
    pub max_degree: usize,
}

/// One band δ: how often every degree stayed strictly inside
/// ((1−δ)np, (1+δ)np), next to the exponential lower bound for that
/// probability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DegreeBandRow {
    pub delta: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    /// Empirical frequency of "all n degrees in the band".
    pub all_in_band: f64,
    /// Binomial standard error of that frequency.
    pub stderr: f64,
    /// 1 − 2n·exp(−δ²np/3); far below 0 at desk scale, reported as
    /// computed.
    pub chernoff_lower: f64,
    /// `all_in_band ≥ chernoff_lower − 5·stderr`.
    pub meets_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub n: usize,
    pub p: f64,
    pub graphs: usize,
    pub seed: u64,
    /// The mean degree np the bands are centred on.
    pub mean_degree: f64,
    pub per_graph: Vec<GraphDegreeRow>,
    pub bands: Vec<DegreeBandRow>,
}

/// Draws `graphs` G(n, p) samples (graph `i` from sub-stream `i` of
/// `seed`) and measures, for each δ, how often every vertex degree stays
/// strictly inside ((1−δ)np, (1+δ)np).
///
/// The mean-degree regime is enforced as `np ≥ 20`; each δ must lie in the
/// open interval (0, 1).
pub fn degree_concentration_experiment(
    n: usize,
    p: f64,
    graphs: usize,
    seed: u64,
    deltas: &[f64],
) -> Result<DegreeReport> {
    if graphs == 0 {
        return Err(Error::Input("need at least one graph".into()));
    }
    if deltas.is_empty() {
        return Err(Error::Input("need at least one delta".into()));
    }
    for &d in deltas {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Input(format!(
                "delta must lie in the open interval (0, 1), got {d}"
            )));
        }
    }
    let np = n as f64 * p;
    if np < 20.0 {
        return Err(Error::Precondition(format!(
            "mean degree np = {np} < 20: the degree-band comparison needs np >= 20"
        )));
    }

    let per_graph: Vec<GraphDegreeRow> = (0..graphs)
        .into_par_iter()
        .map(|i| -> Result<GraphDegreeRow> {
            let g = gen_erdos_renyi(n, p, sub_seed(seed, i as u64))?;
            let mut min_degree = usize::MAX;
            let mut max_degree = 0usize;
            for v in 0..n {
                let deg = g.neighbor_degree(VertexId(v))?;
                min_degree = min_degree.min(deg);
                max_degree = max_degree.max(deg);
            }
            Ok(GraphDegreeRow { index: i, min_degree, max_degree })
        })
        .collect::<Result<Vec<_>>>()?;

    let bands = deltas
        .iter()
        .map(|&delta| {
            let band_lo = (1.0 - delta) * np;
            let band_hi = (1.0 + delta) * np;
            let hits = per_graph
                .iter()
                .filter(|r| (r.min_degree as f64) > band_lo && (r.max_degree as f64) < band_hi)
                .count();
            let all_in_band = hits as f64 / graphs as f64;
            let stderr = (all_in_band * (1.0 - all_in_band) / graphs as f64).sqrt();
            let chernoff_lower = 1.0 - 2.0 * n as f64 * (-delta * delta * np / 3.0).exp();
            DegreeBandRow {
                delta,
                band_lo,
                band_hi,
                all_in_band,
                stderr,
                chernoff_lower,
                meets_bound: all_in_band >= chernoff_lower - 5.0 * stderr,
            }
        })
        .collect();

    Ok(DegreeReport { n, p, graphs, seed, mean_degree: np, per_graph, bands })
}

/// Band table of a degree report (`# …` comments carry the provenance).
pub fn degree_bands_csv(report: &DegreeReport) -> Table {
    let mut t = Table::new(vec![
        "delta",
        "band_lo",
        "band_hi",
        "all_in_band",
        "stderr",
        "chernoff_lower",
        "meets_bound",
    ]);
    t.comment("command", "concentration --mode degrees");
    t.comment("n", report.n);
    t.comment("p", fmt_f64(report.p));
    t.comment("graphs", report.graphs);
    t.comment("seed", report.seed);
    t.comment("mean_degree", fmt_f64(report.mean_degree));
    for b in &report.bands {
        t.push(vec![
            fmt_f64(b.delta),
            fmt_f64(b.band_lo),
            fmt_f64(b.band_hi),
            fmt_f64(b.all_in_band),
            fmt_f64(b.stderr),
            fmt_f64(b.chernoff_lower),
            b.meets_bound.to_string(),
        ]);
    }
    t
}

/// Per-graph extreme-degree table of a degree report.
pub fn degree_graphs_csv(report: &DegreeReport) -> Table {
    let mut t = Table::new(vec!["graph", "min_degree", "max_degree"]);
    t.comment("command", "concentration --mode degrees");
    t.comment("n", report.n);
    t.comment("p", fmt_f64(report.p));
    t.comment("seed", report.seed);
    for r in &report.per_graph {
        t.push(vec![
            r.index.to_string(),
            r.min_degree.to_string(),
            r.max_degree.to_string(),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------
// Self-loop concentration on random regular multigraphs
// ---------------------------------------------------------------------------

/// One deviation level δ: the empirical frequency of |S − (d−1)/2| ≥ δ
/// next to the bounded-difference tail bound 2·exp(−2δ²/n).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SelfLoopTailRow {
    pub delta: f64,
    pub tail_freq: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfLoopReport {
    pub n: usize,
    pub d: usize,
    pub graphs: usize,
    pub seed: u64,
    /// The nominal self-loop mean (d−1)/2.
    pub target: f64,
    /// The exact pairing expectation (nd/2)·(d−1)/(nd−1), which the target
    /// approximates.
    pub exact_mean: f64,
    pub sample_mean: f64,
    /// Standard error of the sample mean under a Binomial(nd/2, q) model
    /// of the self-loop count, q = (d−1)/(nd−1).
    pub sigma_mean: f64,
    /// |sample_mean − target| ≤ 3·sigma_mean.
    pub mean_within_3_sigma: bool,
    /// Self-loop count of every sampled graph, in draw order.
    pub counts: Vec<usize>,
    pub tails: Vec<SelfLoopTailRow>,
}

/// Draws `graphs` random d-regular multigraphs (graph `i` from sub-stream
/// `i` of `seed`), counts self-loops, and compares the sample mean against
/// the (d−1)/2 target and each deviation tail against 2·exp(−2δ²/n).
///
/// Needs `n·d` even (otherwise no pairing of the stubs exists) and every
/// δ > 0.
pub fn selfloop_experiment(
    n: usize,
    d: usize,
    graphs: usize,
    seed: u64,
    deltas: &[f64],
) -> Result<SelfLoopReport> {
    if graphs == 0 {
        return Err(Error::Input("need at least one graph".into()));
    }
    if n == 0 || d == 0 {
        return Err(Error::Input(format!("need n >= 1 and d >= 1, got n = {n}, d = {d}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::Input(format!(
            "n*d = {} is odd: a d-regular multigraph needs an even stub count",
            n * d
        )));
    }
    for &delta in deltas {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Input(format!("delta must be positive, got {delta}")));
        }
    }

    let counts: Vec<usize> = (0..graphs)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let g = gen_regular_multigraph(n, d, sub_seed(seed, i as u64))?;
            Ok(count_self_loops(&g))
        })
        .collect::<Result<Vec<_>>>()?;

    let stubs = n * d;
    let pairs = (stubs / 2) as f64;
    let q = if stubs > 1 { (d - 1) as f64 / (stubs - 1) as f64 } else { 0.0 };
    let target = (d as f64 - 1.0) / 2.0;
    let exact_mean = pairs * q;
    let sample_mean = counts.iter().sum::<usize>() as f64 / graphs as f64;
    let sigma_mean = (pairs * q * (1.0 - q) / graphs as f64).sqrt();
    let mean_within_3_sigma = (sample_mean - target).abs() <= 3.0 * sigma_mean;

    let tails = deltas
        .iter()
        .map(|&delta| {
            let hits = counts
                .iter()
                .filter(|&&s| (s as f64 - target).abs() >= delta)
                .count();
            SelfLoopTailRow {
                delta,
                tail_freq: hits as f64 / graphs as f64,
                bound: 2.0 * (-2.0 * delta * delta / n as f64).exp(),
            }
        })
        .collect();

    Ok(SelfLoopReport {
        n,
        d,
        graphs,
        seed,
        target,
        exact_mean,
        sample_mean,
        sigma_mean,
        mean_within_3_sigma,
        counts,
        tails,
    })
}

/// Tail table of a self-loop report; the summary statistics ride along as
/// comments.
pub fn selfloop_csv(report: &SelfLoopReport) -> Table {
    let mut t = Table::new(vec!["delta", "tail_freq", "bound"]);
    t.comment("command", "concentration --mode self-loops");
    t.comment("n", report.n);
    t.comment("d", report.d);
    t.comment("graphs", report.graphs);
    t.comment("seed", report.seed);
    t.comment("target", fmt_f64(report.target));
    t.comment("exact_mean", fmt_f64(report.exact_mean));
    t.comment("sample_mean", fmt_f64(report.sample_mean));
    t.comment("sigma_mean", fmt_f64(report.sigma_mean));
    t.comment("mean_within_3_sigma", report.mean_within_3_sigma);
    for r in &report.tails {
        t.push(vec![fmt_f64(r.delta), fmt_f64(r.tail_freq), fmt_f64(r.bound)]);
    }
    t
}

// ---------------------------------------------------------------------------
// Regime feasibility table
// ---------------------------------------------------------------------------

/// A concrete (κ, a, λ) triple inside the feasible region, checked against
/// the regime validator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegimeSuggestion {
    pub kappa: f64,
    pub a: f64,
    pub lambda: f64,
    /// Whether the validator confirms the triple satisfies the sharper
    /// regime (including p* < 1 at the supplied degree).
    pub satisfies_regime: bool,
}

/// Feasibility of the sharper parameter regime at one (n, α) cell.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeRow {
    pub n: usize,
    pub alpha: f64,
    /// Smallest α at which the κ-interval below is non-empty:
    /// ln(4(n−1)²)/ln n.
    pub alpha_threshold: f64,
    /// Feasible κ ∈ (kappa_lo, kappa_hi) = (n^{−α}, 1/(4(n−1)²)).
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub feasible: bool,
    /// Midpoint-κ suggestion with a = 1 − n^{−α}/2 and λ sized so
    /// λ·Δ = n^{−α}/4 for the supplied maximum degree (λ = 0 without one).
    pub suggestion: Option<RegimeSuggestion>,
}

/// Tabulates, per (n, α), the feasible κ-interval of the sharper regime,
/// the α threshold where it opens up, and a suggested (κ, a, λ) triple.
pub fn regime_table(
    n_grid: &[usize],
    alpha_grid: &[f64],
    max_degree: Option<usize>,
) -> Result<Vec<RegimeRow>> {
    if n_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::Input("regime table needs non-empty n and alpha grids".into()));
    }
    for &n in n_grid {
        if n < 2 {
            return Err(Error::Input(format!("regime table needs n >= 2, got {n}")));
        }
    }
    for &alpha in alpha_grid {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Input(format!(
                "regime table needs positive finite alpha, got {alpha}"
            )));
        }
    }

    let mut rows = Vec::with_capacity(n_grid.len() * alpha_grid.len());
    for &n in n_grid {
        let nf = n as f64;
        let alpha_threshold = (4.0 * (nf - 1.0) * (nf - 1.0)).ln() / nf.ln();
        let kappa_hi = 1.0 / (4.0 * (nf - 1.0) * (nf - 1.0));
        for &alpha in alpha_grid {
            let kappa_lo = nf.powf(-alpha);
            let feasible = kappa_lo < kappa_hi;
            let suggestion = if feasible {
                let kappa = 0.5 * (kappa_lo + kappa_hi);
                let a = 1.0 - kappa_lo / 2.0;
                let degree = max_degree.unwrap_or(0);
                let lambda =
                    if degree > 0 { kappa_lo / (4.0 * degree as f64) } else { 0.0 };
                let satisfies_regime = Params::new(a, lambda, kappa)
                    .and_then(|p| check_regime(&p, n, degree, Some(alpha)))
                    .map(|r| r.regime_lower && r.p_star_ok)
                    .unwrap_or(false);
                Some(RegimeSuggestion { kappa, a, lambda, satisfies_regime })
            } else {
                None
            };
            rows.push(RegimeRow {
                n,
                alpha,
                alpha_threshold,
                kappa_lo,
                kappa_hi,
                feasible,
                suggestion,
            });
        }
    }
    Ok(rows)
}

/// Renders the regime table as CSV.
pub fn regime_csv(rows: &[RegimeRow], max_degree: Option<usize>) -> Table {
    let mut t = Table::new(vec![
        "n",
        "alpha",
        "alpha_threshold",
        "kappa_lo",
        "kappa_hi",
        "feasible",
        "suggested_kappa",
        "suggested_a",
        "suggested_lambda",
        "suggestion_ok",
    ]);
    t.comment("command", "regimes");
    match max_degree {
        Some(d) => t.comment("max_degree", d),
        None => t.comment("max_degree", "none (lambda suggestions are 0)"),
    }
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.alpha_threshold),
            fmt_f64(r.kappa_lo),
            fmt_f64(r.kappa_hi),
            r.feasible.to_string(),
            cell_opt_f64(r.suggestion.map(|s| s.kappa)),
            cell_opt_f64(r.suggestion.map(|s| s.a)),
            cell_opt_f64(r.suggestion.map(|s| s.lambda)),
            cell_opt_bool(r.suggestion.map(|s| s.satisfies_regime)),
        ]);
    }
    t
}
