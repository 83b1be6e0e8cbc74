//! Experiment configuration: graph families, parameter rules, and the
//! validated bundle the experiment drivers consume.

use std::path::PathBuf;

use nsis_core::coupling::CouplingKind;
use nsis_core::dynamics::Params;
use nsis_core::graph::{parse_graph, MultiGraph};
use nsis_core::random::{
    gen_erdos_renyi, gen_galton_watson, gen_regular_multigraph, OffspringLaw,
};
use nsis_core::{Error, Result};
use serde::Serialize;

/// How experiment graphs are produced, one instance per requested size.
///
/// The deterministic families (`Edgeless`, `Path`, `Cycle`, `Star`) ignore
/// the seed; the random families draw instance `n` from the seed they are
/// handed; `File` loads a fixed serialized graph and insists its size
/// matches the requested one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GraphFamily {
    /// No edges: the dynamics reduce to independent per-vertex noise.
    Edgeless,
    /// Path 0 – 1 – … – (n−1).
    Path,
    /// Cycle on n ≥ 3 vertices.
    Cycle,
    /// Star with centre 0 and n−1 leaves.
    Star,
    /// G(n, p): each unordered pair is an edge independently.
    Er { p: f64 },
    /// Random d-regular multigraph from uniform stub pairing.
    Regular { d: usize },
    /// Branching-process tree with Binomial(m, p) offspring.
    GwBinomial { m: u64, p: f64 },
    /// Branching-process tree with Poisson(theta) offspring.
    GwPoisson { theta: f64 },
    /// A fixed graph loaded from a serialized graph file.
    File { path: PathBuf },
}

impl GraphFamily {
    /// Rejects impossible family parameters before any generation work.
    pub fn validate(&self) -> Result<()> {
        match self {
            GraphFamily::Edgeless
            | GraphFamily::Path
            | GraphFamily::Cycle
            | GraphFamily::Star
            | GraphFamily::File { .. } => Ok(()),
            GraphFamily::Er { p } => {
                if !(p.is_finite() && (0.0..=1.0).contains(p)) {
                    return Err(Error::Input(format!(
                        "edge probability must lie in [0, 1], got {p}"
                    )));
                }
                Ok(())
            }
            GraphFamily::Regular { d } => {
                if *d == 0 {
                    return Err(Error::Input(
                        "the regular family needs d >= 1 (use the edgeless family for d = 0)"
                            .into(),
                    ));
                }
                Ok(())
            }
            GraphFamily::GwBinomial { m, p } => OffspringLaw::Binomial { m: *m, p: *p }.validate(),
            GraphFamily::GwPoisson { theta } => OffspringLaw::Poisson { theta: *theta }.validate(),
        }
    }

    /// Human-readable label with the family parameters filled in; used in
    /// output headers.
    pub fn label(&self) -> String {
        match self {
            GraphFamily::Edgeless => "edgeless".into(),
            GraphFamily::Path => "path".into(),
            GraphFamily::Cycle => "cycle".into(),
            GraphFamily::Star => "star".into(),
            GraphFamily::Er { p } => format!("er(p={p})"),
            GraphFamily::Regular { d } => format!("regular(d={d})"),
            GraphFamily::GwBinomial { m, p } => format!("gw-binomial(m={m},p={p})"),
            GraphFamily::GwPoisson { theta } => format!("gw-poisson(theta={theta})"),
            GraphFamily::File { path } => format!("file({})", path.display()),
        }
    }

    /// Produces the size-`n` instance of this family. Deterministic per
    /// seed; the seed is ignored by the deterministic families.
    pub fn realize(&self, n: usize, seed: u64) -> Result<MultiGraph> {
        self.validate()?;
        match self {
            GraphFamily::Edgeless => MultiGraph::edgeless(n),
            GraphFamily::Path => MultiGraph::path(n),
            GraphFamily::Cycle => MultiGraph::cycle(n),
            GraphFamily::Star => MultiGraph::star(n),
            GraphFamily::Er { p } => gen_erdos_renyi(n, *p, seed),
            GraphFamily::Regular { d } => gen_regular_multigraph(n, *d, seed),
            GraphFamily::GwBinomial { m, p } => {
                Ok(gen_galton_watson(&OffspringLaw::Binomial { m: *m, p: *p }, n, seed)?.0)
            }
            GraphFamily::GwPoisson { theta } => {
                Ok(gen_galton_watson(&OffspringLaw::Poisson { theta: *theta }, n, seed)?.0)
            }
            GraphFamily::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let g = parse_graph(&text)?;
                if g.n() != n {
                    return Err(Error::Input(format!(
                        "graph file {} has {} vertices but the experiment asked for n = {n}",
                        path.display(),
                        g.n()
                    )));
                }
                Ok(g)
            }
        }
    }
}

/// Chain parameters for an experiment: either explicit constants used at
/// every size, or a rule that pins (κ, a, λ) as functions of the instance
/// size so a whole size grid is well-defined from one switch.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ParamSpec {
    /// Fixed (a, λ, κ) applied verbatim at every size.
    Explicit { a: f64, lambda: f64, kappa: f64 },
    /// Size-indexed strong-noise defaults: κ(n) = 1/(8(n−1)),
    /// a(n) = 1 − κ(n)/2, and λ(n) sized so the family's degree condition
    /// λ·Δ ≲ n^{−α} holds at typical degrees (zero for families without
    /// one: edgeless, the named shapes, and file graphs).
    Recipe { alpha: f64 },
}

impl ParamSpec {
    /// The λ rule the recipe applies for `family`, as recorded in output.
    fn lambda_rule(family: &GraphFamily, alpha: f64) -> String {
        match family {
            GraphFamily::Edgeless
            | GraphFamily::Path
            | GraphFamily::Cycle
            | GraphFamily::Star
            | GraphFamily::File { .. } => "lambda = 0".into(),
            GraphFamily::Er { .. } => {
                format!("lambda = 1/(2 p n^(1+alpha)) with alpha = {alpha}")
            }
            GraphFamily::Regular { .. } => {
                format!("lambda = 1/(2 d n^alpha) with alpha = {alpha}")
            }
            GraphFamily::GwBinomial { .. } | GraphFamily::GwPoisson { .. } => {
                format!("lambda = ln(ln n)/(2 n^alpha ln n) with alpha = {alpha}")
            }
        }
    }

    /// The parameter rule as a verbatim string for output headers.
    pub fn describe(&self, family: &GraphFamily) -> String {
        match *self {
            ParamSpec::Explicit { a, lambda, kappa } => {
                format!("explicit: a = {a}, lambda = {lambda}, kappa = {kappa}")
            }
            ParamSpec::Recipe { alpha } => format!(
                "recipe: kappa = 1/(8(n-1)); a = 1 - kappa/2; {}",
                Self::lambda_rule(family, alpha)
            ),
        }
    }

    /// Evaluates the rule at size `n` and validates the resulting
    /// parameters. The recipe needs `n ≥ 2` (its κ has an n−1 denominator)
    /// and a positive finite `alpha`.
    pub fn resolve(&self, n: usize, family: &GraphFamily) -> Result<Params> {
        match *self {
            ParamSpec::Explicit { a, lambda, kappa } => Params::new(a, lambda, kappa),
            ParamSpec::Recipe { alpha } => {
                if n < 2 {
                    return Err(Error::Input(format!(
                        "the parameter recipe needs n >= 2, got n = {n}"
                    )));
                }
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::Input(format!(
                        "the recipe exponent alpha must be positive and finite, got {alpha}"
                    )));
                }
                let nf = n as f64;
                let kappa = 1.0 / (8.0 * (nf - 1.0));
                let a = 1.0 - kappa / 2.0;
                let lambda = match family {
                    GraphFamily::Edgeless
                    | GraphFamily::Path
                    | GraphFamily::Cycle
                    | GraphFamily::Star
                    | GraphFamily::File { .. } => 0.0,
                    GraphFamily::Er { p } => {
                        if p.is_nan() || *p <= 0.0 {
                            return Err(Error::Input(format!(
                                "the er recipe needs p > 0, got {p}"
                            )));
                        }
                        1.0 / (2.0 * p * nf.powf(1.0 + alpha))
                    }
                    GraphFamily::Regular { d } => 1.0 / (2.0 * *d as f64 * nf.powf(alpha)),
                    // ln ln n is negative below n = 3; clamp to the λ = 0
                    // floor instead of handing the chain a negative rate.
                    GraphFamily::GwBinomial { .. } | GraphFamily::GwPoisson { .. } => {
                        (nf.ln().ln() / (2.0 * nf.powf(alpha) * nf.ln())).max(0.0)
                    }
                };
                Params::new(a, lambda, kappa)
            }
        }
    }
}

/// A full scaling-experiment request.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub family: GraphFamily,
    /// Instance sizes, strictly increasing.
    pub n_grid: Vec<usize>,
    pub params: ParamSpec,
    /// Mixing threshold the per-size estimates target.
    pub epsilon: f64,
    /// Coalescence replicas per size.
    pub replicas: usize,
    pub seed: u64,
    pub coupling: CouplingKind,
}

impl ExperimentConfig {
    /// Checks the structural invariants: a non-empty strictly increasing
    /// size grid, at least one replica, ε ∈ (0, 1], and valid family
    /// parameters.
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Input("n_grid must contain at least one size".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Input(format!(
                "n_grid must be strictly increasing, got {:?}",
                self.n_grid
            )));
        }
        if self.replicas == 0 {
            return Err(Error::Input("replicas must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Input(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        self.family.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nsis_core::dynamics::check_regime;
    use nsis_core::random::check_degree_condition;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            family: GraphFamily::Edgeless,
            n_grid: vec![8, 16, 32],
            params: ParamSpec::Recipe { alpha: 2.0 },
            epsilon: 0.25,
            replicas: 100,
            seed: 7,
            coupling: CouplingKind::Independent,
        }
    }

    #[test]
    fn config_validation_accepts_the_base_case() {
        assert!(base_config().validate().is_ok());
    }

    #[test]
    fn config_validation_rejects_structural_defects() {
        let mut c = base_config();
        c.n_grid = vec![];
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.n_grid = vec![8, 8, 16];
        assert!(c.validate().is_err(), "equal entries are not strictly increasing");

        let mut c = base_config();
        c.n_grid = vec![16, 8];
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.replicas = 0;
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.epsilon = 0.0;
        assert!(c.validate().is_err());

        let mut c = base_config();
        c.family = GraphFamily::Er { p: 1.5 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn recipe_values_are_the_documented_closed_forms() {
        // n = 9: κ = 1/64, a = 1 − 1/128; both dyadic, so exact in floats.
        let p = ParamSpec::Recipe { alpha: 2.0 }
            .resolve(9, &GraphFamily::Edgeless)
            .unwrap();
        assert_eq!(p.kappa(), 1.0 / 64.0);
        assert_eq!(p.a(), 1.0 - 1.0 / 128.0);
        assert_eq!(p.lambda(), 0.0);
    }

    #[test]
    fn recipe_satisfies_the_strong_noise_regime_across_sizes() {
        for n in [2usize, 5, 10, 100, 1600] {
            let p = ParamSpec::Recipe { alpha: 2.0 }
                .resolve(n, &GraphFamily::Edgeless)
                .unwrap();
            let r = check_regime(&p, n, 0, None).unwrap();
            assert!(r.regime_upper, "recipe must sit inside the strong-noise regime at n={n}");
            assert!(r.p_star_ok);
            assert!(r.gamma > 0.0);
        }
    }

    #[test]
    fn recipe_rejects_degenerate_sizes_and_exponents() {
        assert!(ParamSpec::Recipe { alpha: 2.0 }
            .resolve(1, &GraphFamily::Edgeless)
            .is_err());
        assert!(ParamSpec::Recipe { alpha: 0.0 }
            .resolve(8, &GraphFamily::Edgeless)
            .is_err());
        assert!(ParamSpec::Recipe { alpha: f64::NAN }
            .resolve(8, &GraphFamily::Edgeless)
            .is_err());
    }

    #[test]
    fn recipe_lambda_meets_the_degree_condition_on_a_dense_er_draw() {
        // At typical G(n, p) degrees (Δ ≈ np), the er rule
        // λ = 1/(2 p n^{1+α}) gives λ·Δ ≈ n^{−α}/2 < n^{−α}.
        let family = GraphFamily::Er { p: 0.15 };
        let n = 200;
        let alpha = 2.0;
        let params = ParamSpec::Recipe { alpha }.resolve(n, &family).unwrap();
        let g = family.realize(n, 31).unwrap();
        let report = check_degree_condition(&g, params.lambda(), alpha);
        assert!(
            report.satisfied,
            "lambda*max_degree = {} should be below n^-alpha = {}",
            report.lhs, report.rhs
        );
    }

    #[test]
    fn deterministic_families_ignore_the_seed() {
        let a = GraphFamily::Path.realize(6, 1).unwrap();
        let b = GraphFamily::Path.realize(6, 999).unwrap();
        assert_eq!(
            nsis_core::graph::serialize_graph(&a),
            nsis_core::graph::serialize_graph(&b)
        );
    }

    #[test]
    fn random_families_are_deterministic_per_seed() {
        let fam = GraphFamily::Er { p: 0.3 };
        let a = fam.realize(40, 5).unwrap();
        let b = fam.realize(40, 5).unwrap();
        let c = fam.realize(40, 6).unwrap();
        let ser = nsis_core::graph::serialize_graph;
        assert_eq!(ser(&a), ser(&b));
        assert_ne!(ser(&a), ser(&c), "different seeds should give different dense draws");
    }

    #[test]
    fn file_family_round_trips_and_checks_the_size() {
        let g = MultiGraph::cycle(5).unwrap();
        let dir = std::env::temp_dir().join("nsis-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cycle5.graph");
        std::fs::write(&path, nsis_core::graph::serialize_graph(&g)).unwrap();

        let fam = GraphFamily::File { path: path.clone() };
        let loaded = fam.realize(5, 0).unwrap();
        assert_eq!(loaded.n(), 5);
        assert_eq!(loaded.edge_instance_count(), 5);
        assert!(fam.realize(6, 0).is_err(), "size mismatch must be rejected");
    }

    #[test]
    fn describe_records_the_rule_verbatim() {
        let spec = ParamSpec::Recipe { alpha: 2.0 };
        let s = spec.describe(&GraphFamily::Regular { d: 3 });
        assert!(s.contains("kappa = 1/(8(n-1))"));
        assert!(s.contains("lambda = 1/(2 d n^alpha)"));
        let e = ParamSpec::Explicit { a: 0.9, lambda: 0.0, kappa: 0.1 };
        assert_eq!(
            e.describe(&GraphFamily::Edgeless),
            "explicit: a = 0.9, lambda = 0, kappa = 0.1"
        );
    }
}
