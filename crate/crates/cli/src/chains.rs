//! The reduction chains an experiment can run, and one seeded trial of each.

use std::sync::Arc;
use std::time::Instant;

use orc_core::bodies::{brute_force_lp, random, BodySpec, ExactBody, ExactFunction, FuncSpec};
use orc_core::cutting_plane::{opt_from_viol, optimize_linear_traced};
use orc_core::oracle::{Counted, LocalView, OracleKind, QueryLedger};
use orc_core::reductions::{
    eval_from_mem_epigraph, opt_from_val_layers as val_layers, sep_from_mem,
    sep_from_opt_layers as opt_layers, ChainLedgers, ChainOptions, EpigraphBody,
    GradFromSepEpigraph, OptFromVal, SepFromOpt,
};
use orc_core::separation::SepFromMem;
use orc_core::{
    OptimizationAnswer, OptimizationOracle, OracleError, Precision, ProblemGeometry, RandomStream,
    SeparationAnswer, SeparationOracle, SubgradientOracle, Vector,
};

use crate::config::ExperimentConfig;

/// Query distances for separation trials, as multiples of the support
/// radius in the query direction. Trial `t` uses entry `t mod 3`.
pub const DISTANCE_FACTORS: [f64; 3] = [1.05, 1.5, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chain {
    SepFromMem,
    SepFromOpt,
    OptFromSep,
    OptFromMem,
    OptFromViol,
    OptFromVal,
    EvalFromMemEpigraph,
    GradFromSepEpigraph,
}

impl Chain {
    pub const ALL: [Chain; 8] = [
        Chain::SepFromMem,
        Chain::SepFromOpt,
        Chain::OptFromSep,
        Chain::OptFromMem,
        Chain::OptFromViol,
        Chain::OptFromVal,
        Chain::EvalFromMemEpigraph,
        Chain::GradFromSepEpigraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Chain::SepFromMem => "sep_from_mem",
            Chain::SepFromOpt => "sep_from_opt",
            Chain::OptFromSep => "opt_from_sep",
            Chain::OptFromMem => "opt_from_mem",
            Chain::OptFromViol => "opt_from_viol",
            Chain::OptFromVal => "opt_from_val",
            Chain::EvalFromMemEpigraph => "eval_from_mem_epigraph",
            Chain::GradFromSepEpigraph => "grad_from_sep_epigraph",
        }
    }

    pub fn from_name(name: &str) -> Option<Chain> {
        Chain::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Chain::SepFromMem => {
                "separation from exact membership; eps is the membership precision"
            }
            Chain::SepFromOpt => {
                "separation from exact optimization through the support-function epigraph"
            }
            Chain::OptFromSep => {
                "ellipsoid method over exact separation; eps is the optimizer accuracy"
            }
            Chain::OptFromMem => "ellipsoid method over separation from exact membership",
            Chain::OptFromViol => {
                "optimization by bisection over exact violation; eps is the precision"
            }
            Chain::OptFromVal => {
                "optimization from exact validity through the support-function epigraph"
            }
            Chain::EvalFromMemEpigraph => {
                "function value by bisection on the exact epigraph membership"
            }
            Chain::GradFromSepEpigraph => "subgradient from exact separation of the epigraph",
        }
    }

    pub fn needs_function(self) -> bool {
        matches!(
            self,
            Chain::EvalFromMemEpigraph | Chain::GradFromSepEpigraph
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Sound,
    Violated,
    Inside,
    Error(&'static str),
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Sound => f.write_str("sound"),
            Outcome::Violated => f.write_str("violated"),
            Outcome::Inside => f.write_str("inside"),
            Outcome::Error(kind) => write!(f, "error:{kind}"),
        }
    }
}

/// Per-trial oracle call counts, taken from query ledgers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub mem: u64,
    pub sep: u64,
    pub eval: u64,
    pub opt: u64,
    pub viol: u64,
    pub val: u64,
}

impl Counts {
    fn from_ledger(l: &QueryLedger) -> Self {
        Counts {
            mem: l.total(OracleKind::Mem),
            sep: l.total(OracleKind::Sep),
            eval: l.total(OracleKind::Eval),
            opt: l.total(OracleKind::Opt),
            viol: l.total(OracleKind::Viol),
            val: l.total(OracleKind::Val),
        }
    }

    pub fn add(&mut self, other: &Counts) {
        self.mem += other.mem;
        self.sep += other.sep;
        self.eval += other.eval;
        self.opt += other.opt;
        self.viol += other.viol;
        self.val += other.val;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    pub trial: usize,
    pub outcome: Outcome,
    /// Error against the exact answer; absent for `inside` and errors.
    pub gap: Option<f64>,
    pub counts: Counts,
    pub wall_ms: f64,
}

/// Where a trial sits in the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialKey {
    pub n: usize,
    pub eps_index: usize,
    pub eps: f64,
    pub seed: u64,
    pub trial: usize,
}

impl TrialKey {
    pub fn trial_stream(&self) -> RandomStream {
        RandomStream::new(self.seed)
            .child(self.n as u64)
            .child(1 + self.eps_index as u64)
            .child(self.trial as u64)
    }
}

struct Finding {
    outcome: Outcome,
    gap: Option<f64>,
    counts: Counts,
}

/// The body or function of one `(n, seed)` cell, shared by its trials.
#[derive(Debug, Clone)]
pub enum Instance {
    Body(BodySpec),
    Function(FuncSpec),
}

impl Instance {
    /// Random instances depend on `(seed, n)` only, so every trial and
    /// precision of a cell sees the same one.
    pub fn build(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<Instance, OracleError> {
        let stream = RandomStream::new(seed).child(n as u64).child(0);
        match (&cfg.body, &cfg.function) {
            (Some(body), _) => Ok(Instance::Body(body.instantiate(n, &stream)?)),
            (None, Some(function)) => Ok(Instance::Function(function.instantiate(n, &stream)?)),
            (None, None) => Err(OracleError::InvalidParameter(
                "config has neither body nor function".into(),
            )),
        }
    }
}

pub fn run_trial(
    chain: Chain,
    key: TrialKey,
    instance: &Result<Instance, OracleError>,
    options: ChainOptions,
) -> TrialRecord {
    let start = Instant::now();
    let result = match instance {
        Err(e) => Err(e.clone()),
        Ok(Instance::Body(spec)) => run_body_trial(spec, chain, key, options),
        Ok(Instance::Function(f)) => run_function_trial(f, chain, key),
    };
    let finding = result.unwrap_or_else(|e| Finding {
        outcome: Outcome::Error(e.kind()),
        gap: None,
        counts: Counts::default(),
    });
    TrialRecord {
        n: key.n,
        eps: key.eps,
        seed: key.seed,
        trial: key.trial,
        outcome: finding.outcome,
        gap: finding.gap,
        counts: finding.counts,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Chain settings of a config, drawing randomness from `stream`.
pub fn chain_options(cfg: &ExperimentConfig, stream: RandomStream) -> ChainOptions {
    let mut options = ChainOptions::new(stream);
    options.slack_mode = cfg.slack_mode;
    options.r1 = cfg.overrides.r1;
    options.retries = cfg.overrides.retries;
    options.sep_delta_exponent = cfg.overrides.sep_delta_exponent;
    options
}

/// Exact optimum of `⟨c, ·⟩`, by vertex enumeration for small polytopes.
pub fn reference_optimum(spec: &BodySpec, c: &Vector) -> Result<f64, OracleError> {
    match spec {
        BodySpec::HPolytope(p) if p.dim() <= 4 && p.normals().len() <= 32 => {
            Ok(brute_force_lp(p, c)?.0)
        }
        _ => Ok(spec.support(c)?.0),
    }
}

/// `eps·‖c‖·(1 + κ)`: the accuracy contract of the optimization chains.
pub fn optimization_tolerance(eps: f64, geometry: &ProblemGeometry) -> f64 {
    eps * (1.0 + geometry.kappa())
}

fn separation_query(
    spec: &BodySpec,
    geometry: &ProblemGeometry,
    key: &TrialKey,
) -> Result<Vector, OracleError> {
    let u = random::unit_vector(spec.dim(), &mut key.trial_stream().child(0).rng()).into_vector();
    let radius = spec.support(&u)?.0 - u.dot(&geometry.center);
    let factor = DISTANCE_FACTORS[key.trial % DISTANCE_FACTORS.len()];
    Ok(geometry.center.add_scaled(factor * radius, &u))
}

fn judge_separation(
    spec: &BodySpec,
    answer: SeparationAnswer,
) -> Result<(Outcome, Option<f64>), OracleError> {
    Ok(match answer {
        SeparationAnswer::InsideDilated => (Outcome::Inside, None),
        SeparationAnswer::Separator(h) => {
            let excess = (spec.support(h.normal.as_vector())?.0 - h.offset()).max(0.0);
            let outcome = if excess <= 1e-9 {
                Outcome::Sound
            } else {
                Outcome::Violated
            };
            (outcome, Some(excess))
        }
    })
}

fn judge_optimum(
    spec: &BodySpec,
    geometry: &ProblemGeometry,
    c: &Vector,
    eps: f64,
    answer: OptimizationAnswer,
) -> Result<(Outcome, Option<f64>), OracleError> {
    match answer {
        OptimizationAnswer::Maximizer(y) => {
            let gap = reference_optimum(spec, c)? - c.dot(&y);
            let outcome = if gap <= optimization_tolerance(eps, geometry) {
                Outcome::Sound
            } else {
                Outcome::Violated
            };
            Ok((outcome, Some(gap)))
        }
        OptimizationAnswer::EmptyInterior => Ok((Outcome::Violated, None)),
    }
}

fn layer_counts(
    ledgers: &ChainLedgers,
    mem: &str,
    sep: &str,
    eval: &str,
    opt: Option<&str>,
) -> Counts {
    Counts {
        mem: ledgers.total(mem, OracleKind::Mem),
        sep: ledgers.total(sep, OracleKind::Sep),
        eval: ledgers.total(eval, OracleKind::Eval),
        opt: opt.map_or(1, |name| ledgers.total(name, OracleKind::Opt)),
        viol: 0,
        val: ledgers.total(val_layers::VAL, OracleKind::Val),
    }
}

fn run_body_trial(
    spec: &BodySpec,
    chain: Chain,
    key: TrialKey,
    mut options: ChainOptions,
) -> Result<Finding, OracleError> {
    let geometry = spec.geometry();
    let ledger = QueryLedger::new();
    let exact = Counted::new(ExactBody::new(spec.clone()), ledger.clone());
    let eps = key.eps;
    let delta = Precision::new(eps)?;
    let c = || random::unit_vector(key.n, &mut key.trial_stream().child(0).rng()).into_vector();

    let (outcome, gap, counts) = match chain {
        Chain::SepFromMem => {
            let x = separation_query(&spec, &geometry, &key)?;
            options.sep_eps = Some(eps);
            let sep = Counted::new(sep_from_mem(exact, &geometry, &options), ledger.clone());
            let (outcome, gap) = judge_separation(&spec, sep.separate(&x, delta)?)?;
            (outcome, gap, Counts::from_ledger(&ledger))
        }
        Chain::SepFromOpt => {
            let x = separation_query(&spec, &geometry, &key)?;
            let sep = SepFromOpt::new(ExactBody::new(spec.clone()), &geometry, &options)?;
            let (outcome, gap) = judge_separation(&spec, sep.separate(&x, delta)?)?;
            let counts = layer_counts(
                sep.ledgers(),
                opt_layers::EPIGRAPH_MEM,
                opt_layers::EPIGRAPH_SEP,
                opt_layers::SUPPORT_EVAL,
                Some(opt_layers::OPT),
            );
            (outcome, gap, counts)
        }
        Chain::OptFromSep | Chain::OptFromMem => {
            let c = c();
            let opt_cfg = options.optimizer_config(eps)?;
            let trace = if chain == Chain::OptFromSep {
                optimize_linear_traced(&opt_cfg, &exact, &geometry, &c)?
            } else {
                let sep = SepFromMem::new(
                    exact,
                    &geometry,
                    options.chain_separator_config(&geometry),
                    options.stream.clone(),
                );
                optimize_linear_traced(&opt_cfg, &sep, &geometry, &c)?
            };
            let (outcome, gap) = judge_optimum(&spec, &geometry, &c, eps, trace.answer)?;
            let mut counts = Counts::from_ledger(&ledger);
            counts.sep = trace.sep_calls as u64;
            counts.opt = 1;
            (outcome, gap, counts)
        }
        Chain::OptFromViol => {
            let c = c();
            let frame = geometry.frame();
            let opt = opt_from_viol(LocalView::new(exact, frame.clone()));
            let local_delta = Precision::saturating(eps / frame.scale);
            let answer = match opt.optimize(&c, local_delta)? {
                OptimizationAnswer::Maximizer(y) => {
                    OptimizationAnswer::Maximizer(frame.to_global(&y))
                }
                other => other,
            };
            let (outcome, gap) = judge_optimum(&spec, &geometry, &c, eps, answer)?;
            let mut counts = Counts::from_ledger(&ledger);
            counts.opt = 1;
            (outcome, gap, counts)
        }
        Chain::OptFromVal => {
            let c = c();
            let opt = OptFromVal::new(ExactBody::new(spec.clone()), &geometry, &options)?;
            let (outcome, gap) =
                judge_optimum(&spec, &geometry, &c, eps, opt.optimize(&c, delta)?)?;
            let counts = layer_counts(
                opt.ledgers(),
                val_layers::EPIGRAPH_MEM,
                val_layers::EPIGRAPH_SEP,
                val_layers::SUPPORT_EVAL,
                None,
            );
            (outcome, gap, counts)
        }
        Chain::EvalFromMemEpigraph | Chain::GradFromSepEpigraph => {
            return Err(OracleError::InvalidParameter(format!(
                "chain {} needs a function",
                chain.name()
            )))
        }
    };
    Ok(Finding {
        outcome,
        gap,
        counts,
    })
}

/// A query point with `‖y‖ ≤ 0.9`.
fn function_query(n: usize, stream: &RandomStream) -> Vector {
    let mut rng = stream.rng();
    let u = random::unit_vector(n, &mut rng).into_vector();
    let radius: f64 = rand::Rng::random_range(&mut rng, 0.0..0.9);
    u.scaled(radius)
}

/// Largest violation of `α + ⟨g, z − y⟩ ≤ f(z)` over probe points `z`.
fn subgradient_violation(
    f: &FuncSpec,
    y: &Vector,
    alpha: f64,
    g: &Vector,
    stream: &RandomStream,
) -> Result<f64, OracleError> {
    let n = y.dim();
    let mut worst = (alpha - f.exact_eval(y)?).max(0.0);
    let mut rng = stream.rng();
    for _ in 0..4 * n {
        let z = random::unit_vector(n, &mut rng)
            .into_vector()
            .scaled(rand::Rng::random_range(&mut rng, 0.0..1.0));
        worst = worst.max(alpha + g.dot(&(&z - y)) - f.exact_eval(&z)?);
    }
    Ok(worst.max(0.0))
}

fn run_function_trial(f: &FuncSpec, chain: Chain, key: TrialKey) -> Result<Finding, OracleError> {
    let delta = Precision::new(key.eps)?;
    let y = function_query(key.n, &key.trial_stream().child(0));
    let ledger = QueryLedger::new();
    let epigraph = Arc::new(EpigraphBody::new(ExactFunction::new(f.clone()))?);
    let (outcome, gap) = match chain {
        Chain::EvalFromMemEpigraph => {
            let mem = Counted::new(epigraph, ledger.clone());
            let alpha = eval_from_mem_epigraph(&mem, &y, delta)?;
            let gap = (alpha - f.exact_eval(&y)?).abs();
            (
                if gap <= 2.0 * key.eps {
                    Outcome::Sound
                } else {
                    Outcome::Violated
                },
                gap,
            )
        }
        Chain::GradFromSepEpigraph => {
            let sep = Arc::new(Counted::new(epigraph, ledger.clone()));
            let grad = GradFromSepEpigraph::new(sep)?;
            let answer = grad.subgradient(&y, delta)?;
            let gap = subgradient_violation(
                &f,
                &y,
                answer.value,
                &answer.subgrad,
                &key.trial_stream().child(1),
            )?;
            (
                if gap <= 2.0 * key.eps {
                    Outcome::Sound
                } else {
                    Outcome::Violated
                },
                gap,
            )
        }
        _ => {
            return Err(OracleError::InvalidParameter(format!(
                "chain {} needs a body",
                chain.name()
            )))
        }
    };
    Ok(Finding {
        outcome,
        gap: Some(gap),
        counts: Counts::from_ledger(&ledger),
    })
}
