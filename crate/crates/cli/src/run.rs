//! Command dispatch.
//!
//! Commands listed in the problem file run in declaration order. Running a
//! single command kind executes the listed commands of that kind, together
//! with any earlier command whose named result they may use; when none are
//! listed, the command runs on every declared object it applies to.

use std::collections::BTreeMap;
use std::time::Instant;

use rqmkit_core::chain::{StationarityOptions, DEFAULT_DIM_CAP, EXHAUSTIVE_WORD_LIMIT};
use rqmkit_core::classical::{
    classical_chain_marginals, fmo_of_kernel, implement_kernel, kernel_of_random_map, lift_random_map,
    stationary_distribution,
};
use rqmkit_core::implement::ImplementabilityFailure;
use rqmkit_core::invariant::CesaroMethod;
use rqmkit_core::linalg::{hermitian_defect, min_eigenvalue};
use rqmkit_core::{
    build_chain, implement_compose, implement_convex_sum, implement_direct_sum, implement_finite_family,
    implement_from_stinespring, implement_morphism, implement_state, implement_tensor, invariant_states,
    stinespring_dilate, verify_invariant, verify_skew_invariance, ChainSpec, ClassicalRandomMap, Fixtures, Kernel,
    LinearMap, MapKind, PaddingSearch, Rqm, State, StinespringOutcome, TruncatedChain, DEFAULT_TOL,
};
use serde_json::{json, Value};

use crate::error::{core_error, CliError};
use crate::report::*;
use crate::spec::{object_seed, CommandDecl, CommandKind, Construction, DeclaredKind, Problem};

/// Default depth for homogeneous chains and skew products.
pub const DEFAULT_DEPTH: usize = 3;
/// Basis pairs checked exhaustively by `markov` before sampling.
pub const MARKOV_PAIR_LIMIT: usize = 1 << 14;
pub const MARKOV_SAMPLES: usize = 256;
pub const STATIONARITY_TOL: f64 = 1e-8;
pub const DILATION_TOL: f64 = 1e-8;
/// Random states used by the transition checks.
const PROBE_STATES: usize = 4;

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub dim_cap: usize,
    pub depth: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance: None,
            dim_cap: DEFAULT_DIM_CAP,
            depth: None,
        }
    }
}

pub fn run(problem: &mut Problem, kind: CommandKind, opts: RunOptions) -> Result<Report, CliError> {
    let mut session = Session {
        problem,
        opts,
        chains: BTreeMap::new(),
    };
    let results = session.dispatch(kind)?;
    let settings = Settings {
        seed: opts.seed,
        tolerance: opts.tolerance,
        dim_cap: opts.dim_cap,
        depth: opts.depth,
    };
    Ok(Report::new(kind.name(), settings, results))
}

struct Session<'a> {
    problem: &'a mut Problem,
    opts: RunOptions,
    chains: BTreeMap<(String, usize), TruncatedChain>,
}

fn timed(f: impl FnOnce() -> Result<CommandResult, CliError>) -> Result<CommandResult, CliError> {
    let start = Instant::now();
    let mut r = f()?;
    r.elapsed = start.elapsed();
    Ok(r)
}

fn state_defect(s: &State) -> f64 {
    let trace: f64 = s.densities().iter().map(|d| d.trace().re).sum();
    s.densities()
        .iter()
        .map(|d| hermitian_defect(d).max(-min_eigenvalue(d)))
        .fold((trace - 1.0).abs(), f64::max)
}

fn choi_defect(f: &LinearMap) -> f64 {
    (-f.min_choi_eigenvalue().0).max(0.0)
}

fn cesaro_json(m: CesaroMethod) -> Value {
    match m {
        CesaroMethod::ErgodicProjection => json!({ "method": "ergodic_projection" }),
        CesaroMethod::Averaging(k) => json!({ "method": "averaging", "terms": k }),
    }
}

fn failure_json(f: &ImplementabilityFailure) -> Value {
    json!({
        "k_dim": f.k_dim,
        "h": f.h,
        "tried": f.tried.iter().map(|&(n, pad)| json!({ "copies": n, "padding": pad })).collect::<Vec<_>>(),
        "unreachable_dimension": f.unreachable_dimension,
    })
}

fn kernel_json(k: &Kernel) -> Value {
    Value::Array(k.rows().iter().map(|r| vector_json(r)).collect())
}

fn random_map_json(m: &ClassicalRandomMap) -> Value {
    json!({ "y": m.y_size(), "table": m.table(), "nu": vector_json(m.nu()) })
}

impl Session<'_> {
    fn tol(&self, cmd: &CommandDecl, default: f64) -> f64 {
        cmd.tolerance.or(self.opts.tolerance).unwrap_or(default)
    }

    fn dispatch(&mut self, kind: CommandKind) -> Result<Vec<CommandResult>, CliError> {
        let commands = self.problem.commands.clone();
        if kind == CommandKind::Validate {
            let mut results = self.validate()?;
            results.extend(self.run_listed(&commands, |k| k == kind)?);
            return Ok(results);
        }
        let listed = commands.iter().any(|c| kind == CommandKind::All || c.command == kind);
        if listed {
            return self.run_listed(&commands, |k| kind == CommandKind::All || k == kind);
        }
        match kind {
            CommandKind::All => {
                let mut results = self.validate()?;
                for k in [
                    CommandKind::Induce,
                    CommandKind::Invariant,
                    CommandKind::Skew,
                    CommandKind::Chain,
                    CommandKind::Markov,
                    CommandKind::Stationarity,
                    CommandKind::Semicommutative,
                    CommandKind::Classical,
                    CommandKind::ProbeImplementability,
                ] {
                    results.extend(self.defaults(k)?);
                }
                Ok(results)
            }
            CommandKind::Compose | CommandKind::Implement => Err(CliError::spec(
                "commands",
                format!("`{}` needs explicit entries in `commands`", kind.name()),
            )),
            _ => self.defaults(kind),
        }
    }

    fn run_listed(
        &mut self,
        commands: &[CommandDecl],
        selected: impl Fn(CommandKind) -> bool,
    ) -> Result<Vec<CommandResult>, CliError> {
        let last = commands.iter().rposition(|c| selected(c.command));
        let mut results = Vec::new();
        for (i, c) in commands.iter().enumerate() {
            let wanted = selected(c.command);
            // earlier producers still run so that later references resolve
            if !wanted && !(c.name.is_some() && last.is_some_and(|l| i < l)) {
                continue;
            }
            let mut r = timed(|| self.execute(c))?;
            r.index = Some(i);
            if wanted {
                results.push(r);
            }
        }
        Ok(results)
    }

    /// Default instances: every declared object a command applies to.
    fn defaults(&mut self, kind: CommandKind) -> Result<Vec<CommandResult>, CliError> {
        let base = |kind| CommandDecl {
            command: kind,
            rqm: None,
            outer: None,
            inner: None,
            construction: None,
            operands: Vec::new(),
            weights: None,
            map: None,
            chain: None,
            sigma: None,
            kernel: None,
            random_map: None,
            level: None,
            depth: None,
            r_max: None,
            l_max: None,
            samples: None,
            attempts: None,
            tolerance: None,
            name: None,
        };
        let p = &self.problem;
        let mut decls = Vec::new();
        match kind {
            CommandKind::Induce => {
                for name in p.rqms.keys() {
                    decls.push(CommandDecl { rqm: Some(name.clone()), ..base(kind) });
                }
            }
            CommandKind::Invariant | CommandKind::Skew => {
                for (name, r) in &p.rqms {
                    if r.is_endomorphic() {
                        decls.push(CommandDecl { rqm: Some(name.clone()), ..base(kind) });
                    }
                }
            }
            CommandKind::Chain | CommandKind::Markov | CommandKind::Semicommutative => {
                for name in p.chains.keys() {
                    decls.push(CommandDecl { chain: Some(name.clone()), ..base(kind) });
                }
            }
            CommandKind::Stationarity => {
                for (name, c) in &p.chains {
                    if c.homogeneous {
                        decls.push(CommandDecl { chain: Some(name.clone()), ..base(kind) });
                    }
                }
            }
            CommandKind::Classical => {
                for name in p.random_maps.keys() {
                    decls.push(CommandDecl { random_map: Some(name.clone()), ..base(kind) });
                }
                for name in p.kernels.keys() {
                    decls.push(CommandDecl { kernel: Some(name.clone()), ..base(kind) });
                }
            }
            CommandKind::ProbeImplementability => {
                for (name, f) in &p.maps {
                    let unital_cp = p.declared_kinds.get(name) != Some(&DeclaredKind::Raw);
                    if unital_cp && f.codomain().num_blocks() == 1 {
                        decls.push(CommandDecl { map: Some(name.clone()), ..base(kind) });
                    }
                }
            }
            _ => {}
        }
        decls.iter().map(|c| timed(|| self.execute(c))).collect()
    }

    fn validate(&mut self) -> Result<Vec<CommandResult>, CliError> {
        let tol = self.opts.tolerance.unwrap_or(DEFAULT_TOL);
        let p = &self.problem;
        let mut results = Vec::new();
        for (name, s) in &p.states {
            let checks = vec![Check::new(STATE_VALID, state_defect(s), tol)];
            results.push(CommandResult::new("validate", format!("states.{name}"), checks, json!({})));
        }
        for (name, f) in &p.maps {
            let checks = match f.kind() {
                MapKind::Morphism => vec![Check::new(MAP_MORPHISM, f.morphism_residuals().max(), tol)],
                MapKind::CpUnital => vec![Check::new(MAP_CP_UNITAL, choi_defect(f).max(f.unit_residual()), tol)],
                MapKind::Raw => Vec::new(),
            };
            let outputs = json!({ "kind": f.kind().as_str() });
            results.push(CommandResult::new("validate", format!("maps.{name}"), checks, outputs));
        }
        for (name, r) in &p.rqms {
            let checks = vec![
                Check::new(RQM_FAMILY, r.phi().morphism_residuals().max(), tol),
                Check::new(STATE_VALID, state_defect(r.nu()), tol).at("ν"),
            ];
            let outputs = json!({
                "source": algebra_json(r.source()),
                "target": algebra_json(r.target()),
                "parameter": algebra_json(r.parameter()),
            });
            results.push(CommandResult::new("validate", format!("rqms.{name}"), checks, outputs));
        }
        for (name, k) in &p.kernels {
            let defect = k
                .rows()
                .iter()
                .map(|r| {
                    let neg = r.iter().fold(0.0f64, |m, &v| m.max(-v));
                    neg.max((r.iter().sum::<f64>() - 1.0).abs())
                })
                .fold(0.0, f64::max);
            let checks = vec![Check::new(KERNEL_STOCHASTIC, defect, tol)];
            results.push(CommandResult::new("validate", format!("kernels.{name}"), checks, json!({})));
        }
        for (name, c) in &p.chains {
            let checks = vec![Check::new(STATE_VALID, state_defect(&c.sigma), tol).at("σ")];
            let outputs = json!({ "steps": c.steps, "homogeneous": c.homogeneous });
            results.push(CommandResult::new("validate", format!("chains.{name}"), checks, outputs));
        }
        Ok(results)
    }

    fn rqm(&self, name: &str) -> Result<&Rqm, CliError> {
        self.problem
            .rqms
            .get(name)
            .ok_or_else(|| CliError::spec(name, format!("unresolved reference: no random quantum map named `{name}`")))
    }

    fn fixtures(&self, command: &str, target: &str) -> Fixtures {
        Fixtures::new(object_seed(self.opts.seed, command, target))
    }

    fn chain(&mut self, name: &str, depth: Option<usize>) -> Result<&TruncatedChain, CliError> {
        let decl = self.problem.chains.get(name).expect("checked on load").clone();
        let depth = if decl.homogeneous {
            depth.or(decl.depth).or(self.opts.depth).unwrap_or(DEFAULT_DEPTH)
        } else {
            decl.steps.len()
        };
        let key = (name.to_string(), depth);
        if !self.chains.contains_key(&key) {
            let field = format!("chains.{name}");
            let spec = if decl.homogeneous {
                ChainSpec::homogeneous(self.rqm(&decl.steps[0])?.clone(), decl.sigma.clone(), depth)
            } else {
                let steps = decl.steps.iter().map(|s| self.rqm(s).cloned()).collect::<Result<Vec<_>, _>>()?;
                ChainSpec::sequence(steps, decl.sigma.clone())
            };
            let chain = build_chain(&spec.with_dim_cap(self.opts.dim_cap)).map_err(core_error(field))?;
            self.chains.insert(key.clone(), chain);
        }
        Ok(&self.chains[&key])
    }

    fn execute(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        match c.command {
            CommandKind::Validate => Ok(CommandResult::new("validate", "commands", Vec::new(), json!({}))),
            CommandKind::Induce => self.induce(c),
            CommandKind::Compose => self.compose(c),
            CommandKind::Implement => self.implement(c),
            CommandKind::Chain => self.chain_cmd(c),
            CommandKind::Markov => self.markov(c),
            CommandKind::Stationarity => self.stationarity(c),
            CommandKind::Invariant => self.invariant(c),
            CommandKind::Skew => self.skew(c),
            CommandKind::Classical => self.classical(c),
            CommandKind::ProbeImplementability => self.probe(c),
            CommandKind::Semicommutative => self.semicommutative(c),
            CommandKind::All => Err(CliError::spec("commands", "`all` is only valid on the command line")),
        }
    }

    /// `max |(𝒯ρ)(b) − ρ(F b)|` over basis elements and a few random states.
    fn duality_residual(&self, r: &Rqm, f: &LinearMap, fx: &mut Fixtures, field: &str) -> Result<f64, CliError> {
        let mut worst = 0.0f64;
        for _ in 0..PROBE_STATES {
            let rho = fx.random_state(r.target());
            let t = r.transition_apply(&rho).map_err(core_error(field))?;
            for (k, b) in r.source().basis().enumerate() {
                let lhs = t.evaluate(&b).map_err(core_error(field))?;
                let rhs = rho.evaluate(&f.image(k)).map_err(core_error(field))?;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok(worst)
    }

    fn induce(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.rqm.clone().unwrap_or_default();
        let tol = self.tol(c, DEFAULT_TOL);
        let r = self.rqm(&name)?.clone();
        let field = format!("rqms.{name}");
        let f = r.induced_nfmo().map_err(core_error(&field))?;
        let mut fx = self.fixtures("induce", &name);
        let checks = vec![
            Check::new(NFMO_UNITAL, f.unit_residual(), tol),
            Check::new(NFMO_CP, choi_defect(&f), tol),
            Check::new(TRANSITION_DUALITY, self.duality_residual(&r, &f, &mut fx, &field)?, tol),
        ];
        Ok(CommandResult::new("induce", name, checks, json!({ "nfmo": map_json(&f) })))
    }

    fn compose(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let (outer_name, inner_name) = (c.outer.clone().unwrap_or_default(), c.inner.clone().unwrap_or_default());
        let target = format!("{outer_name} ◇ {inner_name}");
        let tol = self.tol(c, DEFAULT_TOL);
        let outer = self.rqm(&outer_name)?.clone();
        let inner = self.rqm(&inner_name)?.clone();
        let field = format!("compose {target}");
        let composed = implement_compose(&outer, &inner).map_err(core_error(&field))?;
        let f = composed.induced_nfmo().map_err(core_error(&field))?;
        let f1 = outer.induced_nfmo().map_err(core_error(&field))?;
        let f2 = inner.induced_nfmo().map_err(core_error(&field))?;
        let product = f1.compose(&f2).map_err(core_error(&field))?;
        let nfmo_dev = f.max_deviation(&product).map_err(core_error(&field))?;
        let mut fx = self.fixtures("compose", &target);
        let mut transition_dev = 0.0f64;
        for _ in 0..PROBE_STATES {
            let rho = fx.random_state(composed.target());
            let direct = composed.transition_apply(&rho).map_err(core_error(&field))?;
            let stepwise = inner
                .transition_apply(&outer.transition_apply(&rho).map_err(core_error(&field))?)
                .map_err(core_error(&field))?;
            transition_dev = transition_dev.max(direct.trace_distance(&stepwise).map_err(core_error(&field))?);
        }
        let checks = vec![
            Check::new(CK_NFMO, nfmo_dev, tol),
            Check::new(CK_TRANSITION, transition_dev, tol),
            Check::new(RQM_FAMILY, composed.phi().morphism_residuals().max(), tol),
        ];
        let outputs = json!({ "rqm": rqm_json(&composed) });
        if let Some(n) = &c.name {
            self.problem.rqms.insert(n.clone(), composed);
        }
        Ok(CommandResult::new("compose", target, checks, outputs))
    }

    fn implement(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let con = c.construction.expect("checked on load");
        let tol = self.tol(c, DEFAULT_TOL);
        let target_name = format!("{}({})", con.name(), c.operands.join(", "));
        let field = format!("implement {target_name}");
        let err = core_error(&field);
        let p = &self.problem;
        let rqms = || c.operands.iter().map(|o| self.rqm(o).cloned()).collect::<Result<Vec<_>, _>>();
        let nfmos = |rs: &[Rqm]| {
            rs.iter()
                .map(|r| r.induced_nfmo().map_err(core_error(&field)))
                .collect::<Result<Vec<_>, _>>()
        };
        let weights = c.weights.clone().unwrap_or_default();
        let (rqm, target) = match con {
            Construction::State => {
                let s = &p.states[&c.operands[0]];
                (implement_state(s), LinearMap::from_state(s))
            }
            Construction::Morphism => {
                let f = &p.maps[&c.operands[0]];
                (implement_morphism(f).map_err(err)?, f.clone())
            }
            Construction::Compose => {
                let rs = rqms()?;
                let fs = nfmos(&rs)?;
                let target = fs[0].compose(&fs[1]).map_err(core_error(&field))?;
                (implement_compose(&rs[0], &rs[1]).map_err(err)?, target)
            }
            Construction::DirectSum => {
                let rs = rqms()?;
                let fs = nfmos(&rs)?;
                (implement_direct_sum(&rs[0], &rs[1]).map_err(err)?, fs[0].direct_sum(&fs[1]))
            }
            Construction::Tensor => {
                let rs = rqms()?;
                let fs = nfmos(&rs)?;
                (implement_tensor(&rs[0], &rs[1]).map_err(err)?, fs[0].tensor(&fs[1]))
            }
            Construction::ConvexSum => {
                let rs = rqms()?;
                let fs = nfmos(&rs)?;
                let target = LinearMap::convex_combination(&weights, &fs, tol).map_err(core_error(&field))?;
                (implement_convex_sum(&weights, &rs, tol).map_err(err)?, target)
            }
            Construction::FiniteFamily => {
                let fs: Vec<LinearMap> = c.operands.iter().map(|o| p.maps[o].clone()).collect();
                let target = LinearMap::convex_combination(&weights, &fs, tol).map_err(core_error(&field))?;
                (implement_finite_family(&fs, &weights, tol).map_err(err)?, target)
            }
        };
        let f = rqm.induced_nfmo().map_err(core_error(&field))?;
        let checks = vec![
            Check::new(IMPLEMENT_MATCH, f.max_deviation(&target).map_err(core_error(&field))?, tol),
            Check::new(IMPLEMENT_CP, choi_defect(&f), tol),
            Check::new(RQM_FAMILY, rqm.phi().morphism_residuals().max(), tol),
        ];
        let outputs = json!({ "construction": con.name(), "rqm": rqm_json(&rqm) });
        if let Some(n) = &c.name {
            self.problem.rqms.insert(n.clone(), rqm);
        }
        Ok(CommandResult::new("implement", target_name, checks, outputs))
    }

    fn chain_cmd(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.chain.clone().unwrap_or_default();
        let tol = self.tol(c, DEFAULT_TOL);
        let field = format!("chains.{name}");
        let chain = self.chain(&name, c.depth)?;
        let mut marginals = Vec::new();
        let mut defect = 0.0f64;
        for n in 0..=chain.depth() {
            let m = chain.marginal(n).map_err(core_error(&field))?;
            defect = defect.max(state_defect(&m));
            marginals.push(state_json(&m));
        }
        let dims: Vec<usize> = (0..=chain.depth()).map(|n| chain.level(n).map_or(0, |a| a.dim())).collect();
        let checks = vec![
            Check::new(CHAIN_PSI, chain.psi_residual(), tol),
            Check::new(CHAIN_MARGINAL, defect, tol),
        ];
        let outputs = json!({
            "depth": chain.depth(),
            "homogeneous": chain.is_homogeneous(),
            "level_dims": dims,
            "marginals": marginals,
        });
        Ok(CommandResult::new("chain", name, checks, outputs))
    }

    fn markov(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.chain.clone().unwrap_or_default();
        let tol = self.tol(c, DEFAULT_TOL);
        let seed = object_seed(self.opts.seed, "markov", &name);
        let samples = c.samples.unwrap_or(MARKOV_SAMPLES);
        let field = format!("chains.{name}");
        let chain = self.chain(&name, c.depth)?;
        let levels: Vec<usize> = match c.level {
            Some(l) => vec![l],
            None => (0..chain.depth()).collect(),
        };
        let mut checks = Vec::new();
        let mut exhaustive = Vec::new();
        for n in levels {
            let rep = chain
                .verify_markov(n, MARKOV_PAIR_LIMIT, samples, seed, tol)
                .map_err(core_error(&field))?;
            let at = format!("n={n}");
            checks.push(Check::new(MARKOV_MODULE, rep.module_property, tol).at(&at));
            checks.push(Check::new(MARKOV_STATE, rep.state_compatibility, tol).at(&at));
            checks.push(Check::new(MARKOV_CONTAINMENT, rep.containment, tol).at(&at));
            checks.push(Check::new(MARKOV_CONSISTENCY, rep.consistency, tol).at(&at));
            exhaustive.push(json!({ "level": n, "exhaustive": rep.exhaustive }));
        }
        Ok(CommandResult::new("markov", name, checks, json!({ "levels": exhaustive })))
    }

    fn stationarity(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.chain.clone().unwrap_or_default();
        let tol = self.tol(c, STATIONARITY_TOL);
        let defaults = StationarityOptions::default();
        let opts = StationarityOptions {
            r_max: c.r_max.unwrap_or(defaults.r_max),
            l_max: c.l_max.unwrap_or(defaults.l_max),
            samples: c.samples.unwrap_or(defaults.samples),
            seed: object_seed(self.opts.seed, "stationarity", &name),
            tolerance: tol,
        };
        let field = format!("chains.{name}");
        let chain = self.chain(&name, c.depth)?;
        if !chain.is_homogeneous() {
            return Err(CliError::spec(field, "stationarity is defined for homogeneous chains only"));
        }
        let rep = chain.check_stationarity(&opts).map_err(core_error(&field))?;
        let step = chain.step(1).map_err(core_error(&field))?;
        let invariance = verify_invariant(step, chain.sigma()).map_err(core_error(&field))?;
        let checks = vec![
            Check::new(STATIONARITY_SHIFT, rep.max_violation, tol),
            Check::info(INVARIANT_FIXED_POINT, invariance, DEFAULT_TOL).at("σ"),
        ];
        let worst = rep.worst.as_ref().map(|w| {
            json!({ "times": w.times, "word": w.word, "shift": w.shift, "violation": w.violation })
        });
        let by: Vec<Value> = rep
            .by_length_and_shift
            .iter()
            .map(|&(r, l, v)| json!({ "r": r, "shift": l, "max_violation": v }))
            .collect();
        let outputs = json!({
            "depth": chain.depth(),
            "r_max": opts.r_max,
            "l_max": opts.l_max,
            "by_length_and_shift": by,
            "worst": worst,
            "words_checked": rep.words_checked,
            "exhaustive": rep.exhaustive,
            "exhaustive_word_limit": EXHAUSTIVE_WORD_LIMIT,
        });
        Ok(CommandResult::new("stationarity", name, checks, outputs))
    }

    fn invariant(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.rqm.clone().unwrap_or_default();
        let tol = self.tol(c, DEFAULT_TOL);
        let r = self.rqm(&name)?;
        if !r.is_endomorphic() {
            return Err(CliError::spec(format!("rqms.{name}"), "invariant states need an endomorphic map"));
        }
        let rep = invariant_states(r).map_err(core_error(format!("rqms.{name}")))?;
        let checks = vec![Check::new(INVARIANT_FIXED_POINT, rep.residual, tol)];
        let outputs = json!({
            "fixed_dim": rep.fixed_dim,
            "canonical": state_json(&rep.canonical),
            "cesaro": cesaro_json(rep.method),
        });
        Ok(CommandResult::new("invariant", name, checks, outputs))
    }

    fn skew(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.rqm.clone().unwrap_or_default();
        let tol = self.tol(c, DEFAULT_TOL);
        let depth = c.depth.or(self.opts.depth).unwrap_or(DEFAULT_DEPTH);
        let field = format!("rqms.{name}");
        let r = self.rqm(&name)?.clone();
        if !r.is_endomorphic() {
            return Err(CliError::spec(field, "skew products need an endomorphic map"));
        }
        let (sigma, source) = match &c.sigma {
            Some(s) => (self.problem.states[s].clone(), s.clone()),
            None => (invariant_states(&r).map_err(core_error(&field))?.canonical, "canonical".to_string()),
        };
        let rep = verify_skew_invariance(&r, &sigma, depth, tol, self.opts.dim_cap).map_err(core_error(&field))?;
        let checks = vec![
            Check::new(SKEW_TRANSFER, rep.identity_residual, tol),
            Check::new(SKEW_INVARIANCE, rep.invariance_violation, tol),
            Check::info(INVARIANT_FIXED_POINT, rep.transition_residual, tol).at("σ"),
        ];
        let outputs = json!({
            "depth": rep.depth,
            "sigma": source,
            "basis_violation": rep.basis_violation,
        });
        Ok(CommandResult::new("skew", name, checks, outputs))
    }

    fn classical(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let tol = self.tol(c, DEFAULT_TOL);
        let mut checks = Vec::new();
        let mut outputs = serde_json::Map::new();
        let (target, m, k) = match (&c.random_map, &c.kernel) {
            (Some(name), _) => {
                let m = self.problem.random_maps[name].clone();
                let k = kernel_of_random_map(&m);
                (format!("random_maps.{name}"), m, k)
            }
            (None, Some(name)) => {
                let k = self.problem.kernels[name].clone();
                let field = format!("kernels.{name}");
                let m = implement_kernel(&k).map_err(core_error(&field))?;
                checks.push(Check::new(CLASSICAL_ROUND_TRIP, kernel_of_random_map(&m).max_deviation(&k), tol));
                outputs.insert("implementation".into(), random_map_json(&m));
                (field, m, k)
            }
            (None, None) => unreachable!("checked on load"),
        };
        let field = target.clone();
        let r = lift_random_map(&m);
        let f = r.induced_nfmo().map_err(core_error(&field))?;
        checks.push(Check::new(
            CLASSICAL_NFMO,
            f.max_deviation(&fmo_of_kernel(&k)).map_err(core_error(&field))?,
            tol,
        ));
        outputs.insert("kernel".into(), kernel_json(&k));
        if m.x_size() == m.y_size() {
            let depth = c.depth.or(self.opts.depth).unwrap_or(DEFAULT_DEPTH);
            let n = m.x_size();
            let sigma = match &c.sigma {
                Some(s) => {
                    let st = &self.problem.states[s];
                    if !st.algebra().is_commutative() || st.algebra().dim() != n {
                        return Err(CliError::spec(&field, format!("state `{s}` is not a distribution on {n} points")));
                    }
                    st.densities().iter().map(|d| d[(0, 0)].re).collect()
                }
                None => vec![1.0 / n as f64; n],
            };
            let start = State::from_probabilities(&sigma, tol).map_err(core_error(&field))?;
            let spec = ChainSpec::homogeneous(r.clone(), start, depth).with_dim_cap(self.opts.dim_cap);
            let chain = build_chain(&spec).map_err(core_error(&field))?;
            let maps = vec![m.clone(); depth];
            let mut dev = 0.0f64;
            for t in 0..=depth {
                let q = chain.marginal(t).map_err(core_error(&field))?;
                let cl = classical_chain_marginals(&maps, &sigma, t).map_err(core_error(&field))?;
                for (d, p) in q.densities().iter().zip(&cl) {
                    dev = dev.max((d[(0, 0)].re - p).abs());
                }
            }
            checks.push(Check::new(CLASSICAL_MARGINALS, dev, tol).at(format!("n≤{depth}")));

            let pi = stationary_distribution(&k).map_err(core_error(&field))?;
            let pushed = k.push(&pi).map_err(core_error(&field))?;
            let fixed = pushed.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let pi_state = State::from_probabilities(&pi, tol).map_err(core_error(&field))?;
            let quantum = verify_invariant(&r, &pi_state).map_err(core_error(&field))?;
            checks.push(Check::new(CLASSICAL_STATIONARY, fixed.max(quantum), tol));
            outputs.insert("stationary".into(), vector_json(&pi));
        }
        Ok(CommandResult::new("classical", target, checks, Value::Object(outputs)))
    }

    fn probe(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.map.clone().unwrap_or_default();
        let tol = self.tol(c, DILATION_TOL);
        let field = format!("maps.{name}");
        let f = self.problem.maps[&name].clone();
        let f = if f.kind() == MapKind::Raw {
            f.validate_cp_unital(self.opts.tolerance.unwrap_or(DEFAULT_TOL))
                .map_err(core_error(&field))?
        } else {
            f
        };
        let dil = stinespring_dilate(&f, tol).map_err(core_error(&field))?;
        let mut checks = vec![
            Check::new(STINESPRING_ISOMETRY, dil.isometry_residual(), tol),
            Check::new(STINESPRING_DILATION, dil.reconstruction_residual(&f).map_err(core_error(&field))?, tol),
        ];
        let search = PaddingSearch {
            attempts: c.attempts.unwrap_or(PaddingSearch::default().attempts),
        };
        let outcome = implement_from_stinespring(&f, search, tol).map_err(core_error(&field))?;
        let outputs = match outcome {
            StinespringOutcome::Implemented(w) => {
                checks.push(Check::new(STINESPRING_WITNESS, w.residual, tol));
                json!({
                    "outcome": "implemented",
                    "k_dim": dil.k_dim(),
                    "copies": w.copies,
                    "padding": w.padding,
                    "padding_multiplicities": w.padding_multiplicities,
                    "rqm": rqm_json(&w.rqm),
                })
            }
            StinespringOutcome::Failed(fail) => json!({
                "outcome": "no_witness",
                "k_dim": dil.k_dim(),
                "failure": failure_json(&fail),
            }),
        };
        Ok(CommandResult::new("probe-implementability", name, checks, outputs))
    }

    fn semicommutative(&mut self, c: &CommandDecl) -> Result<CommandResult, CliError> {
        let name = c.chain.clone().unwrap_or_default();
        let tol = self.tol(c, DEFAULT_TOL);
        let field = format!("chains.{name}");
        let chain = self.chain(&name, c.depth)?;
        let rep = chain.check_semi_commutative(tol).map_err(core_error(&field))?;
        let checks = vec![Check::info(SEMICOMMUTATIVE, rep.max_commutator, tol)];
        let outputs = json!({
            "condition_holds": rep.condition_holds,
            "worst_levels": rep.worst_levels,
            "condition": rqmkit_core::chain::SemiCommutativityReport::CONDITION,
        });
        Ok(CommandResult::new("semicommutative", name, checks, outputs))
    }
}
