//! Problem files.
//!
//! A problem file is a JSON object with optional sections `algebras`,
//! `elements`, `states`, `maps`, `rqms`, `kernels`, `random_maps`, `chains`
//! and `commands`. Complex numbers are `[re, im]` pairs, matrices are
//! row-major nested arrays, algebras are `{"blocks": [..]}` (or the name of
//! a declared algebra) and maps are given by the images of the matrix units
//! keyed `"block.row.col"`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rqmkit_core::classical::lift_random_map;
use rqmkit_core::linalg::CMatrix;
use rqmkit_core::{invariant_states, Algebra, ClassicalRandomMap, Element, Fixtures, Kernel, LinearMap, Rqm, State, DEFAULT_TOL};
use serde::Deserialize;

use crate::error::{core_error, CliError};

pub type RawComplex = [f64; 2];
pub type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Validate,
    Induce,
    Compose,
    Implement,
    Chain,
    Markov,
    Stationarity,
    Invariant,
    Skew,
    Classical,
    ProbeImplementability,
    Semicommutative,
    /// Every command listed in the file, or every default check if none is listed.
    All,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Validate => "validate",
            CommandKind::Induce => "induce",
            CommandKind::Compose => "compose",
            CommandKind::Implement => "implement",
            CommandKind::Chain => "chain",
            CommandKind::Markov => "markov",
            CommandKind::Stationarity => "stationarity",
            CommandKind::Invariant => "invariant",
            CommandKind::Skew => "skew",
            CommandKind::Classical => "classical",
            CommandKind::ProbeImplementability => "probe-implementability",
            CommandKind::Semicommutative => "semicommutative",
            CommandKind::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    State,
    Morphism,
    Compose,
    DirectSum,
    Tensor,
    ConvexSum,
    FiniteFamily,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::State => "state",
            Construction::Morphism => "morphism",
            Construction::Compose => "compose",
            Construction::DirectSum => "direct_sum",
            Construction::Tensor => "tensor",
            Construction::ConvexSum => "convex_sum",
            Construction::FiniteFamily => "finite_family",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredKind {
    #[default]
    Raw,
    CpUnital,
    Morphism,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAlgebra {
    pub blocks: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum AlgebraRef {
    Named(String),
    Inline(RawAlgebra),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawElement {
    pub algebra: AlgebraRef,
    pub blocks: Vec<RawMatrix>,
}

/// Exactly one of `densities`, `probabilities`, `maximally_mixed` and
/// `invariant_of` must be present.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawState {
    pub algebra: Option<AlgebraRef>,
    pub densities: Option<Vec<RawMatrix>>,
    pub probabilities: Option<Vec<f64>>,
    #[serde(default)]
    pub maximally_mixed: bool,
    /// The canonical invariant state of a declared random quantum map.
    pub invariant_of: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Named(String),
    Inline(RawState),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGen {
    /// Number of Kraus operators for random CP maps.
    pub kraus: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMap {
    pub domain: AlgebraRef,
    pub codomain: AlgebraRef,
    pub images: Option<BTreeMap<String, Vec<RawMatrix>>>,
    #[serde(default)]
    pub kind: DeclaredKind,
    pub random: Option<RandomGen>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomRqm {
    pub source: AlgebraRef,
    pub target: AlgebraRef,
    pub parameter: AlgebraRef,
}

/// `phi` (with `target`, `parameter`, `nu`), `random`, `trivial` or `lift`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRqm {
    pub target: Option<AlgebraRef>,
    pub parameter: Option<AlgebraRef>,
    pub phi: Option<String>,
    pub nu: Option<StateRef>,
    pub random: Option<RandomRqm>,
    pub trivial: Option<AlgebraRef>,
    /// Name of a classical random map to lift.
    pub lift: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRandomMap {
    pub y: usize,
    pub table: Vec<Vec<usize>>,
    pub nu: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChain {
    pub rqm: Option<String>,
    pub rqms: Option<Vec<String>>,
    pub sigma: StateRef,
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandDecl {
    pub command: CommandKind,
    pub rqm: Option<String>,
    pub outer: Option<String>,
    pub inner: Option<String>,
    pub construction: Option<Construction>,
    #[serde(default)]
    pub operands: Vec<String>,
    pub weights: Option<Vec<f64>>,
    pub map: Option<String>,
    pub chain: Option<String>,
    pub sigma: Option<String>,
    pub kernel: Option<String>,
    pub random_map: Option<String>,
    pub level: Option<usize>,
    pub depth: Option<usize>,
    pub r_max: Option<usize>,
    pub l_max: Option<usize>,
    pub samples: Option<usize>,
    pub attempts: Option<usize>,
    pub tolerance: Option<f64>,
    /// Store the produced random quantum map under this name.
    #[serde(rename = "as")]
    pub name: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    #[serde(default)]
    pub algebras: BTreeMap<String, RawAlgebra>,
    #[serde(default)]
    pub elements: BTreeMap<String, RawElement>,
    #[serde(default)]
    pub states: BTreeMap<String, RawState>,
    #[serde(default)]
    pub maps: BTreeMap<String, RawMap>,
    #[serde(default)]
    pub rqms: BTreeMap<String, RawRqm>,
    #[serde(default)]
    pub kernels: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    pub random_maps: BTreeMap<String, RawRandomMap>,
    #[serde(default)]
    pub chains: BTreeMap<String, RawChain>,
    #[serde(default)]
    pub commands: Vec<CommandDecl>,
}

#[derive(Clone, Debug)]
pub struct ChainDecl {
    /// Names of the step maps; a single entry for homogeneous chains.
    pub steps: Vec<String>,
    pub homogeneous: bool,
    pub sigma: State,
    pub depth: Option<usize>,
}

/// A fully resolved and validated problem.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub algebras: BTreeMap<String, Algebra>,
    pub elements: BTreeMap<String, Element>,
    pub states: BTreeMap<String, State>,
    pub maps: BTreeMap<String, LinearMap>,
    pub declared_kinds: BTreeMap<String, DeclaredKind>,
    pub rqms: BTreeMap<String, Rqm>,
    pub kernels: BTreeMap<String, Kernel>,
    pub random_maps: BTreeMap<String, ClassicalRandomMap>,
    pub chains: BTreeMap<String, ChainDecl>,
    pub commands: Vec<CommandDecl>,
}

#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance: DEFAULT_TOL,
        }
    }
}

pub fn parse_spec(text: &str, opts: LoadOptions) -> Result<Problem, CliError> {
    let raw: RawSpec = serde_json::from_str(text)?;
    Resolver {
        opts,
        problem: Problem::default(),
    }
    .resolve(raw)
}

/// Seed for a randomly generated object, stable under reordering of the file.
pub fn object_seed(seed: u64, section: &str, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in section.bytes().chain(*b"/").chain(name.bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

pub fn image_key(a: &Algebra, coord: usize) -> String {
    let (j, p, q) = a.locate(coord);
    format!("{j}.{p}.{q}")
}

fn parse_matrix(raw: &RawMatrix, field: &str) -> Result<CMatrix, CliError> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, Vec::len);
    if let Some(i) = raw.iter().position(|r| r.len() != cols) {
        return Err(CliError::spec(field, format!("row {i} has {} entries, expected {cols}", raw[i].len())));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| Complex64::new(raw[i][j][0], raw[i][j][1])))
}

fn parse_blocks(a: &Algebra, raw: &[RawMatrix], field: &str) -> Result<Element, CliError> {
    let mats = raw
        .iter()
        .enumerate()
        .map(|(j, m)| parse_matrix(m, &format!("{field}[{j}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Element::new(a, mats).map_err(core_error(field))
}

struct Resolver {
    opts: LoadOptions,
    problem: Problem,
}

impl Resolver {
    fn tol(&self) -> f64 {
        self.opts.tolerance
    }

    fn fixtures(&self, section: &str, name: &str) -> Fixtures {
        Fixtures::new(object_seed(self.opts.seed, section, name))
    }

    fn resolve(mut self, raw: RawSpec) -> Result<Problem, CliError> {
        for (name, a) in &raw.algebras {
            let alg = Algebra::new(a.blocks.clone()).map_err(core_error(format!("algebras.{name}")))?;
            self.problem.algebras.insert(name.clone(), alg);
        }
        for (name, rows) in raw.kernels {
            let k = Kernel::new(rows, self.tol()).map_err(core_error(format!("kernels.{name}")))?;
            self.problem.kernels.insert(name, k);
        }
        for (name, m) in raw.random_maps {
            let field = format!("random_maps.{name}");
            let m = ClassicalRandomMap::new(m.y, m.table, m.nu, self.tol()).map_err(core_error(field))?;
            self.problem.random_maps.insert(name, m);
        }
        for (name, e) in &raw.elements {
            let field = format!("elements.{name}");
            let a = self.algebra(&e.algebra, &format!("{field}.algebra"))?;
            let x = parse_blocks(&a, &e.blocks, &format!("{field}.blocks"))?;
            self.problem.elements.insert(name.clone(), x);
        }

        // states that do not depend on random quantum maps come first
        let (late, early): (Vec<_>, Vec<_>) = raw.states.iter().partition(|(_, s)| s.invariant_of.is_some());
        for (name, s) in early {
            let st = self.state(s, &format!("states.{name}"), false)?;
            self.problem.states.insert(name.clone(), st);
        }
        for (name, m) in &raw.maps {
            let f = self.map(name, m)?;
            self.problem.declared_kinds.insert(name.clone(), m.kind);
            self.problem.maps.insert(name.clone(), f);
        }
        let late_names: BTreeSet<&String> = late.iter().map(|(n, _)| *n).collect();
        for (name, r) in &raw.rqms {
            let r = self.rqm(name, r, &late_names)?;
            self.problem.rqms.insert(name.clone(), r);
        }
        for (name, s) in late {
            let st = self.state(s, &format!("states.{name}"), true)?;
            self.problem.states.insert(name.clone(), st);
        }
        for (name, c) in &raw.chains {
            let decl = self.chain(name, c)?;
            self.problem.chains.insert(name.clone(), decl);
        }
        self.check_commands(&raw.commands)?;
        self.problem.commands = raw.commands;
        Ok(self.problem)
    }

    fn algebra(&self, r: &AlgebraRef, field: &str) -> Result<Algebra, CliError> {
        match r {
            AlgebraRef::Named(n) => self
                .problem
                .algebras
                .get(n)
                .cloned()
                .ok_or_else(|| CliError::spec(field, format!("unknown algebra `{n}`"))),
            AlgebraRef::Inline(a) => Algebra::new(a.blocks.clone()).map_err(core_error(field)),
        }
    }

    fn state(&self, s: &RawState, field: &str, allow_invariant: bool) -> Result<State, CliError> {
        let given = [
            s.densities.is_some(),
            s.probabilities.is_some(),
            s.maximally_mixed,
            s.invariant_of.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(CliError::spec(
                field,
                "give exactly one of `densities`, `probabilities`, `maximally_mixed`, `invariant_of`",
            ));
        }
        let algebra = match &s.algebra {
            Some(a) => Some(self.algebra(a, &format!("{field}.algebra"))?),
            None => None,
        };
        let need_algebra = || {
            algebra
                .clone()
                .ok_or_else(|| CliError::spec(field, "an `algebra` is required for this form"))
        };
        let state = if let Some(d) = &s.densities {
            let a = need_algebra()?;
            let mats = d
                .iter()
                .enumerate()
                .map(|(j, m)| parse_matrix(m, &format!("{field}.densities[{j}]")))
                .collect::<Result<Vec<_>, _>>()?;
            State::new(&a, mats, self.tol()).map_err(core_error(field))?
        } else if let Some(p) = &s.probabilities {
            State::from_probabilities(p, self.tol()).map_err(core_error(field))?
        } else if s.maximally_mixed {
            State::maximally_mixed(&need_algebra()?)
        } else {
            let name = s.invariant_of.as_deref().unwrap_or_default();
            if !allow_invariant {
                return Err(CliError::spec(
                    field,
                    "`invariant_of` is not allowed here because random quantum maps are resolved later",
                ));
            }
            let r = self.rqm_named(name, &format!("{field}.invariant_of"))?;
            if !r.is_endomorphic() {
                return Err(CliError::spec(field, format!("random quantum map `{name}` is not an endomorphism")));
            }
            invariant_states(r).map_err(core_error(field))?.canonical
        };
        if let Some(a) = algebra {
            if state.algebra() != &a {
                return Err(CliError::spec(field, format!("state lives on {:?}, declared {:?}", state.algebra(), a)));
            }
        }
        Ok(state)
    }

    fn state_ref(&self, r: &StateRef, field: &str, allow_invariant: bool) -> Result<State, CliError> {
        match r {
            StateRef::Named(n) => self
                .problem
                .states
                .get(n)
                .cloned()
                .ok_or_else(|| CliError::spec(field, format!("unknown state `{n}`"))),
            StateRef::Inline(s) => self.state(s, field, allow_invariant),
        }
    }

    fn rqm_named(&self, name: &str, field: &str) -> Result<&Rqm, CliError> {
        self.problem
            .rqms
            .get(name)
            .ok_or_else(|| CliError::spec(field, format!("unknown random quantum map `{name}`")))
    }

    fn map(&self, name: &str, m: &RawMap) -> Result<LinearMap, CliError> {
        let field = format!("maps.{name}");
        let dom = self.algebra(&m.domain, &format!("{field}.domain"))?;
        let cod = self.algebra(&m.codomain, &format!("{field}.codomain"))?;
        let f = match (&m.random, &m.images) {
            (Some(_), Some(_)) => return Err(CliError::spec(&field, "give either `images` or `random`, not both")),
            (None, None) => return Err(CliError::spec(&field, "missing `images`")),
            (Some(g), None) => {
                let mut fx = self.fixtures("maps", name);
                match m.kind {
                    DeclaredKind::CpUnital => fx.random_cp_unital(&dom, &cod, g.kraus.unwrap_or(2)),
                    DeclaredKind::Morphism => fx
                        .random_morphism(&dom, &cod)
                        .ok_or_else(|| CliError::spec(&field, format!("no unital morphism {dom:?} → {cod:?} exists")))?,
                    DeclaredKind::Raw => {
                        return Err(CliError::spec(&field, "random maps need `kind` cp_unital or morphism"))
                    }
                }
            }
            (None, Some(images)) => {
                let keys: BTreeSet<String> = (0..dom.dim()).map(|k| image_key(&dom, k)).collect();
                if let Some(extra) = images.keys().find(|k| !keys.contains(*k)) {
                    return Err(CliError::spec(
                        format!("{field}.images"),
                        format!("\"{extra}\" is not a matrix unit of {dom:?}"),
                    ));
                }
                let mut elems = Vec::with_capacity(dom.dim());
                for k in 0..dom.dim() {
                    let key = image_key(&dom, k);
                    let raw = images
                        .get(&key)
                        .ok_or_else(|| CliError::spec(format!("{field}.images"), format!("missing basis image \"{key}\"")))?;
                    elems.push(parse_blocks(&cod, raw, &format!("{field}.images.\"{key}\""))?);
                }
                LinearMap::from_basis_images(&dom, &cod, &elems).map_err(core_error(&field))?
            }
        };
        let tol = self.tol();
        match m.kind {
            DeclaredKind::Raw => Ok(f),
            DeclaredKind::CpUnital => f.validate_cp_unital(tol).map_err(core_error(field)),
            DeclaredKind::Morphism => f.validate_morphism(tol).map_err(core_error(field)),
        }
    }

    fn rqm(&self, name: &str, r: &RawRqm, late: &BTreeSet<&String>) -> Result<Rqm, CliError> {
        let field = format!("rqms.{name}");
        let forms = [r.phi.is_some(), r.random.is_some(), r.trivial.is_some(), r.lift.is_some()];
        if forms.iter().filter(|&&f| f).count() != 1 {
            return Err(CliError::spec(&field, "give exactly one of `phi`, `random`, `trivial`, `lift`"));
        }
        if let Some(phi) = &r.phi {
            let target = r
                .target
                .as_ref()
                .ok_or_else(|| CliError::spec(&field, "`phi` needs a `target` algebra"))?;
            let parameter = r
                .parameter
                .as_ref()
                .ok_or_else(|| CliError::spec(&field, "`phi` needs a `parameter` algebra"))?;
            let target = self.algebra(target, &format!("{field}.target"))?;
            let parameter = self.algebra(parameter, &format!("{field}.parameter"))?;
            let f = self
                .problem
                .maps
                .get(phi)
                .ok_or_else(|| CliError::spec(format!("{field}.phi"), format!("unknown map `{phi}`")))?;
            let nu = r.nu.as_ref().ok_or_else(|| CliError::spec(&field, "`phi` needs a state `nu`"))?;
            if let StateRef::Named(n) = nu {
                if late.contains(n) {
                    return Err(CliError::spec(
                        format!("{field}.nu"),
                        format!("state `{n}` depends on a random quantum map and cannot parameterize one"),
                    ));
                }
            }
            let nu = self.state_ref(nu, &format!("{field}.nu"), false)?;
            return Rqm::from_parts(&target, &parameter, f.clone(), nu).map_err(core_error(field));
        }
        if r.target.is_some() || r.parameter.is_some() || r.nu.is_some() {
            return Err(CliError::spec(&field, "`target`, `parameter` and `nu` belong with `phi`"));
        }
        if let Some(g) = &r.random {
            let s = self.algebra(&g.source, &format!("{field}.random.source"))?;
            let t = self.algebra(&g.target, &format!("{field}.random.target"))?;
            let p = self.algebra(&g.parameter, &format!("{field}.random.parameter"))?;
            return self
                .fixtures("rqms", name)
                .random_rqm(&s, &t, &p)
                .ok_or_else(|| CliError::spec(field, format!("no unital morphism {s:?} → {t:?} ⊗ {p:?} exists")));
        }
        if let Some(a) = &r.trivial {
            return Ok(Rqm::trivial(&self.algebra(a, &format!("{field}.trivial"))?));
        }
        let m = r.lift.as_deref().unwrap_or_default();
        let m = self
            .problem
            .random_maps
            .get(m)
            .ok_or_else(|| CliError::spec(format!("{field}.lift"), format!("unknown random map `{m}`")))?;
        Ok(lift_random_map(m))
    }

    fn chain(&self, name: &str, c: &RawChain) -> Result<ChainDecl, CliError> {
        let field = format!("chains.{name}");
        let (steps, homogeneous) = match (&c.rqm, &c.rqms) {
            (Some(r), None) => (vec![r.clone()], true),
            (None, Some(rs)) if !rs.is_empty() => (rs.clone(), false),
            _ => return Err(CliError::spec(&field, "give either `rqm` or a non-empty `rqms`")),
        };
        if !homogeneous && c.depth.is_some_and(|d| d != steps.len()) {
            return Err(CliError::spec(&field, "`depth` of a chain given by `rqms` must equal their number"));
        }
        let sigma = self.state_ref(&c.sigma, &format!("{field}.sigma"), true)?;
        for (i, s) in steps.iter().enumerate() {
            let r = self.rqm_named(s, &format!("{field}.rqms[{i}]"))?;
            if !r.is_endomorphic() || r.source() != sigma.algebra() {
                return Err(CliError::spec(
                    &field,
                    format!(
                        "step `{s}` goes {:?} → {:?}, the chain needs maps on {:?}",
                        r.source(),
                        r.target(),
                        sigma.algebra()
                    ),
                ));
            }
        }
        Ok(ChainDecl {
            steps,
            homogeneous,
            sigma,
            depth: if homogeneous { c.depth } else { Some(c.rqms.as_ref().map_or(0, Vec::len)) },
        })
    }

    fn check_commands(&self, cmds: &[CommandDecl]) -> Result<(), CliError> {
        let p = &self.problem;
        let mut rqms: BTreeSet<String> = p.rqms.keys().cloned().collect();
        for (i, c) in cmds.iter().enumerate() {
            let field = format!("commands[{i}]");
            let need = |what: &str, v: &Option<String>| {
                v.clone()
                    .ok_or_else(|| CliError::spec(&field, format!("`{}` needs `{what}`", c.command.name())))
            };
            let exists = |section: &str, name: &str, ok: bool| {
                if ok {
                    Ok(())
                } else {
                    Err(CliError::spec(&field, format!("unresolved reference: no {section} named `{name}`")))
                }
            };
            let rqm_ok = |name: &str| exists("random quantum map", name, rqms.contains(name));
            match c.command {
                CommandKind::All => {
                    return Err(CliError::spec(&field, "`all` is only valid on the command line"));
                }
                CommandKind::Validate => {}
                CommandKind::Induce | CommandKind::Invariant => rqm_ok(&need("rqm", &c.rqm)?)?,
                CommandKind::Skew => {
                    rqm_ok(&need("rqm", &c.rqm)?)?;
                    if let Some(s) = &c.sigma {
                        exists("state", s, p.states.contains_key(s))?;
                    }
                }
                CommandKind::Compose => {
                    rqm_ok(&need("outer", &c.outer)?)?;
                    rqm_ok(&need("inner", &c.inner)?)?;
                }
                CommandKind::Implement => {
                    let con = c
                        .construction
                        .ok_or_else(|| CliError::spec(&field, "`implement` needs `construction`"))?;
                    let arity = match con {
                        Construction::State | Construction::Morphism => Some(1),
                        Construction::Compose | Construction::DirectSum | Construction::Tensor => Some(2),
                        Construction::ConvexSum | Construction::FiniteFamily => None,
                    };
                    match arity {
                        Some(n) if c.operands.len() != n => {
                            return Err(CliError::spec(
                                &field,
                                format!("construction {} takes {n} operands, got {}", con.name(), c.operands.len()),
                            ))
                        }
                        None if c.operands.is_empty() => {
                            return Err(CliError::spec(&field, format!("construction {} needs operands", con.name())))
                        }
                        None if c.weights.as_ref().map(Vec::len) != Some(c.operands.len()) => {
                            return Err(CliError::spec(&field, "`weights` must match `operands` one to one"))
                        }
                        _ => {}
                    }
                    for o in &c.operands {
                        match con {
                            Construction::State => exists("state", o, p.states.contains_key(o))?,
                            Construction::Morphism | Construction::FiniteFamily => exists("map", o, p.maps.contains_key(o))?,
                            _ => rqm_ok(o)?,
                        }
                    }
                }
                CommandKind::Chain | CommandKind::Markov | CommandKind::Stationarity | CommandKind::Semicommutative => {
                    let ch = need("chain", &c.chain)?;
                    exists("chain", &ch, p.chains.contains_key(&ch))?;
                }
                CommandKind::Classical => match (&c.random_map, &c.kernel) {
                    (Some(m), None) => exists("random map", m, p.random_maps.contains_key(m))?,
                    (None, Some(k)) => exists("kernel", k, p.kernels.contains_key(k))?,
                    _ => return Err(CliError::spec(&field, "`classical` needs exactly one of `random_map`, `kernel`")),
                },
                CommandKind::ProbeImplementability => {
                    let m = need("map", &c.map)?;
                    exists("map", &m, p.maps.contains_key(&m))?;
                }
            }
            if let Some(n) = &c.name {
                if !matches!(c.command, CommandKind::Compose | CommandKind::Implement) {
                    return Err(CliError::spec(&field, "only `compose` and `implement` produce named results"));
                }
                if !rqms.insert(n.clone()) {
                    return Err(CliError::spec(&field, format!("random quantum map `{n}` already exists")));
                }
            }
        }
        Ok(())
    }
}
