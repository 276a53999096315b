//! Machine-readable reports.
//!
//! Each check carries a stable identifier and the identity it tests, so a
//! failing report names exactly what was violated. Timing is kept out of
//! the report so that reruns with the same seed are byte-identical.

use std::time::Duration;

use rqmkit_core::linalg::CMatrix;
use rqmkit_core::{Algebra, LinearMap, Rqm, State};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::spec::image_key;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug)]
pub struct CheckDef {
    pub id: &'static str,
    pub identity: &'static str,
}

macro_rules! checks {
    ($($name:ident = $id:literal : $identity:literal;)*) => {
        $(pub const $name: CheckDef = CheckDef { id: $id, identity: $identity };)*
        /// Every check this tool can emit.
        pub const CATALOGUE: &[CheckDef] = &[$($name),*];
    };
}

checks! {
    STATE_VALID = "state.density": "ρ = ρ*, ρ ≥ 0, Σ tr ρⱼ = 1";
    MAP_MORPHISM = "map.morphism": "φ(xy) = φ(x)φ(y), φ(x*) = φ(x)*, φ(1) = 1";
    MAP_CP_UNITAL = "map.cp_unital": "Choi blocks ≥ 0 and F(1) = 1";
    KERNEL_STOCHASTIC = "kernel.stochastic": "K ≥ 0 and Σ_y K(x, y) = 1";
    RQM_FAMILY = "rqm.family_morphism": "φ: B → A ⊗ C is a unital *-homomorphism";
    NFMO_UNITAL = "nfmo.unital": "F_{φ,ν}(1) = 1";
    NFMO_CP = "nfmo.completely_positive": "Choi blocks of F_{φ,ν} ≥ 0";
    TRANSITION_DUALITY = "transition.duality": "(𝒯ρ)(b) = ρ(F_{φ,ν} b)";
    CK_NFMO = "ck.nfmo": "F_{φ₁◇φ₂, ν₁⊗ν₂} = F_{φ₁,ν₁} F_{φ₂,ν₂}";
    CK_TRANSITION = "ck.transition": "𝒯_{φ₁◇φ₂, ν₁⊗ν₂} = 𝒯_{φ₂,ν₂} 𝒯_{φ₁,ν₁}";
    IMPLEMENT_MATCH = "implement.match": "F_{φ,ν} equals the target map";
    IMPLEMENT_CP = "implement.completely_positive": "Choi blocks of F_{φ,ν} ≥ 0";
    CHAIN_PSI = "chain.psi_morphism": "ψₙ = ψₙ₋₁ ◇ φₙ is a unital *-homomorphism";
    CHAIN_MARGINAL = "chain.marginal_state": "μ ∘ ψₙ is a state";
    MARKOV_MODULE = "markov.module_property": "F̄ₙ(xy) = x F̄ₙ(y) for x ∈ Bₙ";
    MARKOV_STATE = "markov.state_compatibility": "μₙ ∘ F̄ₙ = μₙ₊₁";
    MARKOV_CONTAINMENT = "markov.containment": "F̄ₙ(ψₙ₊₁(a)) = ψₙ(F_{φₙ₊₁,νₙ₊₁}(a))";
    MARKOV_CONSISTENCY = "markov.consistency": "μₙ₊₁(x ⊗ 1) = μₙ(x)";
    STATIONARITY_SHIFT = "stationarity.shift_invariance": "μ(ψ_{t₁+ℓ}(a₁)⋯ψ_{t_r+ℓ}(a_r)) = μ(ψ_{t₁}(a₁)⋯ψ_{t_r}(a_r))";
    INVARIANT_FIXED_POINT = "invariant.fixed_point": "𝒯_{φ,ν}(σ) = σ";
    SKEW_TRANSFER = "skew.transfer_identity": "μ_N ∘ φ† = (𝒯σ) ⊗ ν^{⊗(N−1)} on level N − 1";
    SKEW_INVARIANCE = "skew.invariance": "μ_N ∘ φ† = μ_{N−1} on level N − 1";
    SEMICOMMUTATIVE = "semicommutative.commuting_images": "[ψₙ(a), ψₙ′(a′)] = 0 for n ≠ n′";
    CLASSICAL_NFMO = "classical.nfmo": "F_{φ,ν}(f)(x) = Σ_y K(x, y) f(y)";
    CLASSICAL_MARGINALS = "classical.marginals": "μ ∘ ψₙ = σKⁿ";
    CLASSICAL_STATIONARY = "classical.stationary": "πK = π and 𝒯_{φ,ν}(π) = π";
    CLASSICAL_ROUND_TRIP = "classical.kernel_round_trip": "K(x, y) = ν{z : φ(x, z) = y}";
    STINESPRING_ISOMETRY = "stinespring.isometry": "V*V = I";
    STINESPRING_DILATION = "stinespring.dilation": "V*π(b)V = F(b)";
    STINESPRING_WITNESS = "stinespring.witness": "F_{φ,ν} = F for the padded dilation";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported for information; never fails a run.
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: &'static str,
    pub identity: &'static str,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub context: String,
    pub residual: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

impl Check {
    pub fn new(def: CheckDef, residual: f64, tolerance: f64) -> Self {
        Self {
            id: def.id,
            identity: def.identity,
            context: String::new(),
            residual,
            tolerance,
            // NaN residuals fail
            status: if residual <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail },
        }
    }

    pub fn info(def: CheckDef, residual: f64, tolerance: f64) -> Self {
        Self {
            status: CheckStatus::Info,
            ..Self::new(def, residual, tolerance)
        }
    }

    pub fn at(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommandResult {
    /// Position in the file's command list, absent for default runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub command: &'static str,
    pub target: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub outputs: Value,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CommandResult {
    pub fn new(command: &'static str, target: impl Into<String>, checks: Vec<Check>, outputs: Value) -> Self {
        let status = if checks.iter().any(Check::failed) { Status::Fail } else { Status::Pass };
        Self {
            index: None,
            command,
            target: target.into(),
            status,
            checks,
            outputs,
            elapsed: Duration::ZERO,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub dim_cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub settings: Settings,
    pub status: Status,
    pub checks_run: usize,
    pub checks_failed: usize,
    pub results: Vec<CommandResult>,
}

impl Report {
    pub fn new(command: &'static str, settings: Settings, results: Vec<CommandResult>) -> Self {
        let checks_run = results.iter().map(|r| r.checks.len()).sum();
        let checks_failed = results.iter().flat_map(|r| &r.checks).filter(|c| c.failed()).count();
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            settings,
            status: if checks_failed > 0 { Status::Fail } else { Status::Pass },
            checks_run,
            checks_failed,
            results,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Human-readable summary, including timings.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let tag = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            out.push_str(&format!(
                "[{tag}] {} {} ({} checks, {:.1} ms)\n",
                r.command,
                r.target,
                r.checks.len(),
                r.elapsed.as_secs_f64() * 1e3
            ));
            for c in r.checks.iter().filter(|c| c.failed()) {
                let at = if c.context.is_empty() { String::new() } else { format!(" [{}]", c.context) };
                out.push_str(&format!(
                    "    {}{at}: residual {:.3e} > {:.1e}  ({})\n",
                    c.id, c.residual, c.tolerance, c.identity
                ));
            }
        }
        out.push_str(&format!(
            "{} results, {} checks, {} failed\n",
            self.results.len(),
            self.checks_run,
            self.checks_failed
        ));
        out
    }
}

fn num(v: f64) -> Value {
    // avoid "-0.0" in reports
    json!(if v == 0.0 { 0.0 } else { v })
}

pub fn algebra_json(a: &Algebra) -> Value {
    json!({ "blocks": a.blocks() })
}

pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([num(m[(i, j)].re), num(m[(i, j)].im)])).collect()))
            .collect(),
    )
}

pub fn state_json(s: &State) -> Value {
    json!({
        "algebra": algebra_json(s.algebra()),
        "densities": s.densities().iter().map(matrix_json).collect::<Vec<_>>(),
    })
}

pub fn map_json(f: &LinearMap) -> Value {
    let images: Map<String, Value> = (0..f.domain().dim())
        .map(|k| {
            let blocks = f.image(k).blocks().iter().map(matrix_json).collect::<Vec<_>>();
            (image_key(f.domain(), k), Value::Array(blocks))
        })
        .collect();
    json!({
        "domain": algebra_json(f.domain()),
        "codomain": algebra_json(f.codomain()),
        "kind": f.kind().as_str(),
        "images": images,
    })
}

pub fn rqm_json(r: &Rqm) -> Value {
    json!({
        "source": algebra_json(r.source()),
        "target": algebra_json(r.target()),
        "parameter": algebra_json(r.parameter()),
        "phi": map_json(r.phi()),
        "nu": state_json(r.nu()),
    })
}

pub fn vector_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}
