use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rqmkit::report::CATALOGUE;
use rqmkit::{parse_spec, LoadOptions};
use serde_json::{json, Value};
use tempfile::TempDir;

fn c(re: f64) -> Value {
    json!([re, 0.0])
}

fn unit(n: usize, p: usize, q: usize) -> Vec<Vec<Value>> {
    (0..n)
        .map(|i| (0..n).map(|j| c(if (i, j) == (p, q) { 1.0 } else { 0.0 })).collect())
        .collect()
}

/// Images `e_pq ↦ Uᵢ* e_pq Uᵢ` over the four Pauli matrices: the family whose
/// uniform average is `b ↦ tr(b)/2 · 1`.
fn pauli_twirl() -> Value {
    let paulis: [[[f64; 4]; 2]; 4] = [
        [[1.0, 0.0, 0.0, 1.0], [0.0; 4]],
        [[0.0, 1.0, 1.0, 0.0], [0.0; 4]],
        [[0.0; 4], [0.0, -1.0, 1.0, 0.0]],
        [[1.0, 0.0, 0.0, -1.0], [0.0; 4]],
    ];
    let mut images = serde_json::Map::new();
    for p in 0..2 {
        for q in 0..2 {
            let blocks: Vec<Value> = paulis
                .iter()
                .map(|[re, im]| {
                    // U* e_pq U has entries conj(U[p][i]) U[q][j]
                    let u = |r: usize, s: usize| (re[2 * r + s], im[2 * r + s]);
                    let rows: Vec<Value> = (0..2)
                        .map(|i| {
                            let row: Vec<Value> = (0..2)
                                .map(|j| {
                                    let (a, b) = u(p, i);
                                    let (x, y) = u(q, j);
                                    json!([a * x + b * y, a * y - b * x])
                                })
                                .collect();
                            Value::Array(row)
                        })
                        .collect();
                    Value::Array(rows)
                })
                .collect();
            images.insert(format!("0.{p}.{q}"), Value::Array(blocks));
        }
    }
    Value::Object(images)
}

fn base_spec() -> Value {
    json!({
        "algebras": { "M2": { "blocks": [2] }, "C2": { "blocks": [1, 1] }, "C4": { "blocks": [1, 1, 1, 1] } },
        "states": {
            "half": { "algebra": "M2", "densities": [[[c(0.5), c(0.0)], [c(0.0), c(0.5)]]] },
            "tilted": { "algebra": "M2", "densities": [[[c(0.9), c(0.0)], [c(0.0), c(0.1)]]] },
            "uniform4": { "probabilities": [0.25, 0.25, 0.25, 0.25] },
            "stationary": { "invariant_of": "mixing" }
        },
        "maps": {
            "twirl": { "domain": "M2", "codomain": { "blocks": [2, 2, 2, 2] }, "kind": "morphism", "images": pauli_twirl() }
        },
        "rqms": {
            "depolarize": { "target": "M2", "parameter": "C4", "phi": "twirl", "nu": "uniform4" },
            "mixing": { "random": { "source": "M2", "target": "M2", "parameter": "C2" } }
        },
        "chains": {
            "invariant_chain": { "rqm": "mixing", "sigma": "stationary", "depth": 3 },
            "tilted_chain": { "rqm": "mixing", "sigma": "tilted", "depth": 3 }
        }
    })
}

struct Run {
    output: Output,
    report: Option<Value>,
    report_text: Option<String>,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().expect("exit code")
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.output.stderr).into_owned()
    }

    fn report(&self) -> &Value {
        self.report.as_ref().expect("report written")
    }
}

fn write_spec(dir: &TempDir, spec: &Value) -> PathBuf {
    let path = dir.path().join("spec.json");
    std::fs::write(&path, serde_json::to_string_pretty(spec).unwrap()).unwrap();
    path
}

fn rqmkit(command: &str, spec: &Path, extra: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let output = Command::new(env!("CARGO_BIN_EXE_rqmkit"))
        .arg(command)
        .arg(spec)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .expect("spawn rqmkit");
    let report_text = std::fs::read_to_string(&out).ok();
    let report = report_text.as_deref().map(|t| serde_json::from_str(t).unwrap());
    Run {
        output,
        report,
        report_text,
    }
}

fn run_spec(spec: &Value, command: &str, extra: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    let path = write_spec(&dir, spec);
    rqmkit(command, &path, extra)
}

fn with_commands(mut spec: Value, commands: Value) -> Value {
    spec["commands"] = commands;
    spec
}

fn checks_of(result: &Value) -> Vec<(String, String)> {
    result["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["id"].as_str().unwrap().to_string(), c["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn minimal_spec_loads() {
    let spec = json!({
        "algebras": { "M2": { "blocks": [2] } },
        "states": { "trace": { "algebra": "M2", "densities": [[[c(0.5), c(0.0)], [c(0.0), c(0.5)]]] } }
    });
    let p = parse_spec(&spec.to_string(), LoadOptions::default()).unwrap();
    assert_eq!(p.states["trace"].algebra().blocks(), &[2]);

    let run = run_spec(&spec, "validate", &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let r = run.report();
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["results"][0]["target"], "states.trace");
    assert_eq!(r["results"][0]["checks"][0]["id"], "state.density");
}

#[test]
fn non_stochastic_kernel_is_rejected_with_its_row() {
    let spec = json!({ "kernels": { "bad": [[0.5, 0.5], [0.7, 0.2]] } });
    let err = parse_spec(&spec.to_string(), LoadOptions::default()).unwrap_err();
    assert!(err.to_string().contains("row 1"), "{err}");
    assert!(err.to_string().contains("kernels.bad"), "{err}");

    let run = run_spec(&spec, "validate", &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("row 1"), "{}", run.stderr());
    assert!(run.report.is_none());
}

#[test]
fn transpose_is_rejected_as_a_morphism() {
    let images: serde_json::Map<String, Value> = (0..2)
        .flat_map(|p| (0..2).map(move |q| (p, q)))
        .map(|(p, q)| (format!("0.{p}.{q}"), json!([unit(2, q, p)])))
        .collect();
    let spec = json!({
        "maps": { "transpose": { "domain": { "blocks": [2] }, "codomain": { "blocks": [2] }, "kind": "morphism", "images": images } }
    });
    let run = run_spec(&spec, "validate", &[]);
    assert_eq!(run.code(), 2);
    let msg = run.stderr();
    assert!(msg.contains("multiplicativity"), "{msg}");
    assert!(msg.contains("maps.transpose"), "{msg}");

    // the same images are a perfectly good raw map
    let mut raw = spec.clone();
    raw["maps"]["transpose"]["kind"] = json!("raw");
    assert_eq!(run_spec(&raw, "validate", &[]).code(), 0);
}

#[test]
fn parse_errors_carry_a_location() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, "{\n  \"algebras\": {\n    \"M2\": { \"blocks\": [2], }\n  }\n}\n").unwrap();
    let run = rqmkit("validate", &path, &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("line 3"), "{}", run.stderr());

    let typo = json!({ "algebras": { "M2": { "block": [2] } } });
    assert_eq!(run_spec(&typo, "validate", &[]).code(), 2);
}

#[test]
fn missing_basis_image_is_named() {
    let spec = json!({
        "maps": { "f": { "domain": { "blocks": [2] }, "codomain": { "blocks": [2] }, "images": { "0.0.0": [unit(2, 0, 0)] } } }
    });
    let err = parse_spec(&spec.to_string(), LoadOptions::default()).unwrap_err();
    assert!(err.to_string().contains("missing basis image \"0.0.1\""), "{err}");
}

#[test]
fn unresolved_references_and_unknown_commands() {
    let spec = with_commands(base_spec(), json!([{ "command": "invariant", "rqm": "nowhere" }]));
    let run = run_spec(&spec, "all", &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("unresolved reference"), "{}", run.stderr());

    let spec = with_commands(base_spec(), json!([{ "command": "levitate" }]));
    assert_eq!(run_spec(&spec, "all", &[]).code(), 2);
    assert_eq!(run_spec(&base_spec(), "levitate", &[]).code(), 2);
}

#[test]
fn invariant_of_constant_transition() {
    let spec = with_commands(base_spec(), json!([{ "command": "invariant", "rqm": "depolarize" }]));
    let run = run_spec(&spec, "invariant", &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let result = &run.report()["results"][0];
    assert_eq!(result["outputs"]["fixed_dim"], 1);
    let rho = &result["outputs"]["canonical"]["densities"][0];
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { 0.5 } else { 0.0 };
            let re = rho[i][j][0].as_f64().unwrap();
            let im = rho[i][j][1].as_f64().unwrap();
            assert!((re - want).abs() < 1e-10 && im.abs() < 1e-10, "ρ[{i}][{j}] = {re} + {im}i");
        }
    }
}

#[test]
fn trivial_map_fixes_everything() {
    let spec = json!({ "rqms": { "id": { "trivial": { "blocks": [2, 1] } } } });
    let run = run_spec(&spec, "invariant", &[]);
    assert_eq!(run.code(), 0);
    assert_eq!(run.report()["results"][0]["outputs"]["fixed_dim"], 5);
}

#[test]
fn stationarity_of_invariant_seeded_chain() {
    let spec = with_commands(
        base_spec(),
        json!([
            { "command": "stationarity", "chain": "invariant_chain" },
            { "command": "stationarity", "chain": "tilted_chain" }
        ]),
    );
    let run = run_spec(&spec, "stationarity", &[]);
    let results = run.report()["results"].as_array().unwrap();
    assert_eq!(results[0]["status"], "pass");
    assert_eq!(results[1]["status"], "fail");
    let failed: Vec<_> = checks_of(&results[1]).into_iter().filter(|(_, s)| s == "fail").collect();
    assert_eq!(failed, vec![("stationarity.shift_invariance".to_string(), "fail".to_string())]);
    // a failing check makes the whole run fail
    assert_eq!(run.code(), 1);
    assert_eq!(run.report()["checks_failed"], 1);
}

#[test]
fn skew_passes_iff_invariant() {
    let spec = with_commands(
        base_spec(),
        json!([
            { "command": "skew", "rqm": "mixing", "sigma": "stationary" },
            { "command": "skew", "rqm": "mixing", "sigma": "tilted" }
        ]),
    );
    let run = run_spec(&spec, "skew", &["--depth", "3"]);
    let results = run.report()["results"].as_array().unwrap();
    assert_eq!(results[0]["status"], "pass");
    let tilted = checks_of(&results[1]);
    assert!(tilted.contains(&("skew.transfer_identity".into(), "pass".into())));
    assert!(tilted.contains(&("skew.invariance".into(), "fail".into())));
    assert_eq!(run.code(), 1);
}

#[test]
fn markov_and_chain_on_tilted_chain() {
    let spec = with_commands(
        base_spec(),
        json!([{ "command": "chain", "chain": "tilted_chain" }, { "command": "markov", "chain": "tilted_chain" }]),
    );
    let run = run_spec(&spec, "all", &[]);
    assert_eq!(run.code(), 0, "{}", String::from_utf8_lossy(&run.output.stdout));
    let results = run.report()["results"].as_array().unwrap();
    assert_eq!(results[0]["outputs"]["level_dims"], json!([4, 8, 16, 32]));
    assert_eq!(results[1]["checks"].as_array().unwrap().len(), 12);
}

#[test]
fn compose_results_can_be_reused() {
    let spec = with_commands(
        base_spec(),
        json!([
            { "command": "compose", "outer": "mixing", "inner": "depolarize", "as": "both" },
            { "command": "invariant", "rqm": "both" },
            { "command": "implement", "construction": "convex_sum", "operands": ["both", "mixing"], "weights": [0.5, 0.5] }
        ]),
    );
    // only the invariant command is reported, but the composition it needs still runs
    let run = run_spec(&spec, "invariant", &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let results = run.report()["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0]["target"], "both");
    assert_eq!(results[0]["index"], 1);

    let all = run_spec(&spec, "all", &[]);
    assert_eq!(all.code(), 0);
    let ids: Vec<String> = all.report()["results"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["ck.nfmo", "ck.transition", "rqm.family_morphism"]);
}

#[test]
fn implementation_constructions() {
    let spec = with_commands(
        base_spec(),
        json!([
            { "command": "implement", "construction": "state", "operands": ["tilted"] },
            { "command": "implement", "construction": "morphism", "operands": ["twirl"] },
            { "command": "implement", "construction": "compose", "operands": ["mixing", "depolarize"] },
            { "command": "implement", "construction": "direct_sum", "operands": ["mixing", "depolarize"] },
            { "command": "implement", "construction": "tensor", "operands": ["depolarize", "mixing"] },
            { "command": "implement", "construction": "convex_sum", "operands": ["mixing", "depolarize"], "weights": [0.25, 0.75] },
            { "command": "implement", "construction": "finite_family", "operands": ["twirl", "twirl"], "weights": [0.5, 0.5] }
        ]),
    );
    let run = run_spec(&spec, "implement", &[]);
    assert_eq!(run.code(), 0, "{}", String::from_utf8_lossy(&run.output.stdout));
    assert_eq!(run.report()["results"].as_array().unwrap().len(), 7);
}

#[test]
fn probe_implementability_reports_witness_or_failure() {
    let mut spec = base_spec();
    spec["maps"]["channel"] = json!({ "domain": { "blocks": [3] }, "codomain": "M2", "kind": "cp_unital", "random": { "kraus": 3 } });
    spec["maps"]["odd"] = json!({ "domain": "M2", "codomain": { "blocks": [3] }, "kind": "cp_unital", "random": { "kraus": 4 } });
    let spec = with_commands(
        spec,
        json!([
            { "command": "probe-implementability", "map": "channel" },
            { "command": "probe-implementability", "map": "odd", "attempts": 1 }
        ]),
    );
    let run = run_spec(&spec, "probe-implementability", &[]);
    assert_eq!(run.code(), 0, "{}", String::from_utf8_lossy(&run.output.stdout));
    for result in run.report()["results"].as_array().unwrap() {
        let out = &result["outputs"];
        let ids: Vec<_> = checks_of(result).into_iter().map(|(id, _)| id).collect();
        assert!(ids.contains(&"stinespring.isometry".to_string()));
        assert!(ids.contains(&"stinespring.dilation".to_string()));
        match out["outcome"].as_str().unwrap() {
            "implemented" => {
                assert!(ids.contains(&"stinespring.witness".to_string()));
                let n = out["copies"].as_u64().unwrap() as usize;
                assert_eq!(out["rqm"]["parameter"]["blocks"], json!([n]));
            }
            "no_witness" => {
                let f = &out["failure"];
                assert!(!f["tried"].as_array().unwrap().is_empty());
                assert!(f["k_dim"].as_u64().unwrap() > 0);
                assert!(!ids.contains(&"stinespring.witness".to_string()));
            }
            other => panic!("unexpected outcome {other}"),
        }
    }
}

#[test]
fn classical_pipeline() {
    let spec = json!({
        "random_maps": { "coin": { "y": 3, "table": [[0, 1], [1, 2], [2, 0]], "nu": [0.5, 0.5] } },
        "kernels": { "k": [[0.25, 0.75], [1.0, 0.0]] },
        "rqms": { "walk": { "lift": "coin" } }
    });
    let run = run_spec(&spec, "classical", &[]);
    assert_eq!(run.code(), 0, "{}", String::from_utf8_lossy(&run.output.stdout));
    let results = run.report()["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    let pi: Vec<f64> = results[0]["outputs"]["stationary"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for p in pi {
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
    }
    // πK = π for K = [[1/4, 3/4], [1, 0]] gives π = (4/7, 3/7)
    let pi = &results[1]["outputs"]["stationary"];
    assert!((pi[0].as_f64().unwrap() - 4.0 / 7.0).abs() < 1e-12);
    assert!((pi[1].as_f64().unwrap() - 3.0 / 7.0).abs() < 1e-12);
    assert!(checks_of(&results[1]).contains(&("classical.kernel_round_trip".into(), "pass".into())));
}

#[test]
fn semicommutativity_is_informational() {
    let spec = with_commands(base_spec(), json!([{ "command": "semicommutative", "chain": "tilted_chain" }]));
    let run = run_spec(&spec, "semicommutative", &[]);
    assert_eq!(run.code(), 0);
    let result = &run.report()["results"][0];
    assert_eq!(result["checks"][0]["status"], "info");
    assert!(result["outputs"]["condition_holds"].is_boolean());
}

#[test]
fn defaults_cover_declared_objects() {
    let run = run_spec(&base_spec(), "invariant", &[]);
    assert_eq!(run.code(), 0);
    let targets: Vec<_> = run.report()["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["target"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(targets, ["depolarize", "mixing"]);

    assert_eq!(run_spec(&base_spec(), "compose", &[]).code(), 2);
}

#[test]
fn dimension_cap_is_enforced() {
    let spec = with_commands(base_spec(), json!([{ "command": "chain", "chain": "tilted_chain" }]));
    let run = run_spec(&spec, "chain", &["--dim-cap", "8"]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("dimension cap"), "{}", run.stderr());
}

#[test]
fn reruns_are_byte_identical() {
    let spec = with_commands(
        base_spec(),
        json!([
            { "command": "induce", "rqm": "mixing" },
            { "command": "compose", "outer": "mixing", "inner": "mixing" },
            { "command": "markov", "chain": "invariant_chain" },
            { "command": "stationarity", "chain": "invariant_chain" },
            { "command": "skew", "rqm": "mixing" }
        ]),
    );
    let dir = TempDir::new().unwrap();
    let path = write_spec(&dir, &spec);
    let first = rqmkit("all", &path, &["--seed", "7"]).report_text.unwrap();
    let second = rqmkit("all", &path, &["--seed", "7"]).report_text.unwrap();
    assert_eq!(first, second);
    let other = rqmkit("all", &path, &["--seed", "8"]).report_text.unwrap();
    assert_ne!(first, other);
}

#[test]
fn tolerance_flag_tightens_checks() {
    let spec = with_commands(base_spec(), json!([{ "command": "invariant", "rqm": "mixing" }]));
    let run = run_spec(&spec, "invariant", &["--tolerance", "1e-30"]);
    let check = &run.report()["results"][0]["checks"][0];
    assert_eq!(check["tolerance"], 1e-30);
    assert_eq!(run.report()["settings"]["tolerance"], 1e-30);
}

#[test]
fn check_ids_are_unique() {
    let mut ids: Vec<_> = CATALOGUE.iter().map(|c| c.id).collect();
    ids.sort_unstable();
    let n = ids.len();
    ids.dedup();
    assert_eq!(ids.len(), n);
}

#[test]
fn bundled_problems_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let run = rqmkit("all", &path, &[]);
        assert_eq!(run.code(), 0, "{}: {}", path.display(), String::from_utf8_lossy(&run.output.stdout));
    }
}
