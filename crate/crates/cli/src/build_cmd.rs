use std::collections::BTreeMap;
use std::path::Path;

use codeswitch::bundle::{ccz_support_text, Bundle, CodeParams, Recipe, TripleSpec};
use codeswitch::ccz::ccz_verify;
use codeswitch::hgp::{css_validate, CssCode};
use codeswitch::homomorphic::{cnot_schedule, layer_embedding, verify_chain_map, verify_logical_cnot};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::{read, to_json, write_atomic, CliError, CliResult};

pub const MANIFEST_FORMAT: &str = "codeswitch-manifest/1";

fn default_cap() -> u64 {
    1 << 20
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildConfig {
    codes: Vec<CodeEntry>,
    #[serde(default)]
    schedules: Vec<ScheduleEntry>,
    #[serde(default)]
    ccz: Vec<CczEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeEntry {
    name: String,
    recipe: Value,
    #[serde(default = "default_cap")]
    certify_cap: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleEntry {
    name: String,
    source: String,
    target: String,
    #[serde(default)]
    layer: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CczEntry {
    name: String,
    triple: Value,
}

#[derive(Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub codes: Vec<ManifestCode>,
    pub schedules: Vec<ManifestSchedule>,
    pub ccz: Vec<ManifestCcz>,
}

#[derive(Serialize, Deserialize)]
pub struct ManifestCode {
    pub name: String,
    pub file: String,
    pub params: CodeParams,
}

#[derive(Serialize, Deserialize)]
pub struct ManifestSchedule {
    pub name: String,
    pub file: String,
    pub source: String,
    pub target: String,
    pub layer: usize,
    pub cnots: usize,
    pub depth_one: bool,
}

#[derive(Serialize, Deserialize)]
pub struct ManifestCcz {
    pub name: String,
    pub file: String,
    pub support_size: usize,
}

/// Replaces `{"kind": "edge_list_file", "path": p}` graph specs by inline edge lists.
pub fn resolve_files(v: &mut Value, base: &Path) -> CliResult<()> {
    match v {
        Value::Object(map) => {
            if map.get("kind").and_then(Value::as_str) == Some("edge_list_file") {
                let rel = map
                    .get("path")
                    .and_then(Value::as_str)
                    .ok_or_else(|| CliError::Usage("edge_list_file needs a path".into()))?;
                let text = read(&base.join(rel))?;
                *v = serde_json::json!({ "kind": "edge_list", "text": text });
                return Ok(());
            }
            for child in map.values_mut() {
                resolve_files(child, base)?;
            }
        }
        Value::Array(items) => {
            for child in items {
                resolve_files(child, base)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn parse_value<T: serde::de::DeserializeOwned>(mut v: Value, base: &Path, what: &str) -> CliResult<T> {
    resolve_files(&mut v, base)?;
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

fn check_name(name: &str) -> CliResult<()> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && !name.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!("invalid output name {name:?}")))
    }
}

fn describe(name: &str, p: &CodeParams) -> String {
    let d = |x: Option<usize>| x.map_or("?".to_string(), |v| v.to_string());
    let mut s = format!("{name}: [[{}, {}]] d_X={} d_Z={}", p.n, p.k, d(p.d_x), d(p.d_z));
    if p.active_logicals != p.k {
        s.push_str(&format!(" active={}", p.active_logicals));
    }
    if let Some(m) = p.metachecks {
        s.push_str(&format!(" metachecks={m} d_ss={}", d(p.d_ss)));
    }
    s.push_str(&format!(" locality={}", p.locality));
    s
}

pub fn run(config: &Path, out: &Path) -> CliResult<()> {
    let base = config.parent().unwrap_or(Path::new("."));
    let cfg: BuildConfig =
        serde_json::from_str(&read(config)?).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let mut built: BTreeMap<String, (Recipe, CssCode)> = BTreeMap::new();
    let mut manifest = Manifest { format: MANIFEST_FORMAT.into(), codes: vec![], schedules: vec![], ccz: vec![] };
    let mut failures = Vec::new();

    for entry in cfg.codes {
        check_name(&entry.name)?;
        if built.contains_key(&entry.name) {
            return Err(CliError::Usage(format!("duplicate code name {}", entry.name)));
        }
        let recipe: Recipe = parse_value(entry.recipe, base, &format!("code {}", entry.name))?;
        let (bundle, code) = Bundle::build(&entry.name, &recipe, entry.certify_cap)?;
        let css = css_validate(&code);
        failures.extend(css.failures.iter().map(|f| format!("{}: {f}", entry.name)));
        let file = format!("{}.bundle", entry.name);
        write_atomic(&out.join(&file), &bundle.to_text())?;
        println!("{}", describe(&entry.name, &bundle.header.params));
        manifest.codes.push(ManifestCode { name: entry.name.clone(), file, params: bundle.header.params.clone() });
        built.insert(entry.name, (recipe, code));
    }

    for entry in cfg.schedules {
        check_name(&entry.name)?;
        let lookup = |n: &str| built.get(n).ok_or_else(|| CliError::Usage(format!("schedule {}: unknown code {n}", entry.name)));
        let (src_recipe, src) = lookup(&entry.source)?;
        let (tgt_recipe, tgt) = lookup(&entry.target)?;
        if src_recipe.base() != Some(tgt_recipe) {
            return Err(CliError::Usage(format!(
                "schedule {}: code {} is not built on code {}",
                entry.name, entry.source, entry.target
            )));
        }
        let phi = layer_embedding(src, tgt, entry.layer).map_err(|e| CliError::Usage(format!("schedule {}: {e}", entry.name)))?;
        let cm = verify_chain_map(&phi);
        if !cm.passed() {
            failures.push(format!("{}: chain-map condition fails at {:?}", entry.name, cm.failures));
        }
        let sched = cnot_schedule(&phi).map_err(|e| CliError::Failure(format!("schedule {}: {e}", entry.name)))?;
        let rep = verify_logical_cnot(src, tgt, &sched);
        if !rep.passed() {
            failures.push(format!("{}: transversal CNOT is not the logical CNOT", entry.name));
        }
        let file = format!("{}.schedule.csv", entry.name);
        write_atomic(&out.join(&file), &sched.to_csv())?;
        println!("{}: {} CNOTs from {} to {}, depth one: {}", entry.name, sched.pairs.len(), entry.source, entry.target, sched.depth_one);
        manifest.schedules.push(ManifestSchedule {
            name: entry.name,
            file,
            source: entry.source,
            target: entry.target,
            layer: entry.layer,
            cnots: sched.pairs.len(),
            depth_one: sched.depth_one,
        });
    }

    for entry in cfg.ccz {
        check_name(&entry.name)?;
        let spec: TripleSpec = parse_value(entry.triple, base, &format!("ccz {}", entry.name))?;
        let triple = spec.build()?;
        let rep = ccz_verify(&triple);
        if !rep.passed() {
            failures.push(format!(
                "{}: support is not a logical CCZ ({} invariance failures, nontrivial: {})",
                entry.name, rep.invariance_failures, rep.nontrivial
            ));
        }
        let file = format!("{}.ccz.csv", entry.name);
        write_atomic(&out.join(&file), &ccz_support_text(&entry.name, &spec, &triple))?;
        println!("{}: CCZ support of {} triples", entry.name, triple.support.len());
        manifest.ccz.push(ManifestCcz { name: entry.name, file, support_size: triple.support.len() });
    }

    write_atomic(&out.join("manifest.json"), &to_json(&manifest))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(failures.join("; ")))
    }
}
