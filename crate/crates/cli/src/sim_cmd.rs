use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use codeswitch::bundle::{parse_ccz_support, Recipe};
use codeswitch::decoders::{Budgets, DecoderMode};
use codeswitch::homomorphic::{cnot_schedule, layer_embedding};
use codeswitch::noise::{splitmix64, NoiseModel};
use codeswitch::protocol::{run_protocol, trace_csv, CczContext, CodeContext, ProtocolSetup, ProtocolSummary, Step};
use codeswitch::stats::wilson_interval;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::{load_code, read, schedule_csv_parse, to_json, write_atomic, CliError, CliResult};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimConfig {
    seed: u64,
    trials: u64,
    noise: Vec<NoisePoint>,
    sizes: Vec<SizeConfig>,
    script: Vec<Value>,
    #[serde(default)]
    budgets: BudgetConfig,
    #[serde(default)]
    auto_ec: bool,
    #[serde(default)]
    trace: bool,
    #[serde(default)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoisePoint {
    p: f64,
    q: f64,
    #[serde(default)]
    c_bl: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetConfig {
    mode: DecoderMode,
    cap: u64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let b = Budgets::default();
        Self { mode: b.mode, cap: b.cap }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SizeConfig {
    label: String,
    /// Code name used in the script → bundle path.
    codes: BTreeMap<String, String>,
    /// Explicit schedule files; pairs without one use the layer-0 embedding.
    #[serde(default)]
    schedules: Vec<ScheduleRef>,
    #[serde(default)]
    ccz: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRef {
    source: String,
    target: String,
    file: String,
}

#[derive(Serialize)]
struct ResultRow {
    size: String,
    p: f64,
    q: f64,
    trials: u64,
    failures: u64,
    failures_x: u64,
    failures_z: u64,
    metacode_failures: u64,
    rate: f64,
    wilson_lo: f64,
    wilson_hi: f64,
    mean_final_residual: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    seed: u64,
    trials: u64,
    confidence: f64,
    curves: BTreeMap<&'a str, Vec<&'a ResultRow>>,
}

fn load_setup(size: &SizeConfig, base: &Path, budgets: Budgets, auto_ec: bool) -> CliResult<ProtocolSetup> {
    let mut setup = ProtocolSetup { auto_ec, ..Default::default() };
    let mut recipes: HashMap<String, Recipe> = HashMap::new();
    for (name, file) in &size.codes {
        let (bundle, code) = load_code(&base.join(file))?;
        recipes.insert(name.clone(), bundle.header.recipe.clone());
        setup.add_code(CodeContext::new(name.clone(), code, budgets));
    }
    for s in &size.schedules {
        let sched = schedule_csv_parse(&read(&base.join(&s.file))?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", s.file)))?;
        setup.schedules.insert((s.source.clone(), s.target.clone()), sched);
    }
    for (src, r3) in &recipes {
        for (tgt, r2) in &recipes {
            let key = (src.clone(), tgt.clone());
            if r3.base() == Some(r2) && !setup.schedules.contains_key(&key) {
                let (c3, c2) = (&setup.codes[src].code, &setup.codes[tgt].code);
                let sched = layer_embedding(c3, c2, 0)
                    .and_then(|phi| cnot_schedule(&phi))
                    .map_err(|e| CliError::Usage(format!("size {}: {e}", size.label)))?;
                setup.schedules.insert(key, sched);
            }
        }
    }
    if let Some(file) = &size.ccz {
        let (_, support) = parse_ccz_support(&read(&base.join(file))?)
            .map_err(|e| CliError::Usage(format!("{file}: {e}")))?;
        setup.ccz = Some(Arc::new(CczContext::new(support)));
    }
    Ok(setup)
}

fn point_seed(master: u64, size: usize, point: usize) -> u64 {
    splitmix64(master ^ splitmix64(((size as u64) << 32) | point as u64))
}

pub fn run(config: &Path, out_dir: &Path) -> CliResult<()> {
    let base = config.parent().unwrap_or(Path::new("."));
    let cfg: SimConfig =
        serde_json::from_str(&read(config)?).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let script: Vec<Step> = cfg
        .script
        .iter()
        .enumerate()
        .map(|(i, v)| serde_json::from_value(v.clone()).map_err(|e| CliError::Usage(format!("script step {i}: {e}"))))
        .collect::<Result<_, _>>()?;
    if cfg.trials == 0 || cfg.budgets.cap == 0 {
        return Err(CliError::Usage("trials and budgets must be positive".into()));
    }
    let budgets = Budgets { mode: cfg.budgets.mode, cap: cfg.budgets.cap };
    let setups: Vec<ProtocolSetup> =
        cfg.sizes.iter().map(|s| load_setup(s, base, budgets, cfg.auto_ec)).collect::<Result<_, _>>()?;

    let mut jobs = Vec::new();
    for (si, _) in cfg.sizes.iter().enumerate() {
        for (pi, point) in cfg.noise.iter().enumerate() {
            let mut noise = NoiseModel::new(point.p, point.q, point_seed(cfg.seed, si, pi))
                .map_err(|e| CliError::Usage(format!("noise point {pi}: {e}")))?;
            if let Some(c) = point.c_bl {
                noise.c_bl = c;
                noise = noise.validated().map_err(|e| CliError::Usage(format!("noise point {pi}: {e}")))?;
            }
            jobs.push((si, pi, noise));
        }
    }

    let threads = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    type Outcome = Result<(String, ProtocolSummary), String>;
    let results: Mutex<Vec<Option<Outcome>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(si, _, noise)) = jobs.get(j) else { break };
                let out = run_protocol(&setups[si], &script, noise, cfg.trials)
                    .map(|(trace, summary)| (if cfg.trace { trace_csv(&trace) } else { String::new() }, summary))
                    .map_err(|e| e.to_string());
                results.lock().expect("result slots")[j] = Some(out);
            });
        }
    });

    let mut rows = Vec::new();
    for ((si, pi, _), res) in jobs.iter().zip(results.into_inner().expect("result slots")) {
        let label = &cfg.sizes[*si].label;
        let point = cfg.noise[*pi];
        let (trace, s) = res
            .expect("every job ran")
            .map_err(|e| CliError::Failure(format!("size {label}, p = {}, q = {}: {e}", point.p, point.q)))?;
        if cfg.trace {
            write_atomic(&out_dir.join(format!("trace_{label}_{pi}.csv")), &trace)?;
        }
        let (lo, hi) = wilson_interval(s.failures, s.trials, 0.05);
        rows.push(ResultRow {
            size: label.clone(),
            p: point.p,
            q: point.q,
            trials: s.trials,
            failures: s.failures,
            failures_x: s.failures_x,
            failures_z: s.failures_z,
            metacode_failures: s.metacode_failures,
            rate: s.failures as f64 / s.trials as f64,
            wilson_lo: lo,
            wilson_hi: hi,
            mean_final_residual: s.mean_final_residual,
        });
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Failure(e.to_string()))?;
    }
    let csv_text = String::from_utf8(w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?).expect("utf8 csv");
    write_atomic(&out_dir.join("results.csv"), &csv_text)?;
    let mut curves: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in &rows {
        curves.entry(r.size.as_str()).or_default().push(r);
    }
    let summary = Summary { seed: cfg.seed, trials: cfg.trials, confidence: 0.95, curves };
    write_atomic(&out_dir.join("summary.json"), &to_json(&summary))?;
    for r in &rows {
        println!(
            "{} p={} q={}: {}/{} failures, rate {:.4} [{:.4}, {:.4}]",
            r.size, r.p, r.q, r.failures, r.trials, r.rate, r.wilson_lo, r.wilson_hi
        );
    }
    Ok(())
}
