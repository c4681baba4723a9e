use std::path::{Path, PathBuf};

use codeswitch::bundle::{parse_ccz_support, Bundle};
use codeswitch::ccz::verify_support;
use codeswitch::hgp::CssCode;
use codeswitch::homomorphic::{cnot_schedule, layer_embedding, verify_chain_map, verify_logical_cnot, CnotSchedule};
use serde::Serialize;

use crate::build_cmd::{Manifest, MANIFEST_FORMAT};
use crate::io::{load_code, read, schedule_csv_parse, to_json, CliError, CliResult};

#[derive(Serialize)]
struct Item {
    path: String,
    kind: &'static str,
    name: String,
    passed: bool,
    failures: Vec<String>,
}

#[derive(Serialize)]
struct Report {
    passed: bool,
    items: Vec<Item>,
}

impl Item {
    fn new(path: &Path, kind: &'static str) -> Self {
        Self { path: path.display().to_string(), kind, name: String::new(), passed: true, failures: vec![] }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.passed = false;
        self.failures.push(msg.into());
    }
}

fn check_schedule(item: &mut Item, ctrl: &CssCode, tgt: &CssCode, sched: &CnotSchedule) {
    let rep = verify_logical_cnot(ctrl, tgt, sched);
    if !rep.x_stabilizer_failures.is_empty() {
        item.fail(format!("cnot: X stabilizers not preserved at rows {:?}", rep.x_stabilizer_failures));
    }
    if !rep.z_stabilizer_failures.is_empty() {
        item.fail(format!("cnot: Z stabilizers not preserved at rows {:?}", rep.z_stabilizer_failures));
    }
    if !rep.x_logical_failures.is_empty() || !rep.z_logical_failures.is_empty() {
        item.fail(format!(
            "cnot: logical action wrong for X {:?} and Z {:?}",
            rep.x_logical_failures, rep.z_logical_failures
        ));
    }
    if rep.no_logical_action {
        item.fail("cnot: schedule has no logical action");
    }
}

fn verify_bundle(path: &Path) -> CliResult<(Item, Option<(Bundle, CssCode)>)> {
    let mut item = Item::new(path, "bundle");
    let bundle = match Bundle::parse(&read(path)?) {
        Ok(b) => b,
        Err(e) => {
            item.fail(format!("parse: {e}"));
            return Ok((item, None));
        }
    };
    item.name = bundle.header.name.clone();
    let rep = bundle.verify();
    for f in &rep.failures {
        item.fail(f.clone());
    }
    if !item.passed {
        return Ok((item, None));
    }
    let (bundle, code) = load_code(path)?;
    if let Some(base) = bundle.header.recipe.base() {
        match base.build() {
            Ok(b) => match layer_embedding(&code, &b.code, 0) {
                Ok(phi) => {
                    let cm = verify_chain_map(&phi);
                    for (deg, rows) in &cm.failures {
                        item.fail(format!("chain map: degree {deg} fails at rows {rows:?}"));
                    }
                    match cnot_schedule(&phi) {
                        Ok(sched) => check_schedule(&mut item, &code, &b.code, &sched),
                        Err(e) => item.fail(format!("schedule: {e}")),
                    }
                }
                Err(e) => item.fail(format!("chain map: {e}")),
            },
            Err(e) => item.fail(format!("base recipe: {e}")),
        }
    }
    Ok((item, Some((bundle, code))))
}

fn verify_ccz(path: &Path) -> CliResult<Item> {
    let mut item = Item::new(path, "ccz");
    let (header, support) = match parse_ccz_support(&read(path)?) {
        Ok(x) => x,
        Err(e) => {
            item.fail(format!("parse: {e}"));
            return Ok(item);
        }
    };
    item.name = header.name.clone();
    let triple = match header.triple.build() {
        Ok(t) => t,
        Err(e) => {
            item.fail(format!("triple: {e}"));
            return Ok(item);
        }
    };
    let rep = verify_support([&triple.blocks[0], &triple.blocks[1], &triple.blocks[2]], &support);
    if !rep.invariant() {
        item.fail(format!(
            "ccz: {} invariance failures, first {:?}",
            rep.invariance_failures, rep.first_failures
        ));
    }
    if !rep.nontrivial {
        item.fail("ccz: logical tensor is not the CCZ tensor");
    }
    Ok(item)
}

fn verify_manifest(path: &Path, items: &mut Vec<Item>) -> CliResult<()> {
    let manifest: Manifest = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Usage(format!("{}: not a manifest: {e}", path.display())))?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(CliError::Usage(format!("{}: unsupported format {:?}", path.display(), manifest.format)));
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut codes = std::collections::HashMap::new();
    for c in &manifest.codes {
        let (mut item, loaded) = verify_bundle(&dir.join(&c.file))?;
        if let Some((b, code)) = loaded {
            if b.header.params != c.params {
                item.fail("manifest: parameters differ from the bundle header");
            }
            codes.insert(c.name.clone(), code);
        }
        items.push(item);
    }
    for s in &manifest.schedules {
        let file = dir.join(&s.file);
        let mut item = Item::new(&file, "schedule");
        item.name = s.name.clone();
        match (codes.get(&s.source), codes.get(&s.target)) {
            (Some(ctrl), Some(tgt)) => match schedule_csv_parse(&read(&file)?) {
                Ok(sched) => {
                    match layer_embedding(ctrl, tgt, s.layer).and_then(|phi| cnot_schedule(&phi)) {
                        Ok(fresh) if fresh.pairs != sched.pairs => item.fail("schedule: differs from the layer embedding"),
                        Err(e) => item.fail(format!("schedule: {e}")),
                        _ => {}
                    }
                    check_schedule(&mut item, ctrl, tgt, &sched);
                }
                Err(e) => item.fail(format!("parse: {e}")),
            },
            _ => item.fail(format!("schedule: codes {} and {} did not verify", s.source, s.target)),
        }
        items.push(item);
    }
    for c in &manifest.ccz {
        items.push(verify_ccz(&dir.join(&c.file))?);
    }
    Ok(())
}

pub fn run(paths: &[PathBuf]) -> CliResult<()> {
    for p in paths {
        if !p.is_file() {
            return Err(CliError::Usage(format!("no such file: {}", p.display())));
        }
    }
    let mut items = Vec::new();
    for p in paths {
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.ends_with(".bundle") {
            items.push(verify_bundle(p)?.0);
        } else if name.ends_with(".ccz.csv") {
            items.push(verify_ccz(p)?);
        } else if name.ends_with(".json") {
            verify_manifest(p, &mut items)?;
        } else {
            return Err(CliError::Usage(format!(
                "{}: expected a .bundle, .ccz.csv or manifest .json file (schedules are verified through the manifest)",
                p.display()
            )));
        }
    }
    let report = Report { passed: items.iter().all(|i| i.passed), items };
    print!("{}", to_json(&report));
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failure("verification failed".into()))
    }
}
