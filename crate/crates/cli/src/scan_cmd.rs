use std::path::PathBuf;

use clap::{Args, ValueEnum};
use codeswitch::bundle::LocalSpec;
use codeswitch::codes::LinearCode;
use codeswitch::decoders::Basis;
use codeswitch::scans::{
    confinement_scan, product_expansion_check, scan_csv, soundness_scan, ScanBudget, ScanError, ScanMode,
};

use crate::io::{load_code, to_json, write_atomic, CliError, CliResult};

#[derive(Clone, Copy, ValueEnum)]
pub enum Kind {
    Confinement,
    Soundness,
    ProductExpansion,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BasisArg {
    X,
    Z,
}

#[derive(Args)]
pub struct ScanArgs {
    kind: Kind,
    /// Code bundle to scan (confinement and soundness).
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Weight bound: errors of weight ≤ t, or syndromes of weight < t.
    #[arg(long)]
    t: Option<usize>,
    /// Error type: X errors are detected by H_Z.
    #[arg(long, value_enum, default_value = "x")]
    basis: BasisArg,
    #[arg(long, default_value_t = ScanBudget::default().max_enumeration)]
    max_enumeration: u64,
    #[arg(long, default_value_t = ScanBudget::default().samples_per_weight)]
    samples_per_weight: usize,
    #[arg(long, default_value_t = ScanBudget::default().decode_cap)]
    decode_cap: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON list of two or three local codes (product-expansion).
    #[arg(long)]
    codes: Option<String>,
    /// Length used for `repetition` local codes (product-expansion).
    #[arg(long)]
    delta: Option<usize>,
    /// Codewords sampled when the three-code sum is too large to enumerate.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(args: &ScanArgs, csv: &str) -> CliResult<()> {
    match &args.out {
        Some(p) => write_atomic(p, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn warn_sampled(mode: ScanMode, what: &str) {
    if mode == ScanMode::Sampled {
        eprintln!("warning: {what} exceeds the enumeration budget; table is sampled, not exhaustive");
    }
}

pub fn run(args: &ScanArgs) -> CliResult<()> {
    let budget = ScanBudget {
        max_enumeration: args.max_enumeration,
        samples_per_weight: args.samples_per_weight,
        decode_cap: args.decode_cap,
        seed: args.seed,
    };
    if budget.max_enumeration == 0 || budget.samples_per_weight == 0 || budget.decode_cap == 0 {
        return Err(CliError::Usage("budgets must be positive".into()));
    }
    let basis = match args.basis {
        BasisArg::X => Basis::X,
        BasisArg::Z => Basis::Z,
    };
    match args.kind {
        Kind::Confinement | Kind::Soundness => {
            let path = args.bundle.as_ref().ok_or_else(|| CliError::Usage("--bundle is required".into()))?;
            let t = args.t.ok_or_else(|| CliError::Usage("--t is required".into()))?;
            let (_, code) = load_code(path)?;
            if let Kind::Confinement = args.kind {
                let tab = confinement_scan(&code, t, basis, budget);
                warn_sampled(tab.mode, &format!("t = {t}"));
                emit(args, &scan_csv(&tab.rows, "syndrome_weight"))?;
                eprintln!(
                    "confinement {}: {} errors, worst ratio {:.3}, logical hits {}",
                    tab.mode.name(),
                    tab.samples,
                    tab.worst_ratio,
                    tab.logical_hits
                );
            } else {
                let tab = soundness_scan(&code, t, basis, budget);
                warn_sampled(tab.mode, &format!("t = {t}"));
                emit(args, &scan_csv(&tab.rows, "syndrome_weight"))?;
                eprintln!(
                    "soundness {}: {} syndromes, alpha {:.3}, fitted slope {:.3}",
                    tab.mode.name(),
                    tab.syndromes,
                    tab.alpha,
                    tab.fitted_slope
                );
                if tab.budget_exceeded > 0 {
                    return Err(CliError::Budget(format!(
                        "{} syndromes exceeded the decode budget; table is incomplete",
                        tab.budget_exceeded
                    )));
                }
            }
            Ok(())
        }
        Kind::ProductExpansion => {
            let text = args.codes.as_ref().ok_or_else(|| CliError::Usage("--codes is required".into()))?;
            let specs: Vec<LocalSpec> =
                serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--codes: {e}")))?;
            let codes: Vec<LinearCode> = specs
                .iter()
                .map(|s| match (s, args.delta) {
                    (LocalSpec::Repetition, None) => Err(CliError::Usage("repetition codes need --delta".into())),
                    (s, d) => s.build(d.unwrap_or(0)).map_err(|e| CliError::Usage(format!("infeasible parameters: {e}"))),
                })
                .collect::<Result<_, _>>()?;
            let refs: Vec<&LinearCode> = codes.iter().collect();
            let tab = match product_expansion_check(&refs, args.samples, args.seed) {
                Ok(t) => t,
                Err(ScanError::BudgetExceeded(n)) => {
                    return Err(CliError::Budget(format!("product expansion needs {n} steps, over the budget")))
                }
                Err(ScanError::Invalid(m)) => return Err(CliError::Usage(m)),
            };
            warn_sampled(tab.mode, "the three-code sum");
            let mut csv = String::from("delta,dims,weight,min_cost,ratio,mode,seed\n");
            for r in &tab.rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    tab.delta,
                    tab.dims,
                    r.weight,
                    r.min_cost,
                    r.ratio,
                    tab.mode.name(),
                    tab.seed
                ));
            }
            emit(args, &csv)?;
            eprint!("{}", to_json(&serde_json::json!({
                "rho": tab.rho,
                "rho2": tab.rho2,
                "checked": tab.checked,
                "bound_violations": tab.bound_violations,
            })));
            Ok(())
        }
    }
}
