use std::fs;
use std::path::{Path, PathBuf};

use codeswitch::bundle::{Bundle, BundleError};
use codeswitch::hgp::CssCode;
use codeswitch::homomorphic::CnotSchedule;

/// Error carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Verification or simulation failure (exit 1).
    Failure(String),
    /// Bad arguments, unreadable inputs or infeasible parameters (exit 2).
    Usage(String),
    /// A scan budget was exhausted (exit 3).
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Failure(m) | CliError::Usage(m) | CliError::Budget(m) => m,
        }
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        if e.is_infeasible() {
            CliError::Usage(format!("infeasible parameters: {e}"))
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut tmp = PathBuf::from(path);
    tmp.as_mut_os_string().push(".tmp");
    fs::write(&tmp, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Parses a bundle and rebuilds its recipe; the stored matrices must match the rebuild.
pub fn load_code(path: &Path) -> CliResult<(Bundle, CssCode)> {
    let bundle = Bundle::parse(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let report = bundle.verify();
    if !report.passed() {
        return Err(CliError::Failure(format!("{}: {}", path.display(), report.failures.join("; "))));
    }
    let mut code = bundle.header.recipe.build()?.code;
    code.d_x = bundle.header.params.d_x;
    code.d_z = bundle.header.params.d_z;
    code.d_ss = bundle.header.params.d_ss;
    Ok((bundle, code))
}

pub fn schedule_csv_parse(text: &str) -> Result<CnotSchedule, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["control_index", "target_index"] {
        return Err("expected header control_index,target_index".into());
    }
    let mut pairs = Vec::new();
    for rec in reader.deserialize::<(usize, usize)>() {
        pairs.push(rec.map_err(|e| e.to_string())?);
    }
    let mut c: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let mut t: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    c.sort_unstable();
    t.sort_unstable();
    let depth_one = c.windows(2).all(|w| w[0] != w[1]) && t.windows(2).all(|w| w[0] != w[1]);
    Ok(CnotSchedule { pairs, depth_one })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_round_trip() {
        let s = CnotSchedule { pairs: vec![(0, 3), (2, 1)], depth_one: true };
        assert_eq!(schedule_csv_parse(&s.to_csv()).unwrap(), s);
        let dup = schedule_csv_parse("control_index,target_index\n0,1\n0,2\n").unwrap();
        assert!(!dup.depth_one);
        assert!(schedule_csv_parse("a,b\n0,1\n").is_err());
    }
}
