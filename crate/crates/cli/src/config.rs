//! TOML experiment configs.
//!
//! A config has optional top-level `command`, `[domain]`, `[grid]` and
//! `[quadrature]` tables plus one table per subcommand. Command-line flags
//! override config values.

use std::path::Path;

use dbar_core::cauchy::QuadratureConfig;
use dbar_core::domain::CompactDomain;
use dbar_core::expr::ComplexExpr;
use dbar_core::study::default_ladder;
use dbar_core::C64;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub domain: Option<CompactDomain>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub cauchy: CauchySection,
    #[serde(default)]
    pub bezout: BezoutSection,
    #[serde(default)]
    pub corona: CoronaSection,
    #[serde(default)]
    pub divide: DivideSection,
    #[serde(default)]
    pub sharpness: SharpnessSection,
    #[serde(default)]
    pub faa: FaaSection,
    #[serde(default)]
    pub lconn: LconnSection,
    #[serde(default)]
    pub taylor: TaylorSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Refinement ladder, strictly decreasing.
    #[serde(default = "default_ladder")]
    pub h: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { h: default_ladder() }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchySection {
    pub f: Option<String>,
    /// `"grid"` or a path to a CSV file with columns `re,im`.
    pub targets: Option<String>,
    #[serde(default)]
    pub accept: Accept,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BezoutSection {
    #[serde(default)]
    pub f: Vec<String>,
    pub method: Option<String>,
    pub degree: Option<usize>,
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub dump_fields: bool,
    #[serde(default)]
    pub accept: Accept,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoronaSection {
    #[serde(default)]
    pub f: Vec<String>,
    pub target: Option<String>,
    pub g: Option<String>,
    #[serde(default)]
    pub x: Vec<String>,
    #[serde(default)]
    pub h_list: Vec<String>,
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub dump_fields: bool,
    #[serde(default)]
    pub accept: Accept,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivideSection {
    pub f: Option<String>,
    pub g: Option<String>,
    pub power: Option<u32>,
    pub class: Option<String>,
    /// Probe spacings; defaults to the library's.
    pub probe_h: Option<Vec<f64>>,
    pub expect: Option<String>,
    pub bound: Option<BoundSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSection {
    pub m: usize,
    pub n: usize,
    #[serde(default = "default_variant")]
    pub variant: String,
}

fn default_variant() -> String {
    "holomorphic".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessSection {
    pub probe_h: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaaSection {
    pub n: Option<usize>,
    #[serde(default)]
    pub verify: bool,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LconnSection {
    pub z0: Option<C64>,
    pub scales: Option<Vec<f64>>,
    pub samples_per_scale: Option<usize>,
    pub cells_per_scale: Option<f64>,
    pub expect: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaylorSection {
    pub f: Option<String>,
    pub z0: Option<C64>,
    pub m: Option<usize>,
    pub quotient_demo: Option<usize>,
}

/// Declared acceptance checks; absent bounds are not checked.
#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Accept {
    pub max_residual: Option<f64>,
    pub max_dbar: Option<f64>,
    pub min_slope: Option<f64>,
    pub max_dev: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn domain(&self) -> CompactDomain {
        self.domain.clone().unwrap_or_else(CompactDomain::unit_disk)
    }
}

/// Either a builtin domain name or a TOML file holding a domain, bare or
/// under a `[domain]` table.
pub fn resolve_domain(spec: &str) -> Result<CompactDomain, CliError> {
    let builtin = match spec {
        "unit_disk" | "disk" => Some(CompactDomain::unit_disk()),
        "inner_spiral" => Some(CompactDomain::inner_spiral()),
        "comb" => Some(CompactDomain::comb(6)),
        "sector_chain" => Some(CompactDomain::SectorChain { count: 8 }),
        "disk_chain" => Some(CompactDomain::DiskChain { count: 8 }),
        "half_circle_spiral" => Some(CompactDomain::HalfCircleSpiral { count: 8, thickness: 0.5 }),
        _ => None,
    };
    if let Some(d) = builtin {
        return Ok(d);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Config(format!("unknown domain `{spec}` (not a builtin name or a file)")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {spec}: {e}")))?;
    #[derive(Deserialize)]
    struct Wrapped {
        domain: CompactDomain,
    }
    if let Ok(w) = toml::from_str::<Wrapped>(&text) {
        return Ok(w.domain);
    }
    toml::from_str::<CompactDomain>(&text).map_err(|e| CliError::Config(format!("{spec}: {e}")))
}

pub fn expr(what: &str, src: &str) -> Result<ComplexExpr, CliError> {
    ComplexExpr::parse(src).map_err(|e| CliError::Config(format!("{what} = \"{src}\": {e}")))
}

pub fn exprs(what: &str, srcs: &[String]) -> Result<Vec<ComplexExpr>, CliError> {
    srcs.iter().enumerate().map(|(k, s)| expr(&format!("{what}[{k}]"), s)).collect()
}

/// Split at commas outside parentheses.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// `0.25`, `1/64` or `1e-3`.
pub fn parse_spacing(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("bad grid spacing `{s}`"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if !(v > 0.0 && v.is_finite()) {
        return Err(bad());
    }
    Ok(v)
}

/// `re,im`.
pub fn parse_point(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Config(format!("bad point `{s}`, expected re,im"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// The ladder, optionally replaced by `levels` dyadic halvings of its first
/// entry.
pub fn ladder(hs: &[f64], levels: Option<usize>) -> Result<Vec<f64>, CliError> {
    if hs.is_empty() {
        return Err(CliError::Config("grid.h must not be empty".into()));
    }
    if hs.iter().any(|h| !(*h > 0.0)) || hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config("grid.h must be positive and strictly decreasing".into()));
    }
    Ok(match levels {
        Some(0) => return Err(CliError::Config("--levels must be at least 1".into())),
        Some(n) => (0..n).map(|k| hs[0] * 0.5f64.powi(k as i32)).collect(),
        None => hs.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_split_at_top_level() {
        assert_eq!(split_list("mul(sub(1,z), S),z"), ["mul(sub(1,z), S)", "z"]);
        assert_eq!(split_list("z"), ["z"]);
    }

    #[test]
    fn spacings_and_ladders() {
        assert_eq!(parse_spacing("1/64").unwrap(), 1.0 / 64.0);
        assert!(parse_spacing("-1").is_err());
        assert_eq!(ladder(&[0.1, 0.05], Some(3)).unwrap(), vec![0.1, 0.05, 0.025]);
        assert!(ladder(&[0.1, 0.2], None).is_err());
    }

    #[test]
    fn full_config_parses() {
        let c = ExperimentConfig::parse(
            "command = \"corona\"\n[domain]\nkind = \"disk\"\ncenter = [0.0, 0.0]\nradius = 1.0\n[grid]\nh = [0.1, 0.05, 0.025]\n[corona]\nf = [\"sub(1,z)\", \"z\"]\n[corona.accept]\nmax_residual = 1e-6\n",
        )
        .unwrap();
        assert_eq!(c.corona.f.len(), 2);
        assert_eq!(c.corona.accept.max_residual, Some(1e-6));
        assert!(ExperimentConfig::parse("[corona]\nunknown = 1\n").is_err());
    }
}
