//! Experiment configuration: TOML with `[surface]`, `[[caps]]`, `[target]`,
//! `[run]` and `[output]` blocks.
//!
//! Complex numbers are written as strings (`"0.5"`, `"1-2i"`, `"inf"`);
//! cap maps as calls such as `"joukowski-ellipse(0, 1, 0.25)"`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::conformal::{CapFamily, ConformalMap, MapKind};
use crate::C64;

/// Config problem tied to a field path such as `surface.tau`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub surface: SurfaceBlock,
    pub caps: Vec<CapBlock>,
    pub target: TargetBlock,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceBlock {
    /// 0 (sphere) or 1 (torus).
    pub genus: u8,
    pub tau: Option<String>,
    /// Base point; `"inf"` (the default) on the sphere.
    pub q: Option<String>,
    pub w0: String,
    /// Corner of the fundamental parallelogram (torus).
    pub corner: Option<String>,
    pub margin: Option<f64>,
    /// Minimum gap between caps.
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapBlock {
    pub map: String,
}

/// Target families. Cap indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetBlock {
    /// `−π K(w, a) dw` (`dw/(w − a)²` on the sphere), `a` inside a cap.
    DoublePole { at: String },
    /// A single Faber–Tietz form `α^m_k`.
    FaberAlpha { cap: usize, m: u32 },
    /// Random finite combination of `β`, `γ` and `α^m_k`, `m ≤ max_m`.
    FaberCombination { max_m: u32, seed: Option<u64> },
    /// `Σ residue (w − at)^{−order} dw`; poles are not validated.
    Poles { poles: Vec<PoleBlock> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleBlock {
    pub at: String,
    pub order: u32,
    pub residue: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    pub truncations: Vec<u32>,
    pub boundary_nodes: usize,
    pub checks: Vec<String>,
    pub seed: u64,
    /// Strict residual / sup-error decrease instead of non-increase.
    pub strictly_decreasing: bool,
    pub residual_tolerance: f64,
    pub uniform_tolerance: f64,
    /// Distance of the uniform-error circles from the caps.
    pub uniform_distance: f64,
    /// Largest `m` in the pole-structure check.
    pub pole_orders: u32,
    pub pole_tolerance: f64,
    pub sample_points: usize,
    /// Translation used by the invariance check.
    pub invariance_shift: String,
    pub invariance_order: u32,
    pub invariance_tolerance: f64,
    /// Escalate a regularized Gram solve to a numerical failure.
    pub strict: bool,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            truncations: vec![5, 10, 20, 40],
            boundary_nodes: 256,
            checks: Vec::new(),
            seed: 0,
            strictly_decreasing: false,
            residual_tolerance: 1e-6,
            uniform_tolerance: 1e-6,
            uniform_distance: 0.5,
            pole_orders: 12,
            pole_tolerance: 1e-7,
            sample_points: 20,
            invariance_shift: "1".into(),
            invariance_order: 10,
            invariance_tolerance: 1e-8,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
    /// Any of `"csv"`, `"json"`.
    pub formats: Vec<String>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec!["csv".into(), "json".into()] }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map_or_else(|| "config".to_string(), |s| field_at(text, s.start));
            ConfigError::new(field, e.message().to_string())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Best-effort `block.key` name of the TOML entry at byte `offset`.
fn field_at(text: &str, offset: usize) -> String {
    let head = &text[..offset.min(text.len())];
    let block = head
        .lines()
        .rev()
        .find_map(|l| {
            let l = l.trim();
            l.starts_with('[').then(|| l.trim_matches(|c| c == '[' || c == ']').to_string())
        })
        .unwrap_or_default();
    let line = head.lines().last().unwrap_or_default();
    let key = line.split('=').next().unwrap_or_default().trim();
    match (block.is_empty(), key.is_empty() || key.starts_with('[')) {
        (true, _) => key.to_string(),
        (false, true) => block,
        (false, false) => format!("{block}.{key}"),
    }
}

/// Parses `"1.5"`, `"-2i"`, `"0.3-1.2i"`, `"1 + i"`.
pub fn parse_complex(field: &str, text: &str) -> Result<C64, ConfigError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let normalized = compact.replace("+i", "+1i").replace("-i", "-1i");
    let normalized = if normalized == "i" { "1i".to_string() } else { normalized };
    normalized
        .parse::<C64>()
        .ok()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .ok_or_else(|| ConfigError::new(field, format!("`{text}` is not a finite complex number")))
}

/// Like [`parse_complex`], with `"inf"` / `"infinity"` mapped to `None`.
pub fn parse_point(field: &str, text: &str) -> Result<Option<C64>, ConfigError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(None),
        _ => parse_complex(field, text).map(Some),
    }
}

/// Parses a cap map call.
pub fn parse_map(field: &str, text: &str) -> Result<ConformalMap<f64>, ConfigError> {
    let kind = parse_kind(field, text.trim())?;
    ConformalMap::new(kind).map_err(|e| ConfigError::new(field, e.to_string()))
}

fn parse_kind(field: &str, text: &str) -> Result<MapKind<f64>, ConfigError> {
    let open = text.find('(').ok_or_else(|| ConfigError::new(field, format!("`{text}` is not a map call")))?;
    if !text.ends_with(')') {
        return Err(ConfigError::new(field, format!("`{text}` lacks a closing parenthesis")));
    }
    let name = text[..open].trim();
    let args = split_args(&text[open + 1..text.len() - 1]);
    let num = |i: usize| -> Result<C64, ConfigError> {
        let arg = args.get(i).ok_or_else(|| ConfigError::new(field, format!("{name} expects more arguments")))?;
        parse_complex(field, arg)
    };
    let arity = |n: usize| -> Result<(), ConfigError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(ConfigError::new(field, format!("{name} takes {n} arguments, got {}", args.len())))
        }
    };
    match name {
        "affine" => {
            arity(2)?;
            Ok(MapKind::Affine { center: num(0)?, scale: num(1)? })
        }
        "joukowski-ellipse" => {
            arity(3)?;
            Ok(MapKind::JoukowskiEllipse { center: num(0)?, scale: num(1)?, a: num(2)? })
        }
        "polynomial-perturbation" => {
            if args.len() < 3 {
                return Err(ConfigError::new(field, "polynomial-perturbation needs center, scale and coefficients"));
            }
            let coefficients = (2..args.len()).map(num).collect::<Result<_, _>>()?;
            Ok(MapKind::PolynomialPerturbation { center: num(0)?, scale: num(1)?, coefficients })
        }
        "moebius-composed" => {
            arity(5)?;
            let inner = parse_kind(field, args[4].trim())?;
            Ok(MapKind::MoebiusComposed { moebius: [num(0)?, num(1)?, num(2)?, num(3)?], inner: Box::new(inner) })
        }
        other => Err(ConfigError::new(
            field,
            format!("unknown map `{other}` (expected affine, joukowski-ellipse, polynomial-perturbation, moebius-composed)"),
        )),
    }
}

fn split_args(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(current.trim().to_string());
                current.clear();
                continue;
            }
            _ => {}
        }
        current.push(ch);
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

/// Caps of a config as a validated family.
pub fn build_caps(config: &ExperimentConfig) -> Result<CapFamily<f64>, ConfigError> {
    if config.caps.is_empty() {
        return Err(ConfigError::new("caps", "at least one cap is required"));
    }
    let maps = config
        .caps
        .iter()
        .enumerate()
        .map(|(i, c)| parse_map(&format!("caps[{}].map", i + 1), &c.map))
        .collect::<Result<Vec<_>, _>>()?;
    CapFamily::new(maps, config.surface.separation.unwrap_or(0.0)).map_err(|e| ConfigError::new("caps", e.to_string()))
}
