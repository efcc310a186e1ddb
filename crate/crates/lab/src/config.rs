//! Typed experiment configuration, read from TOML. Rational values are
//! written as `"num/den"` strings so line data and vector entries stay
//! exact.

use std::path::Path;

use anyhow::{bail, Context, Result};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Deserialize;
use wildorbit_core::lines::{Arc, LineUnion};
use wildorbit_core::vector::{Field, NormSpec, SparseVector};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldChoice,
    pub p: String,
    pub operator: OperatorChoice,
    pub depth: usize,
    #[serde(default = "default_true")]
    pub strict: bool,
    pub f_set: FSetConfig,
    #[serde(default)]
    pub vectors: Vec<VectorConfig>,
    pub horizon: HorizonConfig,
    #[serde(default = "default_trunc")]
    pub trunc: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub epsilon: Option<String>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_true() -> bool {
    true
}

fn default_trunc() -> usize {
    wildorbit_core::diagonal::TRUNC_DEFAULT
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorChoice {
    Diagonal,
    Rotation,
    HajekSmith,
    BackwardShift,
}

impl OperatorChoice {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorChoice::Diagonal => "diagonal",
            OperatorChoice::Rotation => "rotation",
            OperatorChoice::HajekSmith => "hajek_smith",
            OperatorChoice::BackwardShift => "backward_shift",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FSetConfig {
    /// Real case: closed arcs of direction angles, in turns.
    #[serde(default)]
    pub arcs: Vec<ArcConfig>,
    /// Real case: isolated direction angles, in turns.
    #[serde(default)]
    pub lines: Vec<String>,
    /// Complex case: isolated slopes.
    #[serde(default)]
    pub points: Vec<ComplexConfig>,
    /// Complex case: closed slope disks.
    #[serde(default)]
    pub disks: Vec<DiskConfig>,
    /// Complex case: include the vertical line (infinite slope).
    #[serde(default)]
    pub vertical: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcConfig {
    pub lo: String,
    pub hi: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexConfig {
    pub re: String,
    #[serde(default)]
    pub im: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskConfig {
    pub re: String,
    #[serde(default)]
    pub im: Option<String>,
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum HorizonConfig {
    /// The literal string "windows": sample the dyadic-window return times
    /// from the schedule or layout.
    Auto(String),
    /// Explicit times, decimal strings of arbitrary size.
    List(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorConfig {
    pub name: String,
    #[serde(default)]
    pub entries: Vec<EntryConfig>,
    /// Cycle-model block entries: 0-based local coordinate inside a block.
    #[serde(default)]
    pub blocks: Vec<BlockEntryConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub index: u64,
    pub re: toml::Value,
    #[serde(default)]
    pub im: Option<toml::Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntryConfig {
    pub block: usize,
    pub local: String,
    pub value: toml::Value,
}

/// Parses `"num/den"` (or a plain integer string) into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: i64 = num
        .parse()
        .with_context(|| format!("bad rational numerator in {s:?}"))?;
    let den: i64 = den
        .parse()
        .with_context(|| format!("bad rational denominator in {s:?}"))?;
    if den == 0 {
        bail!("zero denominator in {s:?}");
    }
    Ok(Rational64::new(num, den))
}

/// Numeric TOML values come in as floats/integers or "num/den" strings.
pub fn parse_scalar(v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) => Ok(*f),
        toml::Value::String(s) => {
            let r = parse_rational(s)?;
            r.to_f64().context("rational out of f64 range")
        }
        other => bail!("expected number or \"num/den\" string, got {other}"),
    }
}

pub fn parse_big(s: &str) -> Result<BigUint> {
    s.trim()
        .parse::<BigUint>()
        .with_context(|| format!("bad horizon value {s:?}"))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_str_validated(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("parsing config text")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.operator {
            OperatorChoice::Diagonal | OperatorChoice::Rotation => {
                if self.depth < 3 {
                    bail!("depth: must be >= 3 for {}", self.operator.name());
                }
            }
            OperatorChoice::HajekSmith => {
                if self.depth < 2 {
                    bail!("depth: must be >= 2 for hajek_smith");
                }
            }
            OperatorChoice::BackwardShift => {}
        }
        if self.operator == OperatorChoice::Rotation && self.field != FieldChoice::Real {
            bail!("field: rotation model requires field = \"real\"");
        }
        if let HorizonConfig::Auto(word) = &self.horizon {
            if word != "windows" {
                bail!("horizon: expected \"windows\" or a list of times, got {word:?}");
            }
        }
        self.norm_spec().context("p")?;
        self.line_union().context("f_set")?;
        if let Some(eps) = &self.epsilon {
            let v = parse_rational(eps).context("epsilon")?;
            if v <= Rational64::new(0, 1) {
                bail!("epsilon: must be positive");
            }
        }
        Ok(())
    }

    pub fn norm_spec(&self) -> Result<NormSpec> {
        if self.p.trim() == "inf" {
            return Ok(NormSpec::sup());
        }
        let p = parse_rational(&self.p)?
            .to_f64()
            .context("p out of range")?;
        Ok(NormSpec::new(p).map_err(|e| anyhow::anyhow!("{e}"))?)
    }

    pub fn scalar_field(&self) -> Field {
        match self.field {
            FieldChoice::Real => Field::Real,
            FieldChoice::Complex => Field::Complex,
        }
    }

    pub fn line_union(&self) -> Result<LineUnion> {
        match self.field {
            FieldChoice::Real => {
                let arcs = self
                    .f_set
                    .arcs
                    .iter()
                    .map(|a| {
                        Ok(Arc {
                            lo: parse_rational(&a.lo)?,
                            hi: parse_rational(&a.hi)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let lines = self
                    .f_set
                    .lines
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LineUnion::real(arcs, lines).map_err(|e| anyhow::anyhow!("{e}"))?)
            }
            FieldChoice::Complex => {
                let complex_of = |re: &str, im: &Option<String>| -> Result<Complex64> {
                    let re = parse_rational(re)?.to_f64().context("slope out of range")?;
                    let im = match im {
                        Some(s) => parse_rational(s)?.to_f64().context("slope out of range")?,
                        None => 0.0,
                    };
                    Ok(Complex64::new(re, im))
                };
                let points = self
                    .f_set
                    .points
                    .iter()
                    .map(|p| complex_of(&p.re, &p.im))
                    .collect::<Result<Vec<_>>>()?;
                let disks = self
                    .f_set
                    .disks
                    .iter()
                    .map(|d| Ok((complex_of(&d.re, &d.im)?, d.radius)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LineUnion::complex(disks, points, self.f_set.vertical)
                    .map_err(|e| anyhow::anyhow!("{e}"))?)
            }
        }
    }

    pub fn epsilon_value(&self) -> Result<Option<f64>> {
        match &self.epsilon {
            None => Ok(None),
            Some(s) => Ok(Some(
                parse_rational(s)?.to_f64().context("epsilon out of range")?,
            )),
        }
    }
}

impl VectorConfig {
    pub fn to_sparse(&self, field: Field) -> Result<SparseVector> {
        let mut v = SparseVector::new(field);
        for e in &self.entries {
            let re = parse_scalar(&e.re).with_context(|| format!("vector {}", self.name))?;
            let im = match &e.im {
                Some(val) => parse_scalar(val).with_context(|| format!("vector {}", self.name))?,
                None => 0.0,
            };
            if e.index == 0 {
                bail!("vector {}: coordinates are 1-based", self.name);
            }
            v.set(e.index, Complex64::new(re, im))
                .map_err(|err| anyhow::anyhow!("vector {}: {err}", self.name))?;
        }
        Ok(v)
    }

    pub fn to_hs(&self) -> Result<wildorbit_core::hajek::HsVector> {
        let mut v = wildorbit_core::hajek::HsVector::new();
        for e in &self.entries {
            let val = parse_scalar(&e.re).with_context(|| format!("vector {}", self.name))?;
            match e.index {
                1 => v.plane.0 = val,
                2 => v.plane.1 = val,
                other => bail!(
                    "vector {}: cycle-model entries beyond the plane go in [[vectors.blocks]], got index {other}",
                    self.name
                ),
            }
        }
        for b in &self.blocks {
            let val = parse_scalar(&b.value).with_context(|| format!("vector {}", self.name))?;
            v.add_block_entry(b.block, parse_big(&b.local)?, val);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
field = "real"
p = "2"
operator = "diagonal"
depth = 8
strict = true
horizon = ["1", "12", "340282366920938463463374607431768211456"]
trunc = 32
seed = 11

[f_set]
arcs = [{ lo = "0/1", hi = "1/4" }]

[[vectors]]
name = "e3"
entries = [{ index = 3, re = "1/1" }]
"#;

    #[test]
    fn sample_config_parses() {
        let cfg = ExperimentConfig::from_str_validated(SAMPLE).unwrap();
        assert_eq!(cfg.depth, 8);
        assert_eq!(cfg.operator, OperatorChoice::Diagonal);
        assert!(!cfg.norm_spec().unwrap().is_sup());
        let f = cfg.line_union().unwrap();
        assert!(f.more_than_one_line());
        match &cfg.horizon {
            HorizonConfig::List(ts) => {
                assert_eq!(ts.len(), 3);
                let big = parse_big(&ts[2]).unwrap();
                assert!(big > BigUint::from(u128::MAX - 1));
            }
            _ => panic!("expected list"),
        }
    }

    #[test]
    fn rationals_and_errors() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational64::new(3, 4));
        assert_eq!(parse_rational("-2").unwrap(), Rational64::new(-2, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn invalid_configs_name_the_offending_key() {
        let bad_depth = SAMPLE.replace("depth = 8", "depth = 2");
        let err = ExperimentConfig::from_str_validated(&bad_depth)
            .unwrap_err()
            .to_string();
        assert!(err.contains("depth"), "{err}");

        let bad_horizon = SAMPLE.replace(
            "horizon = [\"1\", \"12\", \"340282366920938463463374607431768211456\"]",
            "horizon = \"sometimes\"",
        );
        let err = ExperimentConfig::from_str_validated(&bad_horizon)
            .unwrap_err()
            .to_string();
        assert!(err.contains("horizon"), "{err}");
    }

    #[test]
    fn windows_keyword_accepted() {
        let auto = SAMPLE.replace(
            "horizon = [\"1\", \"12\", \"340282366920938463463374607431768211456\"]",
            "horizon = \"windows\"",
        );
        let cfg = ExperimentConfig::from_str_validated(&auto).unwrap();
        matches!(cfg.horizon, HorizonConfig::Auto(_));
    }

    #[test]
    fn hs_vector_mapping() {
        let v = VectorConfig {
            name: "x".into(),
            entries: vec![EntryConfig {
                index: 1,
                re: toml::Value::String("1/2".into()),
                im: None,
            }],
            blocks: vec![BlockEntryConfig {
                block: 2,
                local: "7".into(),
                value: toml::Value::Float(-0.25),
            }],
        };
        let hs = v.to_hs().unwrap();
        assert_eq!(hs.plane, (0.5, 0.0));
        assert_eq!(
            hs.block(2).unwrap().get(&BigUint::from(7u32)),
            Some(&-0.25)
        );
    }
}
