//! Configuration from flags and an optional flat `key=value` file.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use soliton_poles::kernel::parse_exact;
use soliton_poles::{SolitonConfig, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Plus,
    Minus,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Plus => Variant::Plus,
            VariantArg::Minus => Variant::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Slow wavenumber: a decimal, or an integer or "p/q" for exact mode.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k1: Option<String>,
    /// Fast wavenumber, same syntax as --k1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k2: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x2: Option<f64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Significant digits requested from the root finder.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Flat key=value file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
}

/// Settings after merging the file with the flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub k1: String,
    pub k2: String,
    pub variant: Variant,
    pub x1: f64,
    pub x2: f64,
    pub format: Format,
    pub seed: u64,
    pub precision: Option<u32>,
    pub out: Option<std::path::PathBuf>,
    pub extra: BTreeMap<String, String>,
}

fn read_file(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), n + 1);
        };
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_variant(s: &str) -> anyhow::Result<Variant> {
    match s.to_ascii_lowercase().as_str() {
        "plus" | "+" => Ok(Variant::Plus),
        "minus" | "-" => Ok(Variant::Minus),
        other => bail!("unknown variant {other:?}; use plus or minus"),
    }
}

impl Settings {
    pub fn merge(c: &Common) -> anyhow::Result<Self> {
        let mut file = match &c.config {
            Some(p) => read_file(p)?,
            None => BTreeMap::new(),
        };
        let mut take = |key: &str| file.remove(key);
        let k1 = c.k1.clone().or_else(|| take("k1")).unwrap_or_else(|| "1".into());
        let k2 = c.k2.clone().or_else(|| take("k2")).unwrap_or_else(|| "2".into());
        let variant = match (c.variant, take("variant")) {
            (Some(v), _) => v.into(),
            (None, Some(s)) => parse_variant(&s)?,
            (None, None) => Variant::Plus,
        };
        let num = |flag: Option<f64>, v: Option<String>, key: &str| -> anyhow::Result<f64> {
            match (flag, v) {
                (Some(x), _) => Ok(x),
                (None, Some(s)) => s.parse().with_context(|| format!("config key {key}")),
                (None, None) => Ok(0.0),
            }
        };
        let x1 = num(c.x1, take("x1"), "x1")?;
        let x2 = num(c.x2, take("x2"), "x2")?;
        let format = match (c.format, take("format")) {
            (Some(f), _) => f,
            (None, Some(s)) => Format::from_str(&s, true).map_err(anyhow::Error::msg)?,
            (None, None) => Format::Json,
        };
        let seed = match (c.seed, take("seed")) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse().context("config key seed")?,
            (None, None) => 0,
        };
        let precision = match (c.precision, take("precision")) {
            (Some(p), _) => Some(p),
            (None, Some(s)) => Some(s.parse().context("config key precision")?),
            (None, None) => None,
        };
        let out = c.out.clone().or_else(|| take("out").map(Into::into));
        Ok(Self {
            k1,
            k2,
            variant,
            x1,
            x2,
            format,
            seed,
            precision,
            out,
            extra: file,
        })
    }

    /// Exact mode when both wavenumbers are integers or `p/q`.
    pub fn soliton(&self) -> anyhow::Result<SolitonConfig> {
        let cfg = match (parse_exact(&self.k1), parse_exact(&self.k2)) {
            (Some(a), Some(b)) => SolitonConfig::exact(a, b, self.variant)?,
            _ => {
                let a: f64 = self.k1.parse().with_context(|| format!("--k1 {:?}", self.k1))?;
                let b: f64 = self.k2.parse().with_context(|| format!("--k2 {:?}", self.k2))?;
                SolitonConfig::new(a, b, self.variant)?
            }
        };
        Ok(cfg.with_shifts(self.x1, self.x2))
    }

    /// A value for a subcommand option that may also come from the file.
    pub fn extra_f64(&self, key: &str) -> anyhow::Result<Option<f64>> {
        self.extra
            .get(key)
            .map(|s| s.parse().with_context(|| format!("config key {key}")))
            .transpose()
    }
}
