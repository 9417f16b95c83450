//! Run settings assembled from an optional `key = value` file and flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use szego_lab::domain::DomainSpec;
use szego_lab::io::{domain_from_record, parse_key_values};
use szego_lab::Cx;

use crate::error::CliError;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: DomainSpec<f64>,
    pub degree: usize,
    pub c_n: f64,
    pub deltas: Option<Vec<f64>>,
    pub out: PathBuf,
    pub tol: Tolerances,
    /// Use truncated series even where a closed form exists.
    pub series: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Tolerances {
    pub limit: Option<f64>,
    pub ratio: Option<f64>,
    pub residual_factor: Option<f64>,
}

/// Raw values before validation, from flags or the config file.
#[derive(Debug, Clone, Default)]
pub struct RawSettings {
    pub domain: Option<String>,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub profile: Option<String>,
    pub degree: Option<usize>,
    pub cn: Option<f64>,
    pub deltas: Option<String>,
    pub out: Option<PathBuf>,
    pub tol_limit: Option<f64>,
    pub tol_ratio: Option<f64>,
    pub tol_residual_factor: Option<f64>,
}

fn parse_field<V: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<V>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {v:?}")))
        })
        .transpose()
}

impl RawSettings {
    pub fn from_config_text(text: &str) -> Result<Self, CliError> {
        let map = parse_key_values(text)?;
        let known = [
            "domain",
            "kind",
            "n",
            "epsilon",
            "profile",
            "degree",
            "cn",
            "deltas",
            "out",
            "tol-limit",
            "tol-ratio",
            "tol-residual-factor",
        ];
        if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown config key {k:?}")));
        }
        Ok(Self {
            domain: map.get("domain").or_else(|| map.get("kind")).cloned(),
            n: parse_field(&map, "n")?,
            epsilon: parse_field(&map, "epsilon")?,
            profile: map.get("profile").cloned(),
            degree: parse_field(&map, "degree")?,
            cn: parse_field(&map, "cn")?,
            deltas: map.get("deltas").cloned(),
            out: map.get("out").map(PathBuf::from),
            tol_limit: parse_field(&map, "tol-limit")?,
            tol_ratio: parse_field(&map, "tol-ratio")?,
            tol_residual_factor: parse_field(&map, "tol-residual-factor")?,
        })
    }

    /// Values set in `over` replace those in `self`.
    pub fn overlay(self, over: RawSettings) -> Self {
        Self {
            domain: over.domain.or(self.domain),
            n: over.n.or(self.n),
            epsilon: over.epsilon.or(self.epsilon),
            profile: over.profile.or(self.profile),
            degree: over.degree.or(self.degree),
            cn: over.cn.or(self.cn),
            deltas: over.deltas.or(self.deltas),
            out: over.out.or(self.out),
            tol_limit: over.tol_limit.or(self.tol_limit),
            tol_ratio: over.tol_ratio.or(self.tol_ratio),
            tol_residual_factor: over.tol_residual_factor.or(self.tol_residual_factor),
        }
    }

    pub fn resolve(self, default_domain: &str, series: bool) -> Result<RunConfig, CliError> {
        let mut rec = BTreeMap::new();
        let kind = self.domain.unwrap_or_else(|| default_domain.to_string());
        let is_bumped = matches!(kind.as_str(), "bumped" | "bumped-ball");
        rec.insert("kind".to_string(), kind);
        rec.insert("n".to_string(), self.n.unwrap_or(2).to_string());
        let eps = self.epsilon.unwrap_or(DEFAULT_EPSILON);
        if is_bumped {
            rec.insert("epsilon".to_string(), eps.to_string());
        }
        if let Some(p) = self.profile {
            rec.insert("profile".to_string(), p);
        }
        let domain = domain_from_record(&rec)?;
        let degree = self.degree.unwrap_or(DEFAULT_DEGREE);
        if degree < 4 {
            return Err(CliError::Usage(format!("degree must be at least 4, got {degree}")));
        }
        let c_n = self.cn.unwrap_or(1.0);
        if !(c_n > 0.0 && c_n.is_finite()) {
            return Err(CliError::Usage(format!("c_n must be positive, got {c_n}")));
        }
        let deltas = self.deltas.map(|s| parse_deltas(&s)).transpose()?;
        Ok(RunConfig {
            domain,
            degree,
            c_n,
            deltas,
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            tol: Tolerances {
                limit: self.tol_limit,
                ratio: self.tol_ratio,
                residual_factor: self.tol_residual_factor,
            },
            series,
        })
    }
}

pub const DEFAULT_DEGREE: usize = 40;
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Comma-separated, positive and strictly decreasing.
pub fn parse_deltas(text: &str) -> Result<Vec<f64>, CliError> {
    let v = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid delta {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let decreasing = v.windows(2).all(|w| w[1] < w[0]);
    if v.is_empty() || !v.iter().all(|d| *d > 0.0) || !decreasing {
        return Err(CliError::Usage("deltas must be positive and strictly decreasing".into()));
    }
    Ok(v)
}

/// Comma-separated complex coordinates such as `0.1,0.2+0.3i`.
pub fn parse_point(text: &str, n: usize) -> Result<Vec<Cx>, CliError> {
    let v = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<Cx>()
                .map_err(|_| CliError::Usage(format!("invalid complex coordinate {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(CliError::Usage(format!("point {text:?} has {} coordinates, expected {n}", v.len())));
    }
    Ok(v)
}
