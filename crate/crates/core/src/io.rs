//! Plain-text formats: `key = value` records for domains and run settings,
//! monomial norm tables and kernel series.

use std::collections::BTreeMap;

use crate::domain::{DomainKind, DomainSpec, PolynomialProfile};
use crate::error::{Error, Result};
use crate::kernels::{DiagonalKernelSeries, KernelKind};
use crate::metric::CurvatureReport;
use crate::quadrature::{multi_indices, MonomialNormTable};
use crate::scaling::ScalingRow;
use crate::scalar::{Cplx, Real};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped and
/// later keys override earlier ones.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<V: std::str::FromStr>(key: &str, v: &str) -> Result<V> {
    v.parse().map_err(|_| Error::Parse(format!("invalid value for {key}: {v:?}")))
}

/// Domain from a record with keys `kind`, `n`, `epsilon` and `profile`
/// (`i j c` triples separated by `;` for `ρ = Σ c s1^i s2^j`).
pub fn domain_from_record<T: Real>(rec: &BTreeMap<String, String>) -> Result<DomainSpec<T>> {
    let kind = rec
        .get("kind")
        .ok_or_else(|| Error::Parse("missing key: kind".into()))?;
    let n: usize = match rec.get("n") {
        Some(v) => parse_num("n", v)?,
        None => 2,
    };
    match kind.as_str() {
        "unit-ball" | "ball" => DomainSpec::unit_ball(n),
        "siegel-model" | "siegel" => DomainSpec::siegel(n),
        "bumped-ball" | "bumped" => {
            let eps: f64 = parse_num(
                "epsilon",
                rec.get("epsilon").ok_or_else(|| Error::Parse("missing key: epsilon".into()))?,
            )?;
            DomainSpec::bumped_ball(n, T::lit(eps))
        }
        "reinhardt-profile" | "profile" => {
            let text = rec
                .get("profile")
                .ok_or_else(|| Error::Parse("missing key: profile".into()))?;
            DomainSpec::reinhardt_profile(parse_profile(text)?)
        }
        other => Err(Error::Parse(format!("unknown domain kind {other:?}"))),
    }
}

fn parse_profile<T: Real>(text: &str) -> Result<PolynomialProfile<T>> {
    let mut terms = Vec::new();
    for chunk in text.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        let parts: Vec<&str> = chunk.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("profile term {chunk:?} needs `i j c`")));
        }
        let c: f64 = parse_num("profile", parts[2])?;
        terms.push((parse_num("profile", parts[0])?, parse_num("profile", parts[1])?, T::lit(c)));
    }
    Ok(PolynomialProfile::new(terms))
}

pub fn parse_domain<T: Real>(text: &str) -> Result<DomainSpec<T>> {
    domain_from_record(&parse_key_values(text)?)
}

pub fn domain_to_record<T: Real>(spec: &DomainSpec<T>) -> String {
    let mut out = format!("kind = {}\nn = {}\n", spec.name(), spec.dim());
    match spec.kind() {
        DomainKind::BumpedBall { epsilon } => out.push_str(&format!("epsilon = {:.16e}\n", epsilon.as_f64())),
        DomainKind::ReinhardtProfile(p) => {
            let terms: Vec<String> = p
                .terms
                .iter()
                .map(|(i, j, c)| format!("{i} {j} {:.16e}", c.as_f64()))
                .collect();
            out.push_str(&format!("profile = {}\n", terms.join("; ")));
        }
        DomainKind::UnitBall | DomainKind::SiegelModel => {}
    }
    out
}

/// Lines `α₁ α₂ hardy bergman` with 17 significant digits.
pub fn write_norm_table<T: Real>(table: &MonomialNormTable<T>) -> String {
    let mut out = String::new();
    for (a, h, b) in &table.entries {
        out.push_str(&format!("{} {} {:.16e} {:.16e}\n", a[0], a[1], h.as_f64(), b.as_f64()));
    }
    out
}

pub fn read_norm_table<T: Real>(text: &str) -> Result<MonomialNormTable<T>> {
    let mut entries = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("norm table line {line:?} needs 4 fields")));
        }
        let a = [parse_num::<usize>("alpha", parts[0])?, parse_num::<usize>("alpha", parts[1])?];
        let h: f64 = parse_num("hardy", parts[2])?;
        let b: f64 = parse_num("bergman", parts[3])?;
        entries.push((a, T::lit(h), T::lit(b)));
    }
    let degree = entries.iter().map(|(a, _, _)| a[0] + a[1]).max().unwrap_or(0);
    let expected = multi_indices(degree);
    if entries.len() != expected.len() || entries.iter().zip(&expected).any(|(e, a)| e.0 != *a) {
        return Err(Error::Parse("norm table rows are incomplete or out of order".into()));
    }
    Ok(MonomialNormTable { degree, entries })
}

/// Series file: a header `kind n D c_n` followed by the norm table.
pub fn write_series<T: Real>(table: &MonomialNormTable<T>, kind: KernelKind, c_n: T) -> String {
    format!(
        "{} 2 {} {:.16e}\n{}",
        kind.as_str(),
        table.degree,
        c_n.as_f64(),
        write_norm_table(table)
    )
}

pub fn read_series<T: Real>(text: &str, domain: &str) -> Result<DiagonalKernelSeries<T>> {
    let (header, body) = text.split_once('\n').unwrap_or((text, ""));
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::Parse("series header needs `kind n D c_n`".into()));
    }
    let kind: KernelKind = parts[0].parse()?;
    let n: usize = parse_num("n", parts[1])?;
    let d: usize = parse_num("D", parts[2])?;
    let c_n: f64 = parse_num("c_n", parts[3])?;
    if n != 2 {
        return Err(Error::UnsupportedSpec("series files store n = 2 norm tables".into()));
    }
    let table = read_norm_table::<T>(body)?;
    if table.degree != d {
        return Err(Error::Parse(format!("header degree {d} but table degree {}", table.degree)));
    }
    DiagonalKernelSeries::from_table(&table, kind, T::lit(c_n), domain)
}

/// Complex vector as `a+bi;c+di`, safe inside a CSV field.
pub fn format_point<T: Real>(z: &[Cplx<T>]) -> String {
    z.iter()
        .map(|c| format!("{:.16e}{:+.16e}i", c.re.as_f64(), c.im.as_f64()))
        .collect::<Vec<_>>()
        .join(";")
}

pub const CURVATURE_CSV_HEADER: &str = "z,X,tau,g,beta,R,Ric,tail_bound";

pub fn curvature_csv<T: Real>(rows: &[(Vec<Cplx<T>>, Vec<Cplx<T>>, CurvatureReport<T>)]) -> String {
    let mut out = format!("{CURVATURE_CSV_HEADER}\n");
    for (z, x, r) in rows {
        out.push_str(&format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            format_point(z),
            format_point(x),
            r.tau.as_f64(),
            r.g.as_f64(),
            r.beta.as_f64(),
            r.r.as_f64(),
            r.ric.as_f64(),
            r.tail_bound.as_f64()
        ));
    }
    out
}

pub const SCALING_CSV_HEADER: &str = "j,delta,eta,residual,opnorm_Q_minus_I";

pub fn scaling_csv<T: Real>(rows: &[ScalingRow<T>]) -> String {
    let mut out = format!("{SCALING_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.j,
            r.delta.as_f64(),
            r.eta.as_f64(),
            r.residual.as_f64(),
            r.q_deviation.as_f64()
        ));
    }
    out
}
