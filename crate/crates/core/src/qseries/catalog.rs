use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{eta_expand, hecke_check, EtaQuotient, QSeries};
use crate::error::{Error, Result};

/// Environment variable naming the directory that holds coefficient tables.
pub const DATA_DIR_ENV: &str = "SUPLAB_DATA_DIR";

const BUILTIN_TABLES: &[(&str, &str)] = &[("form_7_4.json", include_str!("../../data/form_7_4.json"))];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormSource {
    Eta(EtaQuotient),
    /// File name of a coefficient table.
    Table(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub level: u64,
    pub weight: u32,
    pub source: FormSource,
}

/// The shipped newforms.
pub fn catalog() -> Vec<CatalogEntry> {
    let eta = |id: &str, level, weight, s: &str| CatalogEntry {
        id: id.into(),
        level,
        weight,
        source: FormSource::Eta(EtaQuotient::parse(s).expect("catalog eta quotient")),
    };
    vec![
        eta("delta", 1, 12, "1:24"),
        eta("5.4", 5, 4, "1:4,5:4"),
        eta("6.4", 6, 4, "1:2,2:2,3:2,6:2"),
        CatalogEntry { id: "7.4".into(), level: 7, weight: 4, source: FormSource::Table("form_7_4.json".into()) },
        eta("11.2", 11, 2, "1:2,11:2"),
    ]
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    level: u64,
    weight: u32,
    coeffs: Vec<i128>,
}

/// Parse the table format `{"level": N, "weight": k, "coeffs": [a1, a2, ...]}`,
/// normalize `a(1)` to `1` and certify with `hecke_check`.
pub fn parse_coeff_table(text: &str) -> Result<QSeries> {
    let t: TableFile = serde_json::from_str(text)?;
    let f = QSeries::new(t.level, t.weight, &t.coeffs)?.normalized()?;
    let report = hecke_check(&f);
    if !report.passed() {
        return Err(Error::HeckeRejected(report));
    }
    Ok(f)
}

pub fn load_coeff_table(path: &Path) -> Result<QSeries> {
    parse_coeff_table(&std::fs::read_to_string(path)?)
}

/// Canonical serialization of `f` in the table format.
pub fn export_coeff_table(f: &QSeries) -> String {
    let t = TableFile { level: f.level, weight: f.weight, coeffs: f.coeffs().to_vec() };
    serde_json::to_string(&t).expect("serializable")
}

fn table_text(name: &str) -> Result<String> {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        let path = PathBuf::from(dir).join(name);
        if path.exists() {
            return Ok(std::fs::read_to_string(path)?);
        }
    }
    BUILTIN_TABLES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| t.to_string())
        .ok_or_else(|| Error::UnknownForm(name.into()))
}

/// Catalog form `id` to `m` coefficients, certified by `hecke_check`.
pub fn load_form(id: &str, m: usize) -> Result<QSeries> {
    let entry = catalog().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownForm(id.into()))?;
    let f = match &entry.source {
        FormSource::Eta(q) => eta_expand(q, m)?,
        FormSource::Table(name) => parse_coeff_table(&table_text(name)?)?.truncate(m)?,
    };
    if (f.level, f.weight) != (entry.level, entry.weight) {
        return Err(Error::BadTable(format!("catalog entry {id} has level {} weight {}", f.level, f.weight)));
    }
    let report = hecke_check(&f);
    if !report.passed() {
        return Err(Error::HeckeRejected(report));
    }
    Ok(f)
}
