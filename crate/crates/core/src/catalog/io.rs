//! Instance directories: `instance.json`, `chow.json`, `hyper_<i>.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::param::{MonomialFile, Parametrization};
use super::{DiscriminantSet, VarietyInstance};
use crate::chern::ChernProfile;
use crate::error::{Error, Result};
use crate::exactpoly::json::{read_poly, write_poly};
use crate::exactpoly::{format_rational, parse_rational};
use crate::invariants::VarietyData;

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    name: String,
    n: u32,
    #[serde(rename = "N")]
    ambient: u32,
    d: u32,
    mu: Vec<String>,
    delta: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parametrization: Option<Vec<Vec<MonomialFile>>>,
}

pub fn write_instance(dir: &Path, inst: &VarietyInstance) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let d = &inst.data;
    let f = InstanceFile {
        name: inst.name.clone(),
        n: d.n,
        ambient: d.ambient,
        d: d.degree,
        mu: d.mu.mu.iter().map(format_rational).collect(),
        delta: d.delta,
        parametrization: inst.parametrization.as_ref().map(|p| p.to_file()),
    };
    std::fs::write(
        dir.join("instance.json"),
        serde_json::to_string_pretty(&f)? + "\n",
    )?;
    write_poly(&dir.join("chow.json"), &inst.discriminants.chow)?;
    for (i, p) in &inst.discriminants.hyper {
        write_poly(&dir.join(format!("hyper_{i}.json")), p)?;
    }
    Ok(())
}

/// Reads and validates an instance directory. Missing `hyper_<i>.json` files
/// are allowed; the energy then only supports smaller `k`.
pub fn read_instance(dir: &Path) -> Result<VarietyInstance> {
    let meta = dir.join("instance.json");
    let text = std::fs::read_to_string(&meta)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", meta.display())))?;
    let f: InstanceFile = serde_json::from_str(&text)?;
    let mu =
        f.mu.iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
    let profile = ChernProfile::new(f.n, mu, f.d, f.ambient)?;
    let data = VarietyData::new(f.n, f.ambient, f.d, profile, f.delta)?;
    let chow_path = dir.join("chow.json");
    if !chow_path.exists() {
        return Err(Error::Missing(format!("{} not found", chow_path.display())));
    }
    let chow = read_poly(&chow_path)?;
    let mut hyper = BTreeMap::new();
    for i in 1..=f.n - f.delta {
        let p = dir.join(format!("hyper_{i}.json"));
        if p.exists() {
            hyper.insert(i, read_poly(&p)?);
        }
    }
    let param = f
        .parametrization
        .as_ref()
        .map(|p| Parametrization::from_file(f.n as usize, p))
        .transpose()?;
    VarietyInstance::new(f.name, data, param, DiscriminantSet { chow, hyper })
}
