//! TOML run configuration with sections `world`, `fire`, `evac`, `env`,
//! `ppo` and `eval`. Every key is optional; missing keys take defaults.

use super::HarnessError;
use crate::env::{EnvConfig, EnvParams, FireParams, Variant, VariantSpec};
use crate::evacuee::EvacueeParams;
use crate::policy::{load_policy, PolicySpec};
use crate::ppo::PpoConfig;
use crate::world::{load_map, FovParams, FovTable, GridMap, DEFAULT_MAP, SMALL_MAP};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSection {
    /// `"default"`, `"small"`, or a path to a map file.
    pub map: String,
    pub hlr_fov: FovParams,
    pub llr_fov: FovParams,
}

impl Default for WorldSection {
    fn default() -> Self {
        let fov = FovTable::default();
        Self {
            map: "default".into(),
            hlr_fov: fov.hlr,
            llr_fov: fov.llr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub variant: Variant,
    /// Randomization radius for the variant's perturbed quantities.
    pub r: f64,
    pub n_episodes: usize,
    pub seed: u64,
    /// `"scripted"`, `"random"`, or a checkpoint path.
    pub policy: String,
    /// Use the mean action of a learned policy.
    pub deterministic: bool,
    pub radii: Vec<f64>,
    pub n_per_radius: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            variant: Variant::I,
            r: 5.0,
            n_episodes: 100,
            seed: 0,
            policy: "scripted".into(),
            deterministic: true,
            radii: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            n_per_radius: 200,
        }
    }
}

impl EvalSection {
    pub fn variant_spec(&self) -> VariantSpec {
        VariantSpec::from_variant(self.variant, self.r)
    }

    /// Resolves `policy`, loading a checkpoint when it names a file.
    pub fn policy_spec(&self) -> Result<PolicySpec, HarnessError> {
        Ok(match self.policy.as_str() {
            "scripted" => PolicySpec::Scripted,
            "random" => PolicySpec::Random,
            path if !Path::new(path).is_file() => {
                return Err(HarnessError::Config(format!(
                    "policy must be \"scripted\", \"random\" or a checkpoint file, got {path}"
                )))
            }
            path => PolicySpec::Learned {
                net: Arc::new(load_policy(Path::new(path))?),
                deterministic: self.deterministic,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub world: WorldSection,
    pub fire: FireParams,
    pub evac: EvacueeParams,
    pub env: EnvParams,
    pub ppo: PpoConfig,
    pub eval: EvalSection,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads a config file. Relative map paths resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if !matches!(cfg.world.map.as_str(), "default" | "small") {
            let p = PathBuf::from(&cfg.world.map);
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.world.map = dir.join(p).to_string_lossy().into_owned();
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load_map(&self) -> Result<GridMap, HarnessError> {
        let text = match self.world.map.as_str() {
            "default" => DEFAULT_MAP.to_string(),
            "small" => SMALL_MAP.to_string(),
            path => std::fs::read_to_string(path)
                .map_err(|e| HarnessError::Config(format!("cannot read map {path}: {e}")))?,
        };
        load_map(&text).map_err(|e| HarnessError::Config(format!("map {}: {e}", self.world.map)))
    }

    /// Environment configuration for the base scenario (Env-I).
    pub fn env_config(&self) -> Result<EnvConfig, HarnessError> {
        let mut cfg = EnvConfig::new(Arc::new(self.load_map()?));
        cfg.fov = FovTable {
            hlr: self.world.hlr_fov,
            llr: self.world.llr_fov,
            evacuee: self.evac.fov,
        };
        cfg.fire = self.fire.clone();
        cfg.evac = self.evac;
        cfg.env = self.env.clone();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Base configuration with the `eval` variant applied.
    pub fn eval_env_config(&self) -> Result<EnvConfig, HarnessError> {
        let mut cfg = self.env_config()?;
        cfg.variant = self.eval.variant_spec();
        cfg.validate()?;
        Ok(cfg)
    }
}
