use super::net::{Layout, RecurrentPolicy};
use super::PolicyError;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_FORMAT: &str = "uav-evac-policy";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

/// JSON checkpoint: a shape manifest followed by the flat parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub hidden: usize,
    pub bounds: Vec<(f64, f64)>,
    pub tensors: Vec<TensorEntry>,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn from_policy(policy: &RecurrentPolicy) -> Self {
        let layout = policy.layout();
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            obs_dim: layout.obs_dim,
            act_dim: layout.act_dim,
            hidden: layout.hidden,
            bounds: policy.bounds().to_vec(),
            tensors: layout
                .tensors()
                .into_iter()
                .map(|(name, shape, range)| TensorEntry {
                    name: name.into(),
                    shape,
                    offset: range.start,
                })
                .collect(),
            params: policy.params().to_vec(),
        }
    }

    pub fn into_policy(self) -> Result<RecurrentPolicy, PolicyError> {
        let bad = |m: String| Err(PolicyError::Checkpoint(m));
        if self.format != CHECKPOINT_FORMAT {
            return bad(format!("unknown format {:?}", self.format));
        }
        if self.version != CHECKPOINT_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.obs_dim == 0 || self.act_dim == 0 || self.hidden == 0 {
            return bad("zero-sized dimensions".into());
        }
        let layout = Layout::new(self.obs_dim, self.act_dim, self.hidden);
        let expected: Vec<_> = layout
            .tensors()
            .into_iter()
            .map(|(name, shape, range)| TensorEntry {
                name: name.into(),
                shape,
                offset: range.start,
            })
            .collect();
        if self.tensors != expected {
            return bad("tensor manifest does not match the declared dimensions".into());
        }
        if self.params.len() != layout.len() {
            return bad(format!(
                "expected {} parameters, found {}",
                layout.len(),
                self.params.len()
            ));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return bad("non-finite parameter".into());
        }
        let policy = RecurrentPolicy::from_raw(layout, self.params, vec![(-1.0, 1.0); self.act_dim]);
        policy
            .with_bounds(self.bounds)
            .map_err(|e| PolicyError::Checkpoint(e.to_string()))
    }
}

pub fn save_policy(policy: &RecurrentPolicy, path: &Path) -> Result<(), PolicyError> {
    let text = serde_json::to_string(&Checkpoint::from_policy(policy))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_policy(path: &Path) -> Result<RecurrentPolicy, PolicyError> {
    let text = std::fs::read_to_string(path)?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    ckpt.into_policy()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let p = RecurrentPolicy::new(6, 5, 4, 8)
            .unwrap()
            .with_bounds(vec![(0.0, 5.0), (-3.2, 3.2), (0.0, 5.0), (-3.2, 3.2), (-3.2, 3.2)])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        save_policy(&p, &path).unwrap();
        assert_eq!(load_policy(&path).unwrap(), p);
    }

    #[test]
    fn tampered_manifest_rejected() {
        let p = RecurrentPolicy::new(6, 5, 4, 8).unwrap();
        let mut c = Checkpoint::from_policy(&p);
        c.hidden = 5;
        assert!(matches!(c.into_policy(), Err(PolicyError::Checkpoint(_))));
        let mut c = Checkpoint::from_policy(&p);
        c.params.pop();
        assert!(c.into_policy().is_err());
    }
}
