use super::EnvError;
use crate::world::{astar_path, AgentKind, Cell, GridMap};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::I => "I",
            Variant::II => "II",
            Variant::III => "III",
            Variant::IV => "IV",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().trim_start_matches("Env-").to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Variant::I),
            "II" | "2" => Ok(Variant::II),
            "III" | "3" => Ok(Variant::III),
            "IV" | "4" => Ok(Variant::IV),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

/// Evaluation variant: which of the evacuee endpoints and the fire origin
/// are perturbed around the base scenario, and by how much.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub variant: Variant,
    pub position_radius: f64,
    pub fire_radius: f64,
}

impl Default for VariantSpec {
    fn default() -> Self {
        Self::env_i()
    }
}

impl VariantSpec {
    pub fn env_i() -> Self {
        Self {
            variant: Variant::I,
            position_radius: 0.0,
            fire_radius: 0.0,
        }
    }

    pub fn env_ii(r: f64) -> Self {
        Self {
            variant: Variant::II,
            position_radius: r,
            fire_radius: 0.0,
        }
    }

    pub fn env_iii(r: f64) -> Self {
        Self {
            variant: Variant::III,
            position_radius: 0.0,
            fire_radius: r,
        }
    }

    pub fn env_iv(r: f64) -> Self {
        Self {
            variant: Variant::IV,
            position_radius: r,
            fire_radius: r,
        }
    }

    /// Builds a spec from a variant and a single radius, zeroing the radii
    /// the variant keeps fixed.
    pub fn from_variant(variant: Variant, r: f64) -> Self {
        match variant {
            Variant::I => Self::env_i(),
            Variant::II => Self::env_ii(r),
            Variant::III => Self::env_iii(r),
            Variant::IV => Self::env_iv(r),
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let ok_radius = |r: f64| r.is_finite() && r >= 0.0;
        if !ok_radius(self.position_radius) || !ok_radius(self.fire_radius) {
            return Err(EnvError::Config("variant radii must be finite and non-negative".into()));
        }
        let consistent = match self.variant {
            Variant::I => self.position_radius == 0.0 && self.fire_radius == 0.0,
            Variant::II => self.fire_radius == 0.0,
            Variant::III => self.position_radius == 0.0,
            Variant::IV => true,
        };
        if !consistent {
            return Err(EnvError::Config(format!(
                "Env-{} does not allow radii ({}, {})",
                self.variant, self.position_radius, self.fire_radius
            )));
        }
        Ok(())
    }
}

/// A concrete episode layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub start: Cell,
    pub goal: Cell,
    pub fire_origins: Vec<Cell>,
}

/// In-bounds cells within Euclidean `radius` of `center`, row-major.
pub fn cells_within(map: &GridMap, center: Cell, radius: f64, filter: impl Fn(Cell) -> bool) -> Vec<Cell> {
    let reach = radius.floor() as i32;
    let mut out = Vec::new();
    for y in (center.y - reach)..=(center.y + reach) {
        for x in (center.x - reach)..=(center.x + reach) {
            let c = Cell::new(x, y);
            if map.in_bounds(c) && center.distance(c) <= radius + 1e-9 && filter(c) {
                out.push(c);
            }
        }
    }
    out
}

const MAX_ATTEMPTS: usize = 200;

/// Draws the episode layout around `base` per the variant.
pub fn sample_scenario<R: Rng + ?Sized>(
    map: &GridMap,
    base: &Scenario,
    spec: &VariantSpec,
    rng: &mut R,
) -> Result<Scenario, EnvError> {
    let mut out = base.clone();
    if spec.position_radius > 0.0 {
        let accessible = |c| map.accessible(AgentKind::Evacuee, c);
        let starts = cells_within(map, base.start, spec.position_radius, accessible);
        let goals = cells_within(map, base.goal, spec.position_radius, accessible);
        if starts.is_empty() || goals.is_empty() {
            return Err(EnvError::Config(format!(
                "no evacuee-accessible cell within r={} of the base pair",
                spec.position_radius
            )));
        }
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let s = starts[rng.random_range(0..starts.len())];
            let g = goals[rng.random_range(0..goals.len())];
            if s != g && astar_path(map, AgentKind::Evacuee, s, g).is_some() {
                found = Some((s, g));
                break;
            }
        }
        let (s, g) = found.ok_or_else(|| {
            EnvError::Config(format!(
                "no connected start-goal pair within r={}",
                spec.position_radius
            ))
        })?;
        out.start = s;
        out.goal = g;
    }
    if spec.fire_radius > 0.0 {
        let mut origins = Vec::with_capacity(base.fire_origins.len());
        for &origin in &base.fire_origins {
            let candidates = cells_within(map, origin, spec.fire_radius, |c| c != out.start && c != out.goal);
            if candidates.is_empty() {
                return Err(EnvError::Config(format!(
                    "no fire origin candidate within r={} of {origin}",
                    spec.fire_radius
                )));
            }
            origins.push(candidates[rng.random_range(0..candidates.len())]);
        }
        out.fire_origins = origins;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{load_map, DEFAULT_MAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base(map: &GridMap) -> Scenario {
        let (start, goal) = map.start_goal_pairs()[0];
        Scenario {
            start,
            goal,
            fire_origins: vec![map.fire_origins()[0]],
        }
    }

    #[test]
    fn env_i_is_identity() {
        let map = load_map(DEFAULT_MAP).unwrap();
        let b = base(&map);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(sample_scenario(&map, &b, &VariantSpec::env_i(), &mut rng).unwrap(), b);
        }
    }

    #[test]
    fn env_iv_stays_within_radius() {
        let map = load_map(DEFAULT_MAP).unwrap();
        let b = base(&map);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = VariantSpec::env_iv(5.0);
        for _ in 0..1000 {
            let s = sample_scenario(&map, &b, &spec, &mut rng).unwrap();
            assert!(s.start.distance(b.start) <= 5.0);
            assert!(s.goal.distance(b.goal) <= 5.0);
            assert!(s.fire_origins[0].distance(b.fire_origins[0]) <= 5.0);
            assert!(map.accessible(AgentKind::Evacuee, s.start));
            assert_ne!(s.start, s.goal);
        }
    }

    #[test]
    fn variant_radius_rules() {
        assert!(VariantSpec::env_ii(5.0).validate().is_ok());
        let bad = VariantSpec {
            variant: Variant::I,
            position_radius: 2.0,
            fire_radius: 0.0,
        };
        assert!(bad.validate().is_err());
        assert!(VariantSpec::env_iv(-1.0).validate().is_err());
        assert_eq!("Env-III".parse::<Variant>(), Ok(Variant::III));
        assert_eq!("iv".parse::<Variant>(), Ok(Variant::IV));
    }
}
