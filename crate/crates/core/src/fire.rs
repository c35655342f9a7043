//! Stochastic fire spread on the 4-connected grid.
//!
//! Every burning neighbor of an unburnt cell gets one independent ignition
//! attempt per step, so a cell with `k` burning neighbors ignites with
//! probability `1 - (1 - p)^k`. Cells never stop burning. Obstacle type does
//! not affect spread.

use crate::world::{Cell, GridMap, OutOfBounds, NEIGHBOR_OFFSETS};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct FireState {
    width: i32,
    height: i32,
    burning: Vec<bool>,
    p_fire: f64,
    step_index: u32,
}

/// Probability that an unburnt cell with `burning_neighbors` burning
/// neighbors ignites this step.
pub fn ignition_probability(burning_neighbors: u32, p_fire: f64) -> f64 {
    1.0 - (1.0 - p_fire).powi(burning_neighbors as i32)
}

impl FireState {
    /// Initial fire at `origins`; duplicates collapse.
    pub fn seed(map: &GridMap, origins: &[Cell], p_fire: f64) -> Result<Self, OutOfBounds> {
        assert!((0.0..=1.0).contains(&p_fire), "p_fire must lie in [0, 1]");
        let mut burning = vec![false; map.len()];
        for &cell in origins {
            if !map.in_bounds(cell) {
                return Err(OutOfBounds(cell));
            }
            burning[map.index(cell)] = true;
        }
        Ok(Self {
            width: map.width(),
            height: map.height(),
            burning,
            p_fire,
            step_index: 0,
        })
    }

    pub fn p_fire(&self) -> f64 {
        self.p_fire
    }

    pub fn step_index(&self) -> u32 {
        self.step_index
    }

    pub fn is_burning(&self, cell: Cell) -> bool {
        cell.x >= 0
            && cell.y >= 0
            && cell.x < self.width
            && cell.y < self.height
            && self.burning[(cell.y * self.width + cell.x) as usize]
    }

    pub fn burning_count(&self) -> usize {
        self.burning.iter().filter(|&&b| b).count()
    }

    /// Burning cells in row-major order.
    pub fn burning_cells(&self) -> Vec<Cell> {
        self.burning
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Cell::new(i as i32 % self.width, i as i32 / self.width))
            .collect()
    }

    pub fn burning_mask(&self) -> &[bool] {
        &self.burning
    }

    /// Number of burning 4-neighbors of `cell`.
    pub fn burning_neighbors(&self, cell: Cell) -> u32 {
        NEIGHBOR_OFFSETS
            .iter()
            .filter(|&&(dx, dy)| self.is_burning(cell.offset(dx, dy)))
            .count() as u32
    }

    /// Advances one step. Unburnt cells are visited row-major; for each,
    /// one uniform draw is consumed per burning neighbor in N, E, S, W order.
    /// Returns the newly ignited cells in row-major order.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<Cell> {
        let mut ignited = Vec::new();
        if self.p_fire > 0.0 {
            for y in 0..self.height {
                for x in 0..self.width {
                    let cell = Cell::new(x, y);
                    if self.is_burning(cell) {
                        continue;
                    }
                    let mut lit = false;
                    for &(dx, dy) in &NEIGHBOR_OFFSETS {
                        if self.is_burning(cell.offset(dx, dy)) {
                            let draw: f64 = rng.random();
                            lit |= draw < self.p_fire;
                        }
                    }
                    if lit {
                        ignited.push(cell);
                    }
                }
            }
            for cell in &ignited {
                self.burning[(cell.y * self.width + cell.x) as usize] = true;
            }
        }
        self.step_index += 1;
        ignited
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open3() -> GridMap {
        GridMap::open(3, 3, Cell::new(0, 0))
    }

    #[test]
    fn seeding() {
        let map = open3();
        let f = FireState::seed(&map, &[Cell::new(2, 2)], 0.05).unwrap();
        assert_eq!(f.burning_cells(), vec![Cell::new(2, 2)]);
        assert_eq!(f.step_index(), 0);
        let dup = FireState::seed(&map, &[Cell::new(1, 1), Cell::new(1, 1)], 0.05).unwrap();
        assert_eq!(dup.burning_count(), 1);
        assert_eq!(
            FireState::seed(&map, &[Cell::new(3, 0)], 0.05),
            Err(OutOfBounds(Cell::new(3, 0)))
        );
    }

    #[test]
    fn empty_fire_never_spreads() {
        let map = open3();
        let mut f = FireState::seed(&map, &[], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert!(f.step(&mut rng).is_empty());
        }
        assert_eq!(f.burning_count(), 0);
        assert_eq!(f.step_index(), 10);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(ignition_probability(0, 0.05), 0.0);
        assert!((ignition_probability(1, 0.05) - 0.05).abs() < 1e-15);
        assert!((ignition_probability(2, 0.05) - 0.0975).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_only_advances_clock() {
        let map = open3();
        let mut f = FireState::seed(&map, &[Cell::new(1, 1)], 0.0).unwrap();
        let before = f.burning_cells();
        f.step(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(f.burning_cells(), before);
        assert_eq!(f.step_index(), 1);
    }

    #[test]
    fn certain_ignition_lights_all_neighbors() {
        let map = open3();
        let mut f = FireState::seed(&map, &[Cell::new(1, 1)], 1.0).unwrap();
        let lit = f.step(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(
            lit,
            vec![Cell::new(1, 0), Cell::new(0, 1), Cell::new(2, 1), Cell::new(1, 2)]
        );
        assert_eq!(f.burning_count(), 5);
    }

    #[test]
    fn two_neighbor_probability_matches_bernoulli_pair() {
        // independent route: two explicit Bernoulli(0.05) trials per round
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| rng.random::<f64>() < 0.05 || rng.random::<f64>() < 0.05)
            .count();
        let freq = hits as f64 / n as f64;
        let p = ignition_probability(2, 0.05);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * sigma, "freq {freq} vs {p}");
    }
}
