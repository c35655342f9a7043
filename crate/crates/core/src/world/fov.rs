use super::{wrap_angle, AgentKind, AgentPose, Cell, GridMap};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovParams {
    /// Euclidean radius in cells.
    pub range: f64,
    /// Cone half-width around the heading. Ignored for the high-level rescuer.
    pub half_angle: f64,
}

/// Per-kind view geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovTable {
    pub hlr: FovParams,
    pub llr: FovParams,
    pub evacuee: FovParams,
}

impl Default for FovTable {
    fn default() -> Self {
        Self {
            hlr: FovParams {
                range: 8.0,
                half_angle: PI,
            },
            llr: FovParams {
                range: 4.0,
                half_angle: PI / 3.0,
            },
            evacuee: FovParams {
                range: 3.0,
                half_angle: PI / 2.0,
            },
        }
    }
}

impl FovTable {
    pub fn for_kind(&self, kind: AgentKind) -> FovParams {
        match kind {
            AgentKind::Hlr => self.hlr,
            AgentKind::Llr => self.llr,
            AgentKind::Evacuee => self.evacuee,
        }
    }
}

/// Cells visible to an agent, in row-major order.
///
/// The high-level rescuer looks straight down: every in-range cell it can see
/// into is visible, no heading and no occlusion. The other kinds see a cone
/// around their heading, and a cell is visible only if it and every cell
/// strictly between it and the agent on the Bresenham ray are viewable for
/// that kind. The agent's own cell is always visible.
pub fn compute_fov(map: &GridMap, pose: &AgentPose, params: &FovParams) -> Vec<Cell> {
    let origin = pose.position;
    let reach = params.range.max(0.0).floor() as i32;
    let mut visible = Vec::new();
    for y in (origin.y - reach)..=(origin.y + reach) {
        for x in (origin.x - reach)..=(origin.x + reach) {
            let cell = Cell::new(x, y);
            if !map.in_bounds(cell) {
                continue;
            }
            if cell == origin {
                visible.push(cell);
                continue;
            }
            if origin.distance(cell) > params.range + EPS {
                continue;
            }
            if !map.viewable(pose.kind, cell) {
                continue;
            }
            if pose.kind == AgentKind::Hlr {
                visible.push(cell);
                continue;
            }
            let bearing = f64::from(y - origin.y).atan2(f64::from(x - origin.x));
            if wrap_angle(bearing - pose.heading).abs() > params.half_angle + EPS {
                continue;
            }
            let line = bresenham_line(origin, cell);
            let clear = line[1..line.len() - 1].iter().all(|&c| map.viewable(pose.kind, c));
            if clear {
                visible.push(cell);
            }
        }
    }
    visible
}

/// Integer line from `from` to `to`, both endpoints included.
pub fn bresenham_line(from: Cell, to: Cell) -> Vec<Cell> {
    let dx = (to.x - from.x).abs();
    let dy = -(to.y - from.y).abs();
    let sx = if from.x < to.x { 1 } else { -1 };
    let sy = if from.y < to.y { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (from.x, from.y);
    let mut out = Vec::with_capacity((dx - dy + 1) as usize);
    loop {
        out.push(Cell::new(x, y));
        if x == to.x && y == to.y {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{load_map, CellKind};

    fn pose(kind: AgentKind, x: i32, y: i32, heading: f64) -> AgentPose {
        AgentPose::new(kind, Cell::new(x, y), heading, 1)
    }

    #[test]
    fn llr_cone_on_empty_map() {
        let map = GridMap::open(6, 6, Cell::new(5, 5));
        let params = FovParams {
            range: 3.0,
            half_angle: PI / 4.0,
        };
        let fov = compute_fov(&map, &pose(AgentKind::Llr, 0, 0, 0.0), &params);
        assert!(fov.contains(&Cell::new(0, 0)));
        assert!(fov.contains(&Cell::new(3, 0)));
        assert!(fov.contains(&Cell::new(2, 2)));
        assert!(!fov.contains(&Cell::new(0, 3)));
        assert!(!fov.contains(&Cell::new(1, 2)));
        // Frozen from the brute-force bearing/ray oracle in tests/world_props.rs.
        let expected: Vec<Cell> = [(0, 0), (1, 0), (2, 0), (3, 0), (1, 1), (2, 1), (2, 2)]
            .into_iter()
            .map(Cell::from)
            .collect();
        let mut got = fov.clone();
        got.sort();
        let mut want = expected;
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn canopy_hides_everything_from_hlr() {
        let mut map = GridMap::open(5, 5, Cell::new(0, 0));
        for c in map.cells().collect::<Vec<_>>() {
            map.set_kind(c, CellKind::TypeII);
        }
        let fov = compute_fov(
            &map,
            &pose(AgentKind::Hlr, 2, 2, 0.0),
            &FovParams {
                range: 2.0,
                half_angle: PI,
            },
        );
        assert_eq!(fov, vec![Cell::new(2, 2)]);
    }

    #[test]
    fn wall_occludes_cells_behind_it() {
        let map = load_map("S......\n...1...\n.......\n").unwrap();
        let fov = compute_fov(
            &map,
            &pose(AgentKind::Evacuee, 1, 1, 0.0),
            &FovParams {
                range: 3.0,
                half_angle: PI / 2.0,
            },
        );
        assert!(fov.contains(&Cell::new(2, 1)));
        assert!(!fov.contains(&Cell::new(3, 1)), "the wall itself is excluded");
        assert!(!fov.contains(&Cell::new(4, 1)), "cells behind the wall are hidden");
    }

    #[test]
    fn bresenham_endpoints_and_adjacency() {
        for &(a, b) in &[((0, 0), (5, 2)), ((3, 4), (-2, 1)), ((0, 0), (0, -4)), ((1, 1), (1, 1))] {
            let line = bresenham_line(Cell::from(a), Cell::from(b));
            assert_eq!(line[0], Cell::from(a));
            assert_eq!(*line.last().unwrap(), Cell::from(b));
            for w in line.windows(2) {
                assert!((w[0].x - w[1].x).abs() <= 1 && (w[0].y - w[1].y).abs() <= 1);
            }
        }
    }
}
