//! Static environment: the cell grid, per-agent obstacle semantics, fields of
//! view and shortest paths.

mod astar;
mod fov;
mod parse;

pub use astar::{astar_path, astar_path_avoiding, bfs_distance};
pub use fov::{bresenham_line, compute_fov, FovParams, FovTable};
pub use parse::{load_map, MapError, DEFAULT_MAP, SMALL_MAP};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Grid coordinate. `x` is the column, `y` the row; `y` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn distance(self, other: Cell) -> f64 {
        f64::from(self.x - other.x).hypot(f64::from(self.y - other.y))
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl From<(i32, i32)> for Cell {
    fn from((x, y): (i32, i32)) -> Self {
        Self::new(x, y)
    }
}

/// Neighbor offsets in the fixed N, E, S, W order.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Open,
    TypeI,
    TypeII,
    TypeIII,
    TypeIV,
}

impl CellKind {
    pub const ALL: [CellKind; 5] = [
        CellKind::Open,
        CellKind::TypeI,
        CellKind::TypeII,
        CellKind::TypeIII,
        CellKind::TypeIV,
    ];

    pub fn symbol(self) -> char {
        match self {
            CellKind::Open => '.',
            CellKind::TypeI => '1',
            CellKind::TypeII => '2',
            CellKind::TypeIII => '3',
            CellKind::TypeIV => '4',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentKind {
    /// High-level rescuer: flies above every structure, downward camera.
    Hlr,
    /// Low-level rescuer: obstacle constrained, forward camera, the only capturer.
    Llr,
    Evacuee,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Hlr, AgentKind::Llr, AgentKind::Evacuee];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Semantics {
    pub accessible: bool,
    pub viewable: bool,
}

/// Accessibility and viewability of a cell kind for an agent kind.
///
/// Type III viewability for the high-level rescuer is not pinned down by the
/// obstacle taxonomy; open-top alleys are treated as visible from altitude.
pub fn semantics(agent: AgentKind, cell: CellKind) -> Semantics {
    use AgentKind::*;
    use CellKind::*;
    let (accessible, viewable) = match (agent, cell) {
        (_, Open) => (true, true),
        (Hlr, TypeI) => (true, false),
        (_, TypeI) => (false, false),
        (Hlr, TypeII) => (true, false),
        (_, TypeII) => (true, true),
        (Hlr, TypeIII) => (true, true),
        (Llr, TypeIII) => (false, true),
        (Evacuee, TypeIII) => (true, true),
        (Hlr, TypeIV) => (true, false),
        (Llr, TypeIV) => (false, false),
        (Evacuee, TypeIV) => (true, true),
    };
    Semantics { accessible, viewable }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub kind: AgentKind,
    pub position: Cell,
    /// Radians in [-pi, pi], measured from +x toward +y.
    pub heading: f64,
    /// Cells per step along a path.
    pub max_speed: u32,
}

impl AgentPose {
    pub fn new(kind: AgentKind, position: Cell, heading: f64, max_speed: u32) -> Self {
        Self {
            kind,
            position,
            heading: wrap_angle(heading),
            max_speed,
        }
    }
}

/// Wraps an angle into [-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::PI;
    if (-PI..=PI).contains(&angle) {
        return angle;
    }
    let wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped == -PI && angle > 0.0 {
        PI
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: i32,
    height: i32,
    cells: Vec<CellKind>,
    safe_zone: Cell,
    fire_origins: Vec<Cell>,
    start_goal_pairs: Vec<(Cell, Cell)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cell {0} lies outside the grid")]
pub struct OutOfBounds(pub Cell);

impl GridMap {
    /// Builds a map without checking the scenario invariants. Prefer
    /// [`load_map`] or [`GridMap::validated`] for user input.
    pub fn from_parts(
        width: i32,
        height: i32,
        cells: Vec<CellKind>,
        safe_zone: Cell,
        fire_origins: Vec<Cell>,
        start_goal_pairs: Vec<(Cell, Cell)>,
    ) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        assert_eq!(cells.len(), (width * height) as usize, "cell count mismatch");
        Self {
            width,
            height,
            cells,
            safe_zone,
            fire_origins,
            start_goal_pairs,
        }
    }

    /// Builds a map and checks every invariant that [`load_map`] enforces.
    pub fn validated(
        width: i32,
        height: i32,
        cells: Vec<CellKind>,
        safe_zone: Cell,
        fire_origins: Vec<Cell>,
        start_goal_pairs: Vec<(Cell, Cell)>,
    ) -> Result<Self, MapError> {
        if width <= 0 || height <= 0 || cells.len() != (width * height) as usize {
            return Err(MapError::Empty);
        }
        let map = Self::from_parts(width, height, cells, safe_zone, fire_origins, start_goal_pairs);
        parse::check_invariants(&map)?;
        Ok(map)
    }

    /// An all-open map, handy for tests and examples.
    pub fn open(width: i32, height: i32, safe_zone: Cell) -> Self {
        Self::from_parts(
            width,
            height,
            vec![CellKind::Open; (width * height) as usize],
            safe_zone,
            Vec::new(),
            Vec::new(),
        )
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn safe_zone(&self) -> Cell {
        self.safe_zone
    }

    pub fn fire_origins(&self) -> &[Cell] {
        &self.fire_origins
    }

    pub fn start_goal_pairs(&self) -> &[(Cell, Cell)] {
        &self.start_goal_pairs
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Euclidean length of the grid diagonal, measured between corner cell centers.
    pub fn diagonal(&self) -> f64 {
        f64::from(self.width - 1).hypot(f64::from(self.height - 1))
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x >= 0 && cell.y >= 0 && cell.x < self.width && cell.y < self.height
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, cell: Cell) -> usize {
        debug_assert!(self.in_bounds(cell));
        (cell.y * self.width + cell.x) as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index as i32 % self.width, index as i32 / self.width)
    }

    pub fn kind(&self, cell: Cell) -> Option<CellKind> {
        self.in_bounds(cell).then(|| self.cells[self.index(cell)])
    }

    pub fn set_kind(&mut self, cell: Cell, kind: CellKind) {
        let idx = self.index(cell);
        self.cells[idx] = kind;
    }

    pub fn accessible(&self, agent: AgentKind, cell: Cell) -> bool {
        self.kind(cell).is_some_and(|kind| semantics(agent, kind).accessible)
    }

    pub fn viewable(&self, agent: AgentKind, cell: Cell) -> bool {
        self.kind(cell).is_some_and(|kind| semantics(agent, kind).viewable)
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    /// The in-bounds 4-connected neighbors of `cell` in N, E, S, W order.
    pub fn neighbors(&self, cell: Cell) -> Result<Vec<Cell>, OutOfBounds> {
        if !self.in_bounds(cell) {
            return Err(OutOfBounds(cell));
        }
        Ok(self.neighbors_unchecked(cell).collect())
    }

    pub(crate) fn neighbors_unchecked(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        NEIGHBOR_OFFSETS
            .iter()
            .map(move |&(dx, dy)| cell.offset(dx, dy))
            .filter(move |c| self.in_bounds(*c))
    }

    /// Renders the grid back into the character format (without metadata).
    pub fn render_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| {
                        let cell = Cell::new(x, y);
                        if cell == self.safe_zone {
                            'S'
                        } else if self.fire_origins.contains(&cell) {
                            'F'
                        } else {
                            self.cells[self.index(cell)].symbol()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Serializes the map into the text document format accepted by [`load_map`].
    pub fn to_document(&self) -> String {
        let mut out = self.render_rows().join("\n");
        out.push('\n');
        for (start, goal) in &self.start_goal_pairs {
            out.push_str(&format!("pair: {start}->{goal}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn neighbors_interior_in_fixed_order() {
        let map = GridMap::open(10, 10, Cell::new(0, 0));
        let got = map.neighbors(Cell::new(5, 5)).unwrap();
        assert_eq!(
            got,
            vec![Cell::new(5, 4), Cell::new(6, 5), Cell::new(5, 6), Cell::new(4, 5)]
        );
    }

    #[test]
    fn neighbors_clip_at_boundary() {
        let map = GridMap::open(10, 10, Cell::new(0, 0));
        assert_eq!(map.neighbors(Cell::new(0, 0)).unwrap().len(), 2);
        assert_eq!(map.neighbors(Cell::new(0, 3)).unwrap().len(), 3);
        assert_eq!(map.neighbors(Cell::new(10, 3)), Err(OutOfBounds(Cell::new(10, 3))));
    }

    #[test]
    fn semantics_table_is_total_and_matches_taxonomy() {
        for agent in AgentKind::ALL {
            for cell in CellKind::ALL {
                let s = semantics(agent, cell);
                if agent == AgentKind::Hlr {
                    assert!(s.accessible);
                }
                if cell == CellKind::Open {
                    assert!(s.accessible && s.viewable);
                }
                if cell == CellKind::TypeI {
                    assert!(!s.viewable);
                }
            }
        }
        let llr = |c| semantics(AgentKind::Llr, c);
        let evac = |c| semantics(AgentKind::Evacuee, c);
        let hlr = |c| semantics(AgentKind::Hlr, c);
        assert!(!llr(CellKind::TypeI).accessible && !evac(CellKind::TypeI).accessible);
        assert!(!hlr(CellKind::TypeII).viewable);
        assert!(llr(CellKind::TypeII).accessible && llr(CellKind::TypeII).viewable);
        assert!(evac(CellKind::TypeII).accessible && evac(CellKind::TypeII).viewable);
        assert!(!llr(CellKind::TypeIII).accessible && llr(CellKind::TypeIII).viewable);
        assert!(evac(CellKind::TypeIII).accessible && evac(CellKind::TypeIII).viewable);
        assert!(evac(CellKind::TypeIV).accessible && evac(CellKind::TypeIV).viewable);
        assert!(!llr(CellKind::TypeIV).viewable && !hlr(CellKind::TypeIV).viewable);
        assert!(!llr(CellKind::TypeIV).accessible);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.5), 0.5);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(PI), PI);
        for k in -20..20 {
            let a = wrap_angle(f64::from(k) * 0.77);
            assert!((-PI..=PI).contains(&a));
        }
    }
}
