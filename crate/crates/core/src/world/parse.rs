use super::{AgentKind, Cell, CellKind, GridMap};
use std::collections::VecDeque;

/// 20x20 base scenario: four symmetric fire origins, 40 perimeter start-goal pairs.
pub const DEFAULT_MAP: &str = include_str!("../../data/default_20x20.map");
/// 10x10 single-scenario map used for desk-scale training.
pub const SMALL_MAP: &str = include_str!("../../data/small_10x10.map");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("map document contains no grid rows")]
    Empty,
    #[error("row {row}, column {col}: unexpected character {ch:?}")]
    BadChar { row: usize, col: usize, ch: char },
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("map has no safe zone ('S')")]
    MissingSafeZone,
    #[error("row {row}, column {col}: second safe zone ('S')")]
    DuplicateSafeZone { row: usize, col: usize },
    #[error("line {line}: malformed pair entry {text:?}")]
    BadPair { line: usize, text: String },
    #[error("line {line}: grid row after metadata section")]
    RowAfterMetadata { line: usize },
    #[error("coordinate {cell} (row {}, column {}) is outside the grid", cell.y, cell.x)]
    OutOfBounds { cell: Cell },
    #[error("coordinate {cell} (row {}, column {}) is not evacuee-accessible", cell.y, cell.x)]
    Inaccessible { cell: Cell },
    #[error("unreachable goal: no evacuee path from {start} to {goal} (goal at row {}, column {})", goal.y, goal.x)]
    Unreachable { start: Cell, goal: Cell },
}

/// Parses the character-grid map document.
///
/// Grid characters: `.` open, `1`-`4` obstacle types I-IV, `S` safe zone,
/// `F` fire origin, `E` start/goal endpoint marker (all three are open cells).
/// After the grid, `pair: (x1,y1)->(x2,y2)` lines list start-goal pairs.
/// Blank lines and lines starting with `#` are ignored.
pub fn load_map(text: &str) -> Result<GridMap, MapError> {
    let mut rows: Vec<Vec<CellKind>> = Vec::new();
    let mut safe_zone = None;
    let mut fire_origins = Vec::new();
    let mut pairs = Vec::new();
    let mut in_metadata = false;

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        if let Some(rest) = line.trim_start().strip_prefix("pair:") {
            in_metadata = true;
            let pair = parse_pair(rest).ok_or_else(|| MapError::BadPair {
                line: line_no + 1,
                text: line.to_string(),
            })?;
            pairs.push(pair);
            continue;
        }
        if in_metadata {
            return Err(MapError::RowAfterMetadata { line: line_no + 1 });
        }
        let row = rows.len();
        let mut cells = Vec::with_capacity(line.len());
        for (col, ch) in line.chars().enumerate() {
            let kind = match ch {
                '.' | 'E' => CellKind::Open,
                '1' => CellKind::TypeI,
                '2' => CellKind::TypeII,
                '3' => CellKind::TypeIII,
                '4' => CellKind::TypeIV,
                'S' => {
                    if safe_zone.is_some() {
                        return Err(MapError::DuplicateSafeZone { row, col });
                    }
                    safe_zone = Some(Cell::new(col as i32, row as i32));
                    CellKind::Open
                }
                'F' => {
                    fire_origins.push(Cell::new(col as i32, row as i32));
                    CellKind::Open
                }
                ch => return Err(MapError::BadChar { row, col, ch }),
            };
            cells.push(kind);
        }
        if let Some(first) = rows.first() {
            if first.len() != cells.len() {
                return Err(MapError::Ragged {
                    row,
                    expected: first.len(),
                    found: cells.len(),
                });
            }
        }
        rows.push(cells);
    }

    if rows.is_empty() || rows[0].is_empty() {
        return Err(MapError::Empty);
    }
    let safe_zone = safe_zone.ok_or(MapError::MissingSafeZone)?;
    let width = rows[0].len() as i32;
    let height = rows.len() as i32;
    let map = GridMap::from_parts(
        width,
        height,
        rows.into_iter().flatten().collect(),
        safe_zone,
        fire_origins,
        pairs,
    );
    check_invariants(&map)?;
    Ok(map)
}

fn parse_pair(text: &str) -> Option<(Cell, Cell)> {
    let (a, b) = text.split_once("->")?;
    Some((parse_cell(a)?, parse_cell(b)?))
}

fn parse_cell(text: &str) -> Option<Cell> {
    let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    Some(Cell::new(x.trim().parse().ok()?, y.trim().parse().ok()?))
}

pub(super) fn check_invariants(map: &GridMap) -> Result<(), MapError> {
    let listed = std::iter::once(map.safe_zone())
        .chain(map.fire_origins().iter().copied())
        .chain(map.start_goal_pairs().iter().flat_map(|&(s, g)| [s, g]));
    for cell in listed {
        if !map.in_bounds(cell) {
            return Err(MapError::OutOfBounds { cell });
        }
    }
    if !map.accessible(AgentKind::Evacuee, map.safe_zone()) {
        return Err(MapError::Inaccessible { cell: map.safe_zone() });
    }
    for &(start, goal) in map.start_goal_pairs() {
        for cell in [start, goal] {
            if !map.accessible(AgentKind::Evacuee, cell) {
                return Err(MapError::Inaccessible { cell });
            }
        }
        if !flood_fill(map, AgentKind::Evacuee, start)[map.index(goal)] {
            return Err(MapError::Unreachable { start, goal });
        }
    }
    Ok(())
}

/// Cells reachable from `from` through cells accessible to `kind`.
pub(crate) fn flood_fill(map: &GridMap, kind: AgentKind, from: Cell) -> Vec<bool> {
    let mut seen = vec![false; map.len()];
    if !map.accessible(kind, from) {
        return seen;
    }
    let mut queue = VecDeque::from([from]);
    seen[map.index(from)] = true;
    while let Some(cell) = queue.pop_front() {
        for next in map.neighbors_unchecked(cell) {
            let idx = map.index(next);
            if !seen[idx] && map.accessible(kind, next) {
                seen[idx] = true;
                queue.push_back(next);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_open_map() {
        let map = load_map("...\n...\n..S\n").unwrap();
        assert_eq!(map.width(), 3);
        assert_eq!(map.height(), 3);
        assert_eq!(map.safe_zone(), Cell::new(2, 2));
        assert!(map.cells().all(|c| map.kind(c) == Some(CellKind::Open)));
    }

    #[test]
    fn obstacle_characters_map_to_kinds() {
        let map = load_map("1234\n..S.\n").unwrap();
        assert_eq!(map.kind(Cell::new(0, 0)), Some(CellKind::TypeI));
        assert_eq!(map.kind(Cell::new(1, 0)), Some(CellKind::TypeII));
        assert_eq!(map.kind(Cell::new(2, 0)), Some(CellKind::TypeIII));
        assert_eq!(map.kind(Cell::new(3, 0)), Some(CellKind::TypeIV));
    }

    #[test]
    fn fire_origins_and_pairs() {
        let doc = "F..E\n.S..\nE..F\npair: (3,0)->(0,2)\n";
        let map = load_map(doc).unwrap();
        assert_eq!(map.fire_origins(), &[Cell::new(0, 0), Cell::new(3, 2)]);
        assert_eq!(map.start_goal_pairs(), &[(Cell::new(3, 0), Cell::new(0, 2))]);
        assert_eq!(
            load_map(&map.to_document()).unwrap().start_goal_pairs(),
            map.start_goal_pairs()
        );
    }

    #[test]
    fn wall_separated_pair_is_unreachable() {
        let doc = "E.1..\n..1.E\n..1S.\npair: (0,0)->(4,1)\n";
        let err = load_map(doc).unwrap_err();
        assert!(matches!(err, MapError::Unreachable { .. }));
        assert!(err.to_string().contains("unreachable goal"));
        // oracle: the wall column blocks every left-to-right crossing
        let map = GridMap::from_parts(
            5,
            3,
            "E.1....1.E..1S."
                .chars()
                .map(|c| if c == '1' { CellKind::TypeI } else { CellKind::Open })
                .collect(),
            Cell::new(3, 2),
            vec![],
            vec![],
        );
        let reach = flood_fill(&map, AgentKind::Evacuee, Cell::new(0, 0));
        assert!(!reach[map.index(Cell::new(4, 1))]);
    }

    #[test]
    fn parse_errors_name_location() {
        match load_map("..x\n.S.\n") {
            Err(MapError::BadChar {
                row: 0,
                col: 2,
                ch: 'x',
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match load_map("...\n.S\n") {
            Err(MapError::Ragged {
                row: 1,
                expected: 3,
                found: 2,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(load_map("...\n...\n"), Err(MapError::MissingSafeZone));
        assert!(matches!(
            load_map("S.\n..\npair: (0,0)->(5,5)\n"),
            Err(MapError::OutOfBounds { .. })
        ));
        assert!(matches!(
            load_map("S1\n..\npair: (0,0)->(1,0)\n"),
            Err(MapError::Inaccessible { .. })
        ));
        assert!(matches!(
            load_map("S.\npair: 0,0 -> 1,0\n"),
            Err(MapError::BadPair { line: 2, .. })
        ));
        assert_eq!(load_map(""), Err(MapError::Empty));
    }

    #[test]
    fn builtin_maps_load() {
        let map = load_map(DEFAULT_MAP).unwrap();
        assert_eq!((map.width(), map.height()), (20, 20));
        assert_eq!(map.fire_origins().len(), 4);
        assert_eq!(map.start_goal_pairs().len(), 40);
        let small = load_map(SMALL_MAP).unwrap();
        assert_eq!((small.width(), small.height()), (10, 10));
        assert!(!small.start_goal_pairs().is_empty());
    }
}
