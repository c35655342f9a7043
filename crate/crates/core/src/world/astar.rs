use super::{AgentKind, Cell, GridMap};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

/// Shortest 4-connected path over cells accessible to `kind`, both endpoints
/// included. `None` when `to` is inaccessible or unreachable.
pub fn astar_path(map: &GridMap, kind: AgentKind, from: Cell, to: Cell) -> Option<Vec<Cell>> {
    astar_path_avoiding(map, kind, from, to, |_| false)
}

/// [`astar_path`] with an extra set of blocked cells. `from` itself is never
/// treated as blocked.
///
/// Frontier ties on `f = g + h` are served first-in first-out, so among equal
/// cost paths the one discovered first through the N, E, S, W expansion order
/// wins.
pub fn astar_path_avoiding(
    map: &GridMap,
    kind: AgentKind,
    from: Cell,
    to: Cell,
    blocked: impl Fn(Cell) -> bool,
) -> Option<Vec<Cell>> {
    if !map.in_bounds(from) || !map.accessible(kind, to) || blocked(to) {
        return None;
    }
    if from == to {
        return Some(vec![from]);
    }
    let n = map.len();
    let mut g = vec![u32::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    let start = map.index(from);
    let goal = map.index(to);
    g[start] = 0;
    heap.push(Reverse((from.manhattan(to), seq, start)));

    while let Some(Reverse((_, _, idx))) = heap.pop() {
        if closed[idx] {
            continue;
        }
        if idx == goal {
            let mut path = vec![to];
            let mut cur = idx;
            while cur != start {
                cur = parent[cur];
                path.push(map.cell_at(cur));
            }
            path.reverse();
            return Some(path);
        }
        closed[idx] = true;
        let cell = map.cell_at(idx);
        for next in map.neighbors_unchecked(cell) {
            if !map.accessible(kind, next) || blocked(next) {
                continue;
            }
            let nidx = map.index(next);
            let cost = g[idx] + 1;
            if cost < g[nidx] {
                g[nidx] = cost;
                parent[nidx] = idx;
                seq += 1;
                heap.push(Reverse((cost + next.manhattan(to), seq, nidx)));
            }
        }
    }
    None
}

/// Breadth-first distances from `from` over cells accessible to `kind`.
/// Unreachable cells hold `u32::MAX`.
pub fn bfs_distance(map: &GridMap, kind: AgentKind, from: Cell) -> Vec<u32> {
    let mut dist = vec![u32::MAX; map.len()];
    if !map.in_bounds(from) {
        return dist;
    }
    dist[map.index(from)] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(cell) = queue.pop_front() {
        let d = dist[map.index(cell)];
        for next in map.neighbors_unchecked(cell) {
            let idx = map.index(next);
            if dist[idx] == u32::MAX && map.accessible(kind, next) {
                dist[idx] = d + 1;
                queue.push_back(next);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{load_map, CellKind};

    #[test]
    fn straight_line_on_empty_map() {
        let map = GridMap::open(5, 5, Cell::new(4, 4));
        let path = astar_path(&map, AgentKind::Llr, Cell::new(0, 0), Cell::new(3, 0)).unwrap();
        assert_eq!(path.len(), 4);
        assert_eq!(path.first(), Some(&Cell::new(0, 0)));
        assert_eq!(path.last(), Some(&Cell::new(3, 0)));
    }

    #[test]
    fn sealed_goal_is_absent_for_llr_but_not_hlr() {
        let map = load_map(".....\n.111.\n.1.1.\n.111.\nS....\n").unwrap();
        let goal = Cell::new(2, 2);
        assert!(astar_path(&map, AgentKind::Llr, Cell::new(0, 0), goal).is_none());
        assert!(astar_path(&map, AgentKind::Evacuee, Cell::new(0, 0), goal).is_none());
        let hlr = astar_path(&map, AgentKind::Hlr, Cell::new(0, 0), goal).unwrap();
        assert_eq!(hlr.len(), 5);
    }

    #[test]
    fn inaccessible_target_is_absent() {
        let mut map = GridMap::open(4, 4, Cell::new(0, 0));
        map.set_kind(Cell::new(2, 2), CellKind::TypeIII);
        assert!(astar_path(&map, AgentKind::Llr, Cell::new(0, 0), Cell::new(2, 2)).is_none());
        assert!(astar_path(&map, AgentKind::Evacuee, Cell::new(0, 0), Cell::new(2, 2)).is_some());
    }

    #[test]
    fn path_is_contiguous_and_deterministic() {
        let map = load_map(crate::world::DEFAULT_MAP).unwrap();
        let (s, g) = map.start_goal_pairs()[0];
        let a = astar_path(&map, AgentKind::Evacuee, s, g).unwrap();
        let b = astar_path(&map, AgentKind::Evacuee, s, g).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert_eq!(w[0].manhattan(w[1]), 1);
            assert!(map.accessible(AgentKind::Evacuee, w[1]));
        }
        let d = bfs_distance(&map, AgentKind::Evacuee, s)[map.index(g)];
        assert_eq!(a.len() as u32 - 1, d);
    }

    #[test]
    fn avoiding_blocked_cells_detours() {
        let map = GridMap::open(3, 3, Cell::new(0, 0));
        let blocked = Cell::new(1, 0);
        let path = astar_path_avoiding(&map, AgentKind::Evacuee, Cell::new(0, 0), Cell::new(2, 0), |c| {
            c == blocked
        })
        .unwrap();
        assert!(!path.contains(&blocked));
        assert_eq!(path.len(), 5);
    }
}
