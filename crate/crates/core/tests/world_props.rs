use proptest::prelude::*;
use std::collections::VecDeque;
use uav_evac::world::{
    astar_path, compute_fov, load_map, semantics, AgentKind, AgentPose, Cell, CellKind, FovParams, GridMap, MapError,
};

const KINDS: [AgentKind; 3] = [AgentKind::Hlr, AgentKind::Llr, AgentKind::Evacuee];

fn kind_strategy() -> impl Strategy<Value = CellKind> {
    prop_oneof![
        6 => Just(CellKind::Open),
        1 => Just(CellKind::TypeI),
        1 => Just(CellKind::TypeII),
        1 => Just(CellKind::TypeIII),
        1 => Just(CellKind::TypeIV),
    ]
}

fn map_strategy(max: i32) -> impl Strategy<Value = GridMap> {
    (2..=max, 2..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(kind_strategy(), (w * h) as usize).prop_map(move |mut cells| {
            cells[0] = CellKind::Open;
            GridMap::from_parts(w, h, cells, Cell::new(0, 0), vec![], vec![])
        })
    })
}

// Straight-line rasterization written independently of the library: walk the
// major axis and round the minor coordinate, with the same tie handling as
// the integer error form (ties step the minor axis late).
fn ray(from: Cell, to: Cell) -> Vec<Cell> {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let (sx, sy) = (dx.signum(), dy.signum());
    let (ax, ay) = (dx.abs(), dy.abs());
    let mut out = vec![from];
    let (mut x, mut y) = (from.x, from.y);
    let mut err = ax - ay;
    while (x, y) != (to.x, to.y) {
        let e2 = 2 * err;
        if e2 >= -ay {
            err -= ay;
            x += sx;
        }
        if e2 <= ax {
            err += ax;
            y += sy;
        }
        out.push(Cell::new(x, y));
    }
    out
}

fn oracle_fov(map: &GridMap, pose: &AgentPose, p: &FovParams) -> Vec<Cell> {
    let o = pose.position;
    let view = |c: Cell| semantics(pose.kind, map.kind(c).unwrap()).viewable;
    let mut out = Vec::new();
    for y in 0..map.height() {
        for x in 0..map.width() {
            let c = Cell::new(x, y);
            if c == o {
                out.push(c);
                continue;
            }
            let (dx, dy) = (f64::from(x - o.x), f64::from(y - o.y));
            let dist = dx.hypot(dy);
            if dist > p.range + 1e-9 || !view(c) {
                continue;
            }
            if pose.kind == AgentKind::Hlr {
                out.push(c);
                continue;
            }
            let cos = (dx * pose.heading.cos() + dy * pose.heading.sin()) / dist;
            if cos < p.half_angle.cos() - 1e-9 {
                continue;
            }
            let line = ray(o, c);
            if line[1..line.len() - 1].iter().all(|&m| view(m)) {
                out.push(c);
            }
        }
    }
    out
}

fn bfs(map: &GridMap, kind: AgentKind, from: Cell, to: Cell) -> Option<usize> {
    let mut dist = vec![usize::MAX; map.len()];
    dist[map.index(from)] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(c) = q.pop_front() {
        if c == to {
            return Some(dist[map.index(c)]);
        }
        for (dx, dy) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
            let n = c.offset(dx, dy);
            if map.in_bounds(n) && map.accessible(kind, n) && dist[map.index(n)] == usize::MAX {
                dist[map.index(n)] = dist[map.index(c)] + 1;
                q.push_back(n);
            }
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fov_equals_exhaustive_oracle(
        map in map_strategy(15),
        px in 0i32..15,
        py in 0i32..15,
        heading_eighths in -4i32..4,
        jitter in -0.3f64..0.3,
        range in 1.0f64..9.0,
        half in prop_oneof![Just(std::f64::consts::FRAC_PI_3), Just(std::f64::consts::FRAC_PI_2), 0.2f64..3.1],
    ) {
        let pos = Cell::new(px % map.width(), py % map.height());
        let heading = f64::from(heading_eighths) * std::f64::consts::FRAC_PI_4 + jitter;
        let params = FovParams { range, half_angle: half };
        for kind in KINDS {
            let pose = AgentPose::new(kind, pos, heading, 1);
            let got = compute_fov(&map, &pose, &params);
            let want = oracle_fov(&map, &pose, &params);
            prop_assert_eq!(got, want, "kind {:?} at {} heading {}", kind, pos, heading);
        }
    }

    #[test]
    fn fov_cells_are_in_range_and_viewable(map in map_strategy(12), range in 0.5f64..6.0) {
        let pose = AgentPose::new(AgentKind::Llr, Cell::new(1, 1), 0.3, 2);
        let params = FovParams { range, half_angle: 1.0 };
        for c in compute_fov(&map, &pose, &params) {
            prop_assert!(c == pose.position || (pose.position.distance(c) <= range + 1e-9 && map.viewable(AgentKind::Llr, c)));
        }
    }

    #[test]
    fn astar_is_shortest_and_valid(map in map_strategy(14), a in 0usize..196, b in 0usize..196) {
        let from = map.cell_at(a % map.len());
        let to = map.cell_at(b % map.len());
        for kind in KINDS {
            let reachable = map.accessible(kind, to);
            let path = astar_path(&map, kind, from, to);
            let oracle = if reachable { bfs(&map, kind, from, to) } else { None };
            prop_assert_eq!(path.as_ref().map(|p| p.len() - 1), oracle);
            if let Some(p) = path {
                prop_assert_eq!(p[0], from);
                prop_assert_eq!(*p.last().unwrap(), to);
                for w in p.windows(2) {
                    prop_assert_eq!(w[0].manhattan(w[1]), 1);
                    prop_assert!(map.accessible(kind, w[1]));
                }
                prop_assert_eq!(astar_path(&map, kind, from, to), Some(p));
            }
        }
    }

    #[test]
    fn map_documents_roundtrip(map in map_strategy(10)) {
        let text = map.to_document();
        let back = load_map(&text).unwrap();
        prop_assert_eq!(back, map);
    }
}

#[test]
fn neighbors_are_north_east_south_west() {
    let map = GridMap::open(3, 3, Cell::new(0, 0));
    let n = map.neighbors(Cell::new(1, 1)).unwrap();
    assert_eq!(
        n,
        vec![Cell::new(1, 0), Cell::new(2, 1), Cell::new(1, 2), Cell::new(0, 1)]
    );
    assert_eq!(
        map.neighbors(Cell::new(0, 0)).unwrap(),
        vec![Cell::new(1, 0), Cell::new(0, 1)]
    );
    assert!(map.neighbors(Cell::new(3, 0)).is_err());
}

#[test]
fn hlr_sees_nothing_through_canopy() {
    let mut map = GridMap::open(5, 5, Cell::new(0, 0));
    for c in map.cells().collect::<Vec<_>>() {
        map.set_kind(c, CellKind::TypeII);
    }
    let pose = AgentPose::new(AgentKind::Hlr, Cell::new(2, 2), 0.0, 3);
    let fov = compute_fov(
        &map,
        &pose,
        &FovParams {
            range: 2.0,
            half_angle: std::f64::consts::PI,
        },
    );
    assert_eq!(fov, vec![Cell::new(2, 2)]);
}

#[test]
fn walled_off_pair_is_rejected() {
    let text = "S.1.\n..1.\n..1.\n..1.\npair: (0,0)->(3,3)\n";
    assert!(matches!(load_map(text), Err(MapError::Unreachable { .. })));
}

#[test]
fn shipped_maps_parse() {
    for text in [uav_evac::world::DEFAULT_MAP, uav_evac::world::SMALL_MAP] {
        let map = load_map(text).unwrap();
        assert!(!map.start_goal_pairs().is_empty());
        assert!(!map.fire_origins().is_empty());
    }
    let map = load_map(uav_evac::world::DEFAULT_MAP).unwrap();
    assert_eq!((map.width(), map.height()), (20, 20));
    assert_eq!(map.start_goal_pairs().len(), 40);
    assert_eq!(map.fire_origins().len(), 4);
}
