//! Per-agent obstacle semantics: fields of view and shortest paths drawn on
//! the default map.

use uav_evac::world::{astar_path, compute_fov, load_map, AgentKind, AgentPose, Cell, FovTable, DEFAULT_MAP};

fn main() -> anyhow::Result<()> {
    let map = load_map(DEFAULT_MAP)?;
    let fov = FovTable::default();
    let (start, goal) = map.start_goal_pairs()[0];

    for kind in [AgentKind::Hlr, AgentKind::Llr, AgentKind::Evacuee] {
        let pose = AgentPose::new(kind, Cell::new(9, 9), std::f64::consts::FRAC_PI_2, 1);
        let seen = compute_fov(&map, &pose, &fov.for_kind(kind));
        let mut rows: Vec<Vec<char>> = map.render_rows().iter().map(|r| r.chars().collect()).collect();
        for c in &seen {
            rows[c.y as usize][c.x as usize] = 'o';
        }
        rows[9][9] = '@';
        println!("{kind:?} facing south sees {} cells", seen.len());
        for r in rows {
            println!("  {}", r.into_iter().collect::<String>());
        }
    }

    for kind in [AgentKind::Evacuee, AgentKind::Llr, AgentKind::Hlr] {
        match astar_path(&map, kind, start, goal) {
            Some(path) => println!("{kind:?} path {start} -> {goal}: {} steps", path.len() - 1),
            None => println!("{kind:?}: no path {start} -> {goal}"),
        }
    }
    Ok(())
}
