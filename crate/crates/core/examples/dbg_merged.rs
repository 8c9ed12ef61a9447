use poa_core::geometry::Pose2D;
use poa_core::grid::CellState;
use poa_core::planners::{plan_astar, plan_rrt_star, RrtParams};
use poa_core::scenario::{generate_world, ScenarioSpec};

fn main() {
    let seeds = 10u64;
    for setup in [ScenarioSpec::setup1(), ScenarioSpec::setup2(), ScenarioSpec::setup3()] {
        let mut occ = 0.0;
        let mut astar_ok = 0;
        let mut astar_len = 0.0;
        let mut plain_ok = 0;
        let mut plain_len = 0.0;
        let mut poa_ok = 0;
        let mut poa_len = 0.0;
        for s in 0..seeds {
            let mut spec = setup.clone();
            spec.rng_seed = 1 + s;
            let world = generate_world(&spec).unwrap();
            let merged = world.merged_grid();
            occ += merged.count(CellState::Occupied) as f64 / 900.0;
            let start = Pose2D::new(1.0, 1.0, 0.0);
            let a = Pose2D::new(1.0, 14.0, 0.0);
            let b = Pose2D::new(14.0, 14.0, 0.0);
            if let (Ok(p1), Ok(p2)) = (plan_astar(&merged, start, a), plan_astar(&merged, a, b)) {
                astar_ok += 1;
                astar_len += p1.length() + p2.length();
            }
            let best = |grid: &poa_core::grid::OccupancyGrid, from, to| -> Option<f64> {
                let mut best: Option<f64> = None;
                for run in 0..10u64 {
                    let params = RrtParams { rng_seed: 1000 * s + run, ..spec.rrt };
                    if let Ok(p) = plan_rrt_star(grid, from, to, &params) {
                        let l = p.length();
                        if best.is_none_or(|b| l < b) {
                            best = Some(l);
                        }
                    }
                }
                best
            };
            if let (Some(l1), Some(l2)) = (best(&merged, start, a), best(&merged, a, b)) {
                plain_ok += 1;
                plain_len += l1 + l2;
            }
            if let (Some(l1), Some(l2)) = (
                best(&world.unpassable_grid, start, a),
                best(&world.unpassable_grid, a, b),
            ) {
                poa_ok += 1;
                poa_len += l1 + l2;
            }
        }
        let pm = if plain_ok > 0 { plain_len / plain_ok as f64 } else { f64::NAN };
        let qm = if poa_ok > 0 { poa_len / poa_ok as f64 } else { f64::NAN };
        println!(
            "{}: occ {:.1}% | astar {}/{} mean {:.1} | rrt plain {}/{} mean {:.1} | rrt base {}/{} mean {:.1} | ratio {:.2}",
            setup.name,
            occ / seeds as f64 * 100.0,
            astar_ok, seeds,
            if astar_ok > 0 { astar_len / astar_ok as f64 } else { f64::NAN },
            plain_ok, seeds, pm,
            poa_ok, seeds, qm,
            qm / pm,
        );
    }
}
