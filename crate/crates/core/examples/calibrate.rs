//! Scratch calibration harness (not part of the deliverable test suite).

use poa_core::grid::CellState;
use poa_core::planners::PlannerId;
use poa_core::scenario::{generate_world, ScenarioSpec};
use poa_core::simulation::{plan_leg, run_benchmark, BenchPlanner, SpeedModel};
use std::time::Instant;

fn main() {
    let seeds = 20u64;
    let t0 = Instant::now();

    // Occupancy statistics per setup.
    for spec in [ScenarioSpec::setup1(), ScenarioSpec::setup2(), ScenarioSpec::setup3()] {
        let mut merged_occ = 0.0;
        let mut pass_occ = 0.0;
        let mut unpass_occ = 0.0;
        for s in 0..3 {
            let mut sp = spec.clone();
            sp.rng_seed = 1 + s;
            let w = generate_world(&sp).unwrap();
            let total = (w.passable_grid.width * w.passable_grid.height) as f64;
            merged_occ += w.merged_grid().count(CellState::Occupied) as f64 / total;
            pass_occ += w.passable_grid.count(CellState::Occupied) as f64 / total;
            unpass_occ += w.unpassable_grid.count(CellState::Occupied) as f64 / total;
        }
        println!(
            "{}: merged {:.1}% passable {:.1}% unpassable {:.1}% (cloud {} pts)",
            spec.name,
            merged_occ / 3.0 * 100.0,
            pass_occ / 3.0 * 100.0,
            unpass_occ / 3.0 * 100.0,
            generate_world(&spec).unwrap().cloud.len(),
        );
    }
    println!("world stats at {:?}", t0.elapsed());

    // Criterion 3 shape: GVD failure on merged vs GVD+POA success.
    let mut gvd_fail = 0;
    let mut poa_ok = 0;
    for s in 0..seeds {
        let mut spec = ScenarioSpec::setup2();
        spec.rng_seed = 1 + s;
        let world = generate_world(&spec).unwrap();
        let merged = world.merged_grid();
        let missions = spec.missions();
        let plain_ok = missions.iter().all(|m| {
            plan_leg(&world, &merged, &BenchPlanner::Plain(PlannerId::Gvd), m, spec.rng_seed).is_some()
        });
        let poa_all = missions.iter().all(|m| {
            plan_leg(&world, &merged, &BenchPlanner::Poa(PlannerId::Gvd), m, spec.rng_seed).is_some()
        });
        if !plain_ok {
            gvd_fail += 1;
        }
        if poa_all {
            poa_ok += 1;
        }
    }
    println!(
        "setup2 x{seeds}: plain GVD failures {gvd_fail} ({:.0}%), GVD+POA successes {poa_ok} ({:.0}%) at {:?}",
        gvd_fail as f64 / seeds as f64 * 100.0,
        poa_ok as f64 / seeds as f64 * 100.0,
        t0.elapsed()
    );

    // Criterion 4 shape: RRT* vs RRT*+POA on setup3.
    let planners = [
        BenchPlanner::Plain(PlannerId::RrtStar),
        BenchPlanner::Poa(PlannerId::RrtStar),
    ];
    let result = run_benchmark(&[ScenarioSpec::setup3()], &planners, seeds as usize, &SpeedModel::default()).unwrap();
    for s in result.summaries() {
        println!(
            "{} {}: missions {} success {} mean_dist {:?} mean_time {:?}",
            s.setup, s.planner, s.missions, s.successes, s.mean_distance_m, s.mean_time_s
        );
    }
    let sums = result.summaries();
    if let (Some(plain), Some(poa)) = (
        sums.iter().find(|s| s.planner == "rrt_star"),
        sums.iter().find(|s| s.planner == "rrt_star+poa"),
    ) {
        if let (Some(pd), Some(qd), Some(pt), Some(qt)) = (
            plain.mean_distance_m,
            poa.mean_distance_m,
            plain.mean_time_s,
            poa.mean_time_s,
        ) {
            println!("distance ratio poa/plain = {:.3}, time ratio = {:.3}", qd / pd, qt / pt);
        }
    }
    println!("rrt bench at {:?}", t0.elapsed());

    // Criterion 5 shape: density tiers for POA variants.
    let poa_planners = [
        BenchPlanner::Poa(PlannerId::Gvd),
        BenchPlanner::Poa(PlannerId::AStar),
        BenchPlanner::Poa(PlannerId::RrtStar),
    ];
    let tiers = [ScenarioSpec::setup1(), ScenarioSpec::setup2(), ScenarioSpec::setup3()];
    let result = run_benchmark(&tiers, &poa_planners, seeds as usize, &SpeedModel::default()).unwrap();
    for planner in poa_planners {
        let name = planner.name();
        let mut dists = Vec::new();
        let mut times = Vec::new();
        for tier in &tiers {
            let s = result
                .summaries()
                .into_iter()
                .find(|s| s.setup == tier.name && s.planner == name)
                .unwrap();
            dists.push(s.mean_distance_m.unwrap_or(f64::NAN));
            times.push(s.mean_time_s.unwrap_or(f64::NAN));
        }
        let spread = (dists.iter().cloned().fold(f64::MIN, f64::max)
            - dists.iter().cloned().fold(f64::MAX, f64::min))
            / dists.iter().cloned().fold(f64::MAX, f64::min);
        println!(
            "{name}: dists {dists:?} spread {:.1}% | times {times:?} growth {:.1}%",
            spread * 100.0,
            (times[2] / times[0] - 1.0) * 100.0
        );
    }
    println!("total {:?}", t0.elapsed());
}
