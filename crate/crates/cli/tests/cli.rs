//! End-to-end tests of the `poa` binary: exit codes, file outputs, and
//! reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn poa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poa"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawning poa binary")
}

const TINY_SPEC: &str = "\
scenario.name = tiny
scenario.seed = 5
map.extent_x = 8
map.extent_y = 8
map.resolution = 0.5
stones.passable = 8
stones.unpassable = 3
mission.mode = sequential
mission.start = 1 1
mission.goal.A = 7 7
rrt.max_iterations = 1500
";

#[test]
fn help_exits_zero() {
    let out = run(poa().arg("--help"));
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("generate"));
}

#[test]
fn unknown_flag_exits_64() {
    let out = run(poa().args(["bench", "--bogus-flag"]));
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn unknown_subcommand_exits_64() {
    let out = run(poa().arg("frobnicate"));
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn generate_writes_world_files_and_respects_force() {
    let dir = tmp_dir("generate");
    let spec_path = dir.join("tiny.spec");
    fs::write(&spec_path, TINY_SPEC).unwrap();
    let out_dir = dir.join("world");
    let out = run(poa()
        .args(["generate", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&out_dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["world.cloud", "passable.grid", "unpassable.grid", "scenario.spec"] {
        assert!(out_dir.join(file).exists(), "missing {file}");
    }
    // Grid dimensions follow extent / resolution.
    let grid = fs::read_to_string(out_dir.join("passable.grid")).unwrap();
    assert!(grid.starts_with("POAGRID v1 16 16 0.5 0 0"));

    // Refuse to overwrite without --force.
    let out = run(poa()
        .args(["generate", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&out_dir));
    assert_eq!(out.status.code(), Some(74));
    let out = run(poa()
        .args(["generate", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&out_dir)
        .arg("--force"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn generate_rejects_bad_spec_key_with_line_number() {
    let dir = tmp_dir("badspec");
    let spec_path = dir.join("bad.spec");
    fs::write(&spec_path, "scenario.name = x\nnot.a.key = 1\n").unwrap();
    let out = run(poa()
        .args(["generate", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(dir.join("world")));
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not.a.key") && err.contains("line 2"), "stderr: {err}");
}

#[test]
fn plan_setup2_gvd_fails_plain_and_succeeds_with_poa() {
    let dir = tmp_dir("setup2");
    let world_dir = dir.join("world");
    let out = run(poa()
        .args(["generate", "--setup", "setup2", "--out"])
        .arg(&world_dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // Plain GVD on the merged clutter: no path.
    let out = run(poa()
        .args(["plan", "--planner", "gvd", "--world"])
        .arg(&world_dir));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // The POA variant plans on the unpassable grid and succeeds.
    let out = run(poa()
        .args(["plan", "--planner", "gvd", "--poa", "--world"])
        .arg(&world_dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let plan_dir = world_dir.join("plan-gvd-poa");
    assert!(plan_dir.join("leg-A.csv").exists());
    assert!(plan_dir.join("leg-B.csv").exists());
    let meta = fs::read_to_string(plan_dir.join("plan.meta")).unwrap();
    assert!(meta.contains("leg.A.status = ok"));
    assert!(meta.contains("leg.B.status = ok"));
    let svg = fs::read_to_string(plan_dir.join("plan.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href"));
}

#[test]
fn bench_outputs_are_byte_identical_for_fixed_seeds() {
    let dir = tmp_dir("bench");
    let spec_path = dir.join("tiny.spec");
    fs::write(&spec_path, TINY_SPEC).unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.join(name);
        let out = run(poa()
            .args(["bench", "--setups", "", "--planners", "astar,astar+poa"])
            .args(["--repeats", "1", "--seed", "7"])
            .arg("--spec")
            .arg(&spec_path)
            .arg("--out")
            .arg(&out_dir));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((
            fs::read(out_dir.join("results.csv")).unwrap(),
            fs::read(out_dir.join("summary.txt")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "results.csv differ");
    assert_eq!(outputs[0].1, outputs[1].1, "summary.txt differ");
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(csv.starts_with("setup,planner,seed,leg,distance_m,time_s,status\n"));
}

#[test]
fn plan_three_d_emits_attitude_columns_within_limits() {
    let dir = tmp_dir("threed");
    let spec_path = dir.join("hill.spec");
    fs::write(
        &spec_path,
        "\
scenario.name = hill
scenario.seed = 3
map.extent_x = 8
map.extent_y = 8
map.resolution = 0.5
map.terrain = heightfield
map.amplitude = 1
stones.passable = 6
stones.unpassable = 2
mission.mode = radial
mission.start = 1 1
mission.goal.A = 7 7
rrt.max_iterations = 1500
",
    )
    .unwrap();
    let world_dir = dir.join("world");
    let out = run(poa()
        .args(["generate", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&world_dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(poa()
        .args(["plan", "--planner", "astar", "--poa", "--3d", "--world"])
        .arg(&world_dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(world_dir.join("plan-astar-poa-3d").join("leg-A.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,z,yaw,roll,pitch"));
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 6);
        assert!(fields[4].abs() <= 0.175 + 1e-9, "roll over limit: {line}");
        assert!(fields[5].abs() <= 0.175 + 1e-9, "pitch over limit: {line}");
    }
}
