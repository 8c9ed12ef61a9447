//! Text formats for grids, clouds, and paths.
//!
//! Grid files: header `POAGRID v1 <width> <height> <resolution> <origin_x>
//! <origin_y>` followed by `height` rows of `.` (free), `#` (occupied) and
//! `?` (unknown); the first row is row 0 at minimum y.
//!
//! Cloud files: header `POACLOUD v1 <count>`, then one `x y z label
//! [instance_id]` line per point with label 0 = free, 1 = passable,
//! 2 = unpassable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::cloud::{Label, LabelledPoint, LabelledPointCloud};
use crate::geometry::Pose2D;
use crate::grid::{CellState, OccupancyGrid};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Parse {
        line,
        message: message.into(),
    })
}

pub fn grid_to_string(grid: &OccupancyGrid) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "POAGRID v1 {} {} {} {} {}",
        grid.width, grid.height, grid.resolution, grid.origin.x, grid.origin.y
    );
    for row in 0..grid.height {
        for col in 0..grid.width {
            out.push(match grid.get(col, row) {
                CellState::Free => '.',
                CellState::Occupied => '#',
                CellState::Unknown => '?',
            });
        }
        out.push('\n');
    }
    out
}

pub fn grid_from_string(text: &str) -> Result<OccupancyGrid, FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = match lines.next() {
        Some(h) => h,
        None => return parse_err(1, "empty grid file"),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 7 || fields[0] != "POAGRID" || fields[1] != "v1" {
        return parse_err(1, "expected header `POAGRID v1 <w> <h> <res> <ox> <oy>`");
    }
    let width: usize = fields[2]
        .parse()
        .map_err(|_| FormatError::Parse { line: 1, message: "bad width".into() })?;
    let height: usize = fields[3]
        .parse()
        .map_err(|_| FormatError::Parse { line: 1, message: "bad height".into() })?;
    let resolution: f64 = fields[4]
        .parse()
        .map_err(|_| FormatError::Parse { line: 1, message: "bad resolution".into() })?;
    let ox: f64 = fields[5]
        .parse()
        .map_err(|_| FormatError::Parse { line: 1, message: "bad origin_x".into() })?;
    let oy: f64 = fields[6]
        .parse()
        .map_err(|_| FormatError::Parse { line: 1, message: "bad origin_y".into() })?;
    if resolution <= 0.0 {
        return parse_err(1, "resolution must be positive");
    }
    let mut grid = OccupancyGrid::new(
        width,
        height,
        resolution,
        Pose2D::new(ox, oy, 0.0),
        CellState::Unknown,
    );
    let mut rows = 0;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows >= height {
            return parse_err(lineno + 1, format!("more than {height} grid rows"));
        }
        if line.chars().count() != width {
            return parse_err(lineno + 1, format!("expected {} cells, got {}", width, line.chars().count()));
        }
        for (col, ch) in line.chars().enumerate() {
            let state = match ch {
                '.' => CellState::Free,
                '#' => CellState::Occupied,
                '?' => CellState::Unknown,
                other => return parse_err(lineno + 1, format!("unknown cell character `{other}`")),
            };
            grid.set(col, rows, state);
        }
        rows += 1;
    }
    if rows != height {
        return parse_err(rows + 1, format!("expected {height} rows, got {rows}"));
    }
    Ok(grid)
}

pub fn write_grid(path: &Path, grid: &OccupancyGrid) -> Result<(), FormatError> {
    fs::write(path, grid_to_string(grid))?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<OccupancyGrid, FormatError> {
    grid_from_string(&fs::read_to_string(path)?)
}

pub fn cloud_to_string(cloud: &LabelledPointCloud) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "POACLOUD v1 {}", cloud.len());
    for p in cloud.iter() {
        match p.instance_id {
            Some(id) => {
                let _ = writeln!(out, "{} {} {} {} {}", p.x, p.y, p.z, p.label.code(), id);
            }
            None => {
                let _ = writeln!(out, "{} {} {} {}", p.x, p.y, p.z, p.label.code());
            }
        }
    }
    out
}

pub fn cloud_from_string(text: &str) -> Result<LabelledPointCloud, FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = match lines.next() {
        Some(h) => h,
        None => return parse_err(1, "empty cloud file"),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "POACLOUD" || fields[1] != "v1" {
        return parse_err(1, "expected header `POACLOUD v1 <count>`");
    }
    let count: usize = fields[2]
        .parse()
        .map_err(|_| FormatError::Parse { line: 1, message: "bad point count".into() })?;
    let mut cloud = LabelledPointCloud::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 && fields.len() != 5 {
            return parse_err(lineno + 1, "expected `x y z label [instance_id]`");
        }
        let coord = |i: usize, name: &str| -> Result<f64, FormatError> {
            fields[i].parse().map_err(|_| FormatError::Parse {
                line: lineno + 1,
                message: format!("bad {name}"),
            })
        };
        let x = coord(0, "x")?;
        let y = coord(1, "y")?;
        let z = coord(2, "z")?;
        let code: u8 = fields[3].parse().map_err(|_| FormatError::Parse {
            line: lineno + 1,
            message: "bad label".into(),
        })?;
        let label = match Label::from_code(code) {
            Some(l) => l,
            None => return parse_err(lineno + 1, format!("label must be 0, 1 or 2, got {code}")),
        };
        let instance_id = if fields.len() == 5 {
            Some(fields[4].parse().map_err(|_| FormatError::Parse {
                line: lineno + 1,
                message: "bad instance_id".into(),
            })?)
        } else {
            None
        };
        cloud.push(LabelledPoint { x, y, z, label, instance_id });
    }
    if cloud.len() != count {
        return parse_err(
            cloud.len() + 2,
            format!("header promised {count} points, found {}", cloud.len()),
        );
    }
    Ok(cloud)
}

pub fn write_cloud(path: &Path, cloud: &LabelledPointCloud) -> Result<(), FormatError> {
    fs::write(path, cloud_to_string(cloud))?;
    Ok(())
}

pub fn read_cloud(path: &Path) -> Result<LabelledPointCloud, FormatError> {
    cloud_from_string(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_round_trip_preserves_cells() {
        let mut g = OccupancyGrid::new(4, 3, 0.5, Pose2D::new(-1.0, 2.0, 0.0), CellState::Free);
        g.set(1, 0, CellState::Occupied);
        g.set(3, 2, CellState::Unknown);
        let text = grid_to_string(&g);
        let back = grid_from_string(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn grid_header_errors_carry_line_numbers() {
        let err = grid_from_string("POAGRID v2 1 1 0.5 0 0\n.").unwrap_err();
        match err {
            FormatError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
        let err = grid_from_string("POAGRID v1 2 1 0.5 0 0\n.x").unwrap_err();
        match err {
            FormatError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains('x'));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn cloud_count_mismatch_is_rejected() {
        assert!(cloud_from_string("POACLOUD v1 2\n0 0 0 0\n").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cloud_round_trip(points in proptest::collection::vec(
            (-20.0f64..20.0, -20.0f64..20.0, -2.0f64..2.0, 0u8..3, proptest::option::of(0u32..500)),
            0..40,
        )) {
            let cloud: LabelledPointCloud = points
                .into_iter()
                .map(|(x, y, z, code, instance_id)| LabelledPoint {
                    x, y, z,
                    label: Label::from_code(code).unwrap(),
                    instance_id,
                })
                .collect();
            let back = cloud_from_string(&cloud_to_string(&cloud)).unwrap();
            prop_assert_eq!(cloud, back);
        }
    }
}
