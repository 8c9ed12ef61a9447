//! Static SVG rendering of worlds and paths. Self-contained output: no
//! external resources, just rects, polylines, circles, and text.

use std::fmt::Write as _;

use poa_core::grid::{CellState, OccupancyGrid};

const SCALE: f64 = 40.0; // pixels per metre

pub struct SvgPath<'a> {
    pub points: &'a [(f64, f64)],
    pub color: &'a str,
    pub label: &'a str,
}

pub struct SvgMarker {
    pub x: f64,
    pub y: f64,
    pub color: String,
    pub label: String,
}

pub struct SvgScene<'a> {
    pub extent_x: f64,
    pub extent_y: f64,
    pub passable: Option<&'a OccupancyGrid>,
    pub unpassable: Option<&'a OccupancyGrid>,
    pub paths: Vec<SvgPath<'a>>,
    pub splices: Vec<(f64, f64)>,
    pub markers: Vec<SvgMarker>,
}

impl SvgScene<'_> {
    pub fn render(&self) -> String {
        let width = self.extent_x * SCALE;
        let height = self.extent_y * SCALE;
        // SVG y grows downward; world y grows upward.
        let tx = |x: f64| x * SCALE;
        let ty = |y: f64| height - y * SCALE;
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
        );
        let _ = writeln!(
            out,
            r##"<rect x="0" y="0" width="{width}" height="{height}" fill="#fdfdf8"/>"##
        );
        // Passable cells light, unpassable dark, unknown hatched grey.
        for (grid, fill) in [
            (self.passable, "#d9c9a3"),
            (self.unpassable, "#50463c"),
        ] {
            let Some(grid) = grid else { continue };
            for row in 0..grid.height {
                for col in 0..grid.width {
                    match grid.get(col, row) {
                        CellState::Occupied => {
                            let (min_x, min_y, _, max_y) = grid.cell_rect(col, row);
                            let _ = writeln!(
                                out,
                                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}"/>"#,
                                tx(min_x),
                                ty(max_y),
                                grid.resolution * SCALE,
                                (max_y - min_y) * SCALE,
                            );
                        }
                        CellState::Unknown | CellState::Free => {}
                    }
                }
            }
        }
        for path in &self.paths {
            if path.points.len() < 2 {
                continue;
            }
            let mut points = String::new();
            for (x, y) in path.points {
                let _ = write!(points, "{:.1},{:.1} ", tx(*x), ty(*y));
            }
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2.5"><title>{}</title></polyline>"#,
                points.trim_end(),
                path.color,
                path.label,
            );
        }
        for (x, y) in &self.splices {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.1}" cy="{:.1}" r="5" fill="none" stroke="#cc3333" stroke-width="1.5"/>"##,
                tx(*x),
                ty(*y)
            );
        }
        for m in &self.markers {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="6" fill="{}"/>"#,
                tx(m.x),
                ty(m.y),
                m.color
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="14" fill="#222222">{}</text>"##,
                tx(m.x) + 8.0,
                ty(m.y) - 6.0,
                m.label
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
