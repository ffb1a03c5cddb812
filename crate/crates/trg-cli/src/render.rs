//! SVG rendering: grayscale height shading, state-colored nodes, edges
//! shaded by risk weight, and an optional path polyline.

use std::fmt::Write as _;
use std::path::Path;

use trg_core::{ElevationMap, NodeState, TrgError, TrgGraph};

const PX_PER_M: f64 = 20.0;

pub fn read_waypoint_csv(path: &Path) -> trg_core::Result<Vec<[f64; 3]>> {
    let text = std::fs::read_to_string(path)?;
    let parse_err = |message: String| TrgError::Parse {
        path: path.display().to_string(),
        message,
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 && line.trim() == "x,y,z" {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(format!("line {}: expected 3 fields", i + 1)));
        }
        let mut p = [0.0; 3];
        for (k, f) in fields.iter().enumerate() {
            p[k] = f
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("line {}: {e}", i + 1)))?;
        }
        out.push(p);
    }
    Ok(out)
}

struct View {
    min_x: f64,
    max_y: f64,
    width_px: f64,
    height_px: f64,
}

impl View {
    // svg y grows downward, world y upward
    fn to_px(&self, p: [f64; 2]) -> (f64, f64) {
        (
            (p[0] - self.min_x) * PX_PER_M,
            (self.max_y - p[1]) * PX_PER_M,
        )
    }
}

fn gray(h: f64, lo: f64, hi: f64) -> u8 {
    if !(hi > lo) {
        return 128;
    }
    let t = ((h - lo) / (hi - lo)).clamp(0.0, 1.0);
    (40.0 + t * 200.0).round() as u8
}

fn fmt_px(v: f64) -> String {
    format!("{:.2}", v)
}

pub fn render_svg(
    map: &ElevationMap,
    graph: Option<&TrgGraph>,
    path: Option<&[[f64; 3]]>,
) -> String {
    let [min_x, min_y, max_x, max_y] = map.bounds();
    let res = map.resolution();
    let view = View {
        min_x: min_x - res / 2.0,
        max_y: max_y + res / 2.0,
        width_px: (max_x - min_x + res) * PX_PER_M,
        height_px: (max_y - min_y + res) * PX_PER_M,
    };

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in 0..map.height_cells() {
        for col in 0..map.width_cells() {
            if let Some(h) = map.height_at_cell(col, row) {
                lo = lo.min(h);
                hi = hi.max(h);
            }
        }
    }

    let mut s = String::new();
    write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = fmt_px(view.width_px),
        h = fmt_px(view.height_px)
    )
    .unwrap();
    writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"rgb(20,20,20)\"/>",
        fmt_px(view.width_px),
        fmt_px(view.height_px)
    )
    .unwrap();

    // run-length merge equal shades along each row to keep files small
    let cell_px = res * PX_PER_M;
    for row in 0..map.height_cells() {
        let mut col = 0;
        while col < map.width_cells() {
            let Some(h) = map.height_at_cell(col, row) else {
                col += 1;
                continue;
            };
            let g = gray(h, lo, hi);
            let mut run = 1;
            while col + run < map.width_cells() {
                match map.height_at_cell(col + run, row) {
                    Some(h2) if gray(h2, lo, hi) == g => run += 1,
                    _ => break,
                }
            }
            let c = map.cell_center(col, row);
            let (px, py) = view.to_px([c[0] - res / 2.0, c[1] + res / 2.0]);
            writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({g},{g},{g})\"/>",
                fmt_px(px),
                fmt_px(py),
                fmt_px(cell_px * run as f64 + 0.05),
                fmt_px(cell_px + 0.05)
            )
            .unwrap();
            col += run;
        }
    }

    if let Some(graph) = graph {
        for edge in graph.edges() {
            let (Some(a), Some(b)) = (graph.node(edge.from_id), graph.node(edge.to_id)) else {
                continue;
            };
            let (x1, y1) = view.to_px([a.position[0], a.position[1]]);
            let (x2, y2) = view.to_px([b.position[0], b.position[1]]);
            // stroke runs from pale yellow (w=0) to saturated red (w=1)
            let w = edge.weight.clamp(0.0, 1.0);
            let green = (230.0 * (1.0 - w)).round() as u8;
            writeln!(
                s,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"rgb(230,{green},40)\" \
                 stroke-width=\"{}\" stroke-opacity=\"{:.2}\"/>",
                fmt_px(x1),
                fmt_px(y1),
                fmt_px(x2),
                fmt_px(y2),
                fmt_px(1.0 + 2.0 * w),
                0.35 + 0.65 * w
            )
            .unwrap();
        }
        for node in graph.nodes() {
            let (cx, cy) = view.to_px([node.position[0], node.position[1]]);
            let fill = match node.state {
                NodeState::Valid => "rgb(60,170,60)",
                NodeState::Invalid => "rgb(210,40,40)",
                NodeState::Frontier => "rgb(40,110,230)",
            };
            writeln!(
                s,
                "<circle cx=\"{}\" cy=\"{}\" r=\"2.2\" fill=\"{fill}\"/>",
                fmt_px(cx),
                fmt_px(cy)
            )
            .unwrap();
        }
    }

    if let Some(path) = path {
        if path.len() >= 2 {
            let pts: Vec<String> = path
                .iter()
                .map(|p| {
                    let (x, y) = view.to_px([p[0], p[1]]);
                    format!("{},{}", fmt_px(x), fmt_px(y))
                })
                .collect();
            writeln!(
                s,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"rgb(255,0,255)\" \
                 stroke-width=\"3\"/>",
                pts.join(" ")
            )
            .unwrap();
        }
    }

    s.push_str("</svg>\n");
    s
}
