//! 2.5D elevation maps: storage, file i/o, and the height-sample queries
//! that stability and risk estimation are built on.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, TrgError};
use crate::geom::dist2;

/// One terrain height sample in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    AsciiGrid,
    Pgm16,
}

/// Row-major 2.5D height grid. Cell `(col, row)` has its center at
/// `origin_xy + resolution_m * (col, row)`. Missing cells are stored as NaN.
///
/// Immutable after load; all queries are pure reads.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationMap {
    resolution_m: f64,
    origin_xy: [f64; 2],
    width_cells: usize,
    height_cells: usize,
    heights: Vec<f64>,
}

impl ElevationMap {
    pub fn new(
        resolution_m: f64,
        origin_xy: [f64; 2],
        width_cells: usize,
        height_cells: usize,
        heights: Vec<f64>,
    ) -> Result<Self> {
        if resolution_m <= 0.0 {
            return Err(TrgError::InvalidParam("resolution_m must be > 0".into()));
        }
        if width_cells == 0 || height_cells == 0 {
            return Err(TrgError::InvalidParam("grid must be at least 1x1".into()));
        }
        if heights.len() != width_cells * height_cells {
            return Err(TrgError::InvalidParam(format!(
                "heights length {} != {}x{}",
                heights.len(),
                width_cells,
                height_cells
            )));
        }
        if heights.iter().any(|h| h.is_infinite()) {
            return Err(TrgError::InvalidParam("non-finite height".into()));
        }
        Ok(Self {
            resolution_m,
            origin_xy,
            width_cells,
            height_cells,
            heights,
        })
    }

    pub fn flat(resolution_m: f64, origin_xy: [f64; 2], w: usize, h: usize, z: f64) -> Self {
        Self::new(resolution_m, origin_xy, w, h, vec![z; w * h]).unwrap()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution_m
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin_xy
    }

    pub fn width_cells(&self) -> usize {
        self.width_cells
    }

    pub fn height_cells(&self) -> usize {
        self.height_cells
    }

    /// World extent as `[min_x, min_y, max_x, max_y]` over cell centers.
    pub fn bounds(&self) -> [f64; 4] {
        [
            self.origin_xy[0],
            self.origin_xy[1],
            self.origin_xy[0] + self.resolution_m * (self.width_cells - 1) as f64,
            self.origin_xy[1] + self.resolution_m * (self.height_cells - 1) as f64,
        ]
    }

    pub fn cell_center(&self, col: usize, row: usize) -> [f64; 2] {
        [
            self.origin_xy[0] + col as f64 * self.resolution_m,
            self.origin_xy[1] + row as f64 * self.resolution_m,
        ]
    }

    /// Cell containing a world point, or `None` when out of bounds.
    pub fn world_to_cell(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let col = ((p[0] - self.origin_xy[0]) / self.resolution_m).round();
        let row = ((p[1] - self.origin_xy[1]) / self.resolution_m).round();
        if col < 0.0 || row < 0.0 {
            return None;
        }
        let (col, row) = (col as usize, row as usize);
        if col >= self.width_cells || row >= self.height_cells {
            return None;
        }
        Some((col, row))
    }

    pub fn height_at_cell(&self, col: usize, row: usize) -> Option<f64> {
        let z = self.heights[row * self.width_cells + col];
        if z.is_nan() {
            None
        } else {
            Some(z)
        }
    }

    /// Height of the cell containing a world point (missing/out-of-bounds → None).
    pub fn height_at(&self, p: [f64; 2]) -> Option<f64> {
        let (c, r) = self.world_to_cell(p)?;
        self.height_at_cell(c, r)
    }

    fn clamp_col(&self, x: f64) -> usize {
        let c = ((x - self.origin_xy[0]) / self.resolution_m).floor();
        c.clamp(0.0, (self.width_cells - 1) as f64) as usize
    }

    fn clamp_row(&self, y: f64) -> usize {
        let r = ((y - self.origin_xy[1]) / self.resolution_m).floor();
        r.clamp(0.0, (self.height_cells - 1) as f64) as usize
    }

    /// All non-missing samples whose cell centers lie within `radius` of `center`.
    pub fn heights_in_disk(&self, center: [f64; 2], radius: f64) -> Vec<HeightSample> {
        let mut out = Vec::new();
        if radius <= 0.0 {
            return out;
        }
        let c0 = self.clamp_col(center[0] - radius);
        let c1 = self.clamp_col(center[0] + radius + self.resolution_m);
        let r0 = self.clamp_row(center[1] - radius);
        let r1 = self.clamp_row(center[1] + radius + self.resolution_m);
        for row in r0..=r1 {
            for col in c0..=c1 {
                let p = self.cell_center(col, row);
                if dist2(p, center) <= radius {
                    if let Some(z) = self.height_at_cell(col, row) {
                        out.push(HeightSample { x: p[0], y: p[1], z });
                    }
                }
            }
        }
        out
    }

    /// Samples inside the edge-aligned ellipse between `p_i` and `p_j`:
    /// semi-major `‖p_i−p_j‖_xy/2 + lateral_halfwidth` along the edge,
    /// semi-minor `lateral_halfwidth`, centered at the xy midpoint.
    pub fn heights_in_ellipse(
        &self,
        p_i: [f64; 3],
        p_j: [f64; 3],
        lateral_halfwidth: f64,
    ) -> Result<Vec<HeightSample>> {
        let dx = p_j[0] - p_i[0];
        let dy = p_j[1] - p_i[1];
        let d = (dx * dx + dy * dy).sqrt();
        if d < self.resolution_m {
            return Err(TrgError::DegenerateEdge);
        }
        let a = d / 2.0 + lateral_halfwidth;
        let b = lateral_halfwidth;
        let cx = (p_i[0] + p_j[0]) / 2.0;
        let cy = (p_i[1] + p_j[1]) / 2.0;
        let (ux, uy) = (dx / d, dy / d);
        let mut out = Vec::new();
        let c0 = self.clamp_col(cx - a);
        let c1 = self.clamp_col(cx + a + self.resolution_m);
        let r0 = self.clamp_row(cy - a);
        let r1 = self.clamp_row(cy + a + self.resolution_m);
        for row in r0..=r1 {
            for col in c0..=c1 {
                let p = self.cell_center(col, row);
                let rx = p[0] - cx;
                let ry = p[1] - cy;
                let lon = rx * ux + ry * uy;
                let lat = -rx * uy + ry * ux;
                if lon * lon / (a * a) + lat * lat / (b * b) <= 1.0 {
                    if let Some(z) = self.height_at_cell(col, row) {
                        out.push(HeightSample { x: p[0], y: p[1], z });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: &Path, format: MapFormat) -> Result<Self> {
        match format {
            MapFormat::AsciiGrid => load_ascii_grid(path),
            MapFormat::Pgm16 => load_pgm16(path),
        }
    }

    /// Guess the format from the extension (`.pgm` → pgm16, anything else → ascii grid).
    pub fn load_auto(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => load_pgm16(path),
            _ => load_ascii_grid(path),
        }
    }

    pub fn save_ascii_grid(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "ncols {}", self.width_cells).unwrap();
        writeln!(s, "nrows {}", self.height_cells).unwrap();
        writeln!(s, "xllcorner {}", self.origin_xy[0] - self.resolution_m / 2.0).unwrap();
        writeln!(s, "yllcorner {}", self.origin_xy[1] - self.resolution_m / 2.0).unwrap();
        writeln!(s, "cellsize {}", self.resolution_m).unwrap();
        writeln!(s, "NODATA_value {}", NODATA).unwrap();
        // ESRI convention: first data row is the northernmost.
        for row in (0..self.height_cells).rev() {
            let mut line = String::new();
            for col in 0..self.width_cells {
                if col > 0 {
                    line.push(' ');
                }
                match self.height_at_cell(col, row) {
                    Some(z) => write!(line, "{z}").unwrap(),
                    None => write!(line, "{NODATA}").unwrap(),
                }
            }
            writeln!(s, "{line}").unwrap();
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}

const NODATA: f64 = -9999.0;

fn parse_err(path: &Path, message: impl Into<String>) -> TrgError {
    TrgError::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn load_ascii_grid(path: &Path) -> Result<ElevationMap> {
    let text = std::fs::read_to_string(path)?;
    let mut tokens = text.split_ascii_whitespace();
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut cellsize = None;
    let mut nodata = NODATA;
    // Header: key/value pairs until the first bare number.
    let mut first_value: Option<f64> = None;
    while let Some(tok) = tokens.next() {
        let key = tok.to_ascii_lowercase();
        let known = matches!(
            key.as_str(),
            "ncols" | "nrows" | "xllcorner" | "yllcorner" | "cellsize" | "nodata_value"
        );
        if !known {
            first_value = Some(
                tok.parse::<f64>()
                    .map_err(|_| parse_err(path, format!("unexpected token `{tok}` in header")))?,
            );
            break;
        }
        let val: f64 = tokens
            .next()
            .ok_or_else(|| parse_err(path, format!("missing value for `{key}`")))?
            .parse()
            .map_err(|_| parse_err(path, format!("non-numeric value for `{key}`")))?;
        match key.as_str() {
            "ncols" => ncols = Some(val),
            "nrows" => nrows = Some(val),
            "xllcorner" => xll = Some(val),
            "yllcorner" => yll = Some(val),
            "cellsize" => cellsize = Some(val),
            _ => nodata = val,
        }
    }
    let ncols = ncols.ok_or_else(|| parse_err(path, "missing header field `ncols`"))? as usize;
    let nrows = nrows.ok_or_else(|| parse_err(path, "missing header field `nrows`"))? as usize;
    let xll = xll.ok_or_else(|| parse_err(path, "missing header field `xllcorner`"))?;
    let yll = yll.ok_or_else(|| parse_err(path, "missing header field `yllcorner`"))?;
    let cellsize = cellsize.ok_or_else(|| parse_err(path, "missing header field `cellsize`"))?;
    if cellsize <= 0.0 {
        return Err(parse_err(path, "non-positive `cellsize`"));
    }
    if ncols == 0 || nrows == 0 {
        return Err(parse_err(path, "zero-size grid (`ncols`/`nrows`)"));
    }

    let mut values = Vec::with_capacity(ncols * nrows);
    if let Some(v) = first_value {
        values.push(v);
    }
    for tok in tokens {
        let v: f64 = tok
            .parse()
            .map_err(|_| parse_err(path, format!("non-numeric height `{tok}`")))?;
        values.push(v);
    }
    if values.len() != ncols * nrows {
        return Err(parse_err(
            path,
            format!("expected {} heights, got {}", ncols * nrows, values.len()),
        ));
    }
    // Rows arrive north-first; flip into row 0 = south.
    let mut heights = vec![f64::NAN; ncols * nrows];
    for (i, v) in values.into_iter().enumerate() {
        let src_row = i / ncols;
        let col = i % ncols;
        let row = nrows - 1 - src_row;
        heights[row * ncols + col] = if v == nodata { f64::NAN } else { v };
    }
    let origin = [xll + cellsize / 2.0, yll + cellsize / 2.0];
    ElevationMap::new(cellsize, origin, ncols, nrows, heights)
}

/// Sidecar parameters for a pgm16 map (`<map>.meta`, `key value` lines).
#[derive(Debug, Clone, Copy)]
struct PgmMeta {
    scale_m_per_lsb: f64,
    z_offset_m: f64,
    cellsize: f64,
    origin_x: f64,
    origin_y: f64,
}

fn load_pgm_meta(path: &Path) -> Result<PgmMeta> {
    let meta_path = path.with_extension("meta");
    let text = std::fs::read_to_string(&meta_path)?;
    let mut scale = None;
    let mut z_off = None;
    let mut cellsize = None;
    let mut ox = None;
    let mut oy = None;
    for line in text.lines() {
        let mut it = line.split_ascii_whitespace();
        let (Some(key), Some(val)) = (it.next(), it.next()) else {
            continue;
        };
        let val: f64 = val
            .parse()
            .map_err(|_| parse_err(&meta_path, format!("non-numeric value for `{key}`")))?;
        match key {
            "scale_m_per_lsb" => scale = Some(val),
            "z_offset_m" => z_off = Some(val),
            "cellsize" => cellsize = Some(val),
            "origin_x" => ox = Some(val),
            "origin_y" => oy = Some(val),
            _ => {}
        }
    }
    Ok(PgmMeta {
        scale_m_per_lsb: scale
            .ok_or_else(|| parse_err(&meta_path, "missing `scale_m_per_lsb`"))?,
        z_offset_m: z_off.unwrap_or(0.0),
        cellsize: cellsize.ok_or_else(|| parse_err(&meta_path, "missing `cellsize`"))?,
        origin_x: ox.ok_or_else(|| parse_err(&meta_path, "missing `origin_x`"))?,
        origin_y: oy.ok_or_else(|| parse_err(&meta_path, "missing `origin_y`"))?,
    })
}

fn load_pgm16(path: &Path) -> Result<ElevationMap> {
    let meta = load_pgm_meta(path)?;
    if meta.cellsize <= 0.0 {
        return Err(parse_err(path, "non-positive `cellsize` in sidecar"));
    }
    let bytes = std::fs::read(path)?;
    // Header: "P5" whitespace width whitespace height whitespace maxval, single
    // whitespace byte, then big-endian u16 samples.
    let mut pos = 0usize;
    let mut fields: Vec<u64> = Vec::new();
    let mut magic_ok = false;
    while pos < bytes.len() && fields.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let tok = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| parse_err(path, "invalid pgm header"))?;
        if !magic_ok {
            if tok != "P5" {
                return Err(parse_err(path, format!("bad magic `{tok}`, expected P5")));
            }
            magic_ok = true;
        } else {
            fields.push(
                tok.parse()
                    .map_err(|_| parse_err(path, format!("non-numeric header field `{tok}`")))?,
            );
        }
    }
    if fields.len() != 3 {
        return Err(parse_err(path, "truncated pgm header"));
    }
    let (w, h, maxval) = (fields[0] as usize, fields[1] as usize, fields[2]);
    if maxval != 65535 {
        return Err(parse_err(path, format!("maxval {maxval}, expected 65535")));
    }
    if w == 0 || h == 0 {
        return Err(parse_err(path, "zero-size grid (pgm dimensions)"));
    }
    pos += 1; // single whitespace after maxval
    let need = w * h * 2;
    if bytes.len() < pos + need {
        return Err(parse_err(path, "truncated pgm pixel data"));
    }
    let mut heights = vec![f64::NAN; w * h];
    for i in 0..w * h {
        let v = u16::from_be_bytes([bytes[pos + 2 * i], bytes[pos + 2 * i + 1]]);
        let src_row = i / w;
        let col = i % w;
        let row = h - 1 - src_row; // pgm rows are top-first
        heights[row * w + col] = meta.z_offset_m + meta.scale_m_per_lsb * v as f64;
    }
    ElevationMap::new(
        meta.cellsize,
        [meta.origin_x, meta.origin_y],
        w,
        h,
        heights,
    )
}

/// Median of sample z values; even counts average the central pair.
pub fn median_height(samples: &[HeightSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(TrgError::EmptySamples);
    }
    let mut zs: Vec<f64> = samples.iter().map(|s| s.z).collect();
    zs.sort_by(f64::total_cmp);
    let n = zs.len();
    Ok(if n % 2 == 1 {
        zs[n / 2]
    } else {
        (zs[n / 2 - 1] + zs[n / 2]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(z: f64) -> HeightSample {
        HeightSample { x: 0.0, y: 0.0, z }
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median_height(&[sample(0.0), sample(0.0), sample(0.0)]).unwrap(), 0.0);
        assert_eq!(
            median_height(&[sample(0.1), sample(0.3), sample(0.2)]).unwrap(),
            0.2
        );
        assert_eq!(
            median_height(&[sample(0.1), sample(0.2), sample(0.3), sample(0.4)]).unwrap(),
            0.25
        );
        assert!(median_height(&[]).is_err());
    }

    #[test]
    fn world_cell_roundtrip() {
        let map = ElevationMap::flat(0.1, [1.0, -2.0], 20, 30, 0.0);
        for row in 0..30 {
            for col in 0..20 {
                let p = map.cell_center(col, row);
                assert_eq!(map.world_to_cell(p), Some((col, row)));
            }
        }
        assert_eq!(map.world_to_cell([0.0, 0.0]), None);
    }

    #[test]
    fn disk_query_flat() {
        let map = ElevationMap::flat(0.1, [0.0, 0.0], 50, 50, 0.0);
        let s = map.heights_in_disk([2.5, 2.5], 0.2);
        assert!(!s.is_empty());
        assert!(s.iter().all(|h| h.z == 0.0));
        // fully off-map
        assert!(map.heights_in_disk([100.0, 100.0], 0.2).is_empty());
    }

    #[test]
    fn disk_query_matches_brute_force() {
        let map = ElevationMap::flat(0.1, [0.0, 0.0], 100, 100, 0.0);
        let center = [3.07, 4.81];
        let got = map.heights_in_disk(center, 0.2);
        let mut expected = 0;
        for row in 0..100 {
            for col in 0..100 {
                if dist2(map.cell_center(col, row), center) <= 0.2 {
                    expected += 1;
                }
            }
        }
        assert_eq!(got.len(), expected);
    }

    #[test]
    fn ellipse_query_inequality_and_brute_force() {
        let map = ElevationMap::flat(0.1, [-1.0, -1.0], 100, 100, 0.0);
        let p_i = [0.0, 0.0, 0.0];
        let p_j = [1.0, 0.0, 0.0];
        let got = map.heights_in_ellipse(p_i, p_j, 0.2).unwrap();
        assert!(!got.is_empty());
        for s in &got {
            let v = (s.x - 0.5).powi(2) / 0.49 + s.y.powi(2) / 0.04;
            assert!(v <= 1.0 + 1e-12, "sample outside ellipse: {v}");
        }
        let mut expected = 0;
        for row in 0..100 {
            for col in 0..100 {
                let [x, y] = map.cell_center(col, row);
                if (x - 0.5).powi(2) / 0.49 + y.powi(2) / 0.04 <= 1.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(got.len(), expected);
    }

    #[test]
    fn ellipse_degenerate_edge() {
        let map = ElevationMap::flat(0.1, [0.0, 0.0], 10, 10, 0.0);
        assert!(matches!(
            map.heights_in_ellipse([0.5, 0.5, 0.0], [0.5, 0.5, 1.0], 0.2),
            Err(TrgError::DegenerateEdge)
        ));
    }

    #[test]
    fn ascii_grid_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.asc");
        std::fs::write(
            &path,
            "ncols 3\nnrows 3\nxllcorner -0.05\nyllcorner -0.05\ncellsize 0.1\nNODATA_value -9999\n\
             0 0 0\n0 -9999 0\n0 0 0\n",
        )
        .unwrap();
        let map = ElevationMap::load(&path, MapFormat::AsciiGrid).unwrap();
        assert_eq!(map.width_cells(), 3);
        assert_eq!(map.height_cells(), 3);
        assert_eq!(map.resolution(), 0.1);
        assert_eq!(map.height_at_cell(1, 1), None);
        let loaded: usize = (0..3)
            .flat_map(|r| (0..3).map(move |c| (c, r)))
            .filter(|&(c, r)| map.height_at_cell(c, r) == Some(0.0))
            .count();
        assert_eq!(loaded, 8);
    }

    #[test]
    fn ascii_grid_errors_name_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.asc");
        std::fs::write(&path, "ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize -1\n0\n")
            .unwrap();
        let err = ElevationMap::load(&path, MapFormat::AsciiGrid).unwrap_err();
        assert!(err.to_string().contains("cellsize"), "{err}");

        std::fs::write(&path, "nrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\n0 0 0\n").unwrap();
        let err = ElevationMap::load(&path, MapFormat::AsciiGrid).unwrap_err();
        assert!(err.to_string().contains("ncols"), "{err}");
    }

    #[test]
    fn ascii_grid_roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut heights = vec![0.0f64; 25];
        for (i, h) in heights.iter_mut().enumerate() {
            *h = (i as f64 * 0.137).sin() * 3.7;
        }
        heights[7] = f64::NAN;
        let map = ElevationMap::new(0.25, [1.3, -0.7], 5, 5, heights).unwrap();
        let path = dir.path().join("rt.asc");
        map.save_ascii_grid(&path).unwrap();
        let back = ElevationMap::load(&path, MapFormat::AsciiGrid).unwrap();
        assert_eq!(back.width_cells(), 5);
        assert_eq!(back.resolution(), 0.25);
        for row in 0..5 {
            for col in 0..5 {
                let a = map.height_at_cell(col, row);
                let b = back.height_at_cell(col, row);
                match (a, b) {
                    (Some(x), Some(y)) => assert_eq!(x.to_bits(), y.to_bits()),
                    (None, None) => {}
                    _ => panic!("missing-mask mismatch at ({col},{row})"),
                }
            }
        }
    }

    #[test]
    fn pgm16_scale_arithmetic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        // 2x2, big-endian pixels: 1500, 0, 65535, 42
        let mut bytes = b"P5\n2 2\n65535\n".to_vec();
        for v in [1500u16, 0, 65535, 42] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        std::fs::write(&path, &bytes).unwrap();
        std::fs::write(
            dir.path().join("m.meta"),
            "scale_m_per_lsb 0.001\nz_offset_m 0\ncellsize 0.1\norigin_x 0\norigin_y 0\n",
        )
        .unwrap();
        let map = ElevationMap::load(&path, MapFormat::Pgm16).unwrap();
        // Independent byte-level decode: pixel 0 of row 0 (top) is cell (0, 1).
        assert_eq!(map.height_at_cell(0, 1), Some(1.5));
        assert_eq!(map.height_at_cell(1, 1), Some(0.0));
        assert_eq!(map.height_at_cell(0, 0), Some(65.535));
        assert_eq!(map.height_at_cell(1, 0), Some(0.042));
    }

    proptest! {
        #[test]
        fn disk_equals_brute_force(cx in 0.0..5.0f64, cy in 0.0..5.0f64, r in 0.05..1.0f64) {
            let map = ElevationMap::flat(0.1, [0.0, 0.0], 50, 50, 0.0);
            let got = map.heights_in_disk([cx, cy], r).len();
            let mut expected = 0usize;
            for row in 0..50 {
                for col in 0..50 {
                    if dist2(map.cell_center(col, row), [cx, cy]) <= r {
                        expected += 1;
                    }
                }
            }
            prop_assert_eq!(got, expected);
        }
    }
}
