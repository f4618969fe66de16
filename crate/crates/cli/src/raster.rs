//! Binary occupancy rasters in PGM (P5) format.

use std::io::{self, Write};

use ifsproj_core::PointCloud;

/// `resolution x resolution` grid over the square hull of a planar cloud;
/// occupied cells are black on white, `y` pointing up.
pub fn occupancy(cloud: &PointCloud, resolution: usize) -> Option<Vec<u8>> {
    if cloud.dim() != 2 || resolution == 0 || cloud.is_empty() {
        return None;
    }
    let b = cloud.bounds();
    let side = cloud.extent().max(f64::MIN_POSITIVE);
    let mut grid = vec![255u8; resolution * resolution];
    let cell = |x: f64, lo: f64| (((x - lo) / side * resolution as f64) as usize).min(resolution - 1);
    for p in cloud.points() {
        let i = cell(p[0], b[0].0);
        let j = cell(p[1], b[1].0);
        grid[(resolution - 1 - j) * resolution + i] = 0;
    }
    Some(grid)
}

pub fn write_pgm<W: Write>(mut w: W, resolution: usize, pixels: &[u8]) -> io::Result<()> {
    write!(w, "P5\n{resolution} {resolution}\n255\n")?;
    w.write_all(pixels)
}
