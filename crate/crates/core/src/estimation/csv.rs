//! Plain CSV writers; floats are printed with 17 significant digits.

use std::io::{self, Write};

use super::{BoxDimEstimate, CoveringPoint, PointCloud};

pub fn write_scale_counts<W: Write>(mut w: W, est: &BoxDimEstimate) -> io::Result<()> {
    writeln!(w, "scale,count")?;
    for (s, c) in est.scales.iter().zip(&est.counts) {
        writeln!(w, "{s:.16e},{c}")?;
    }
    Ok(())
}

pub fn write_covering<W: Write>(mut w: W, rows: &[CoveringPoint]) -> io::Result<()> {
    writeln!(w, "scale,count,covering_sum")?;
    for r in rows {
        writeln!(w, "{:.16e},{},{:.16e}", r.scale, r.count, r.sum)?;
    }
    Ok(())
}

pub fn write_points<W: Write>(mut w: W, cloud: &PointCloud) -> io::Result<()> {
    let header: Vec<String> = (1..=cloud.dim()).map(|i| format!("x{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for p in cloud.points() {
        line.clear();
        for (k, x) in p.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{x:.16e}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
