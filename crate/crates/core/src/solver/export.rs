//! Trajectory files: CSV (`t,x[,y],u`, one row per node and snapshot) and a
//! compact little-endian binary format.
//!
//! Binary layout: magic `MCFG`, version `u16`, dimension `u16`, snapshot count
//! `u32`; then per axis node count `u32`, lower bound `f64`, spacing `f64`
//! (spacing 0 means the node coordinates follow as `count` doubles); then per
//! snapshot the time `f64` and the values in row-major order, x fastest.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::FlowTrajectory;
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid, ScalarField};

const MAGIC: &[u8; 4] = b"MCFG";
const VERSION: u16 = 1;

pub fn write_csv(traj: &FlowTrajectory, w: impl Write) -> Result<()> {
    let mut w = BufWriter::new(w);
    let g = traj.grid();
    let dim = g.dim();
    writeln!(w, "{}", if dim == 1 { "t,x,u" } else { "t,x,y,u" })?;
    for s in traj.snapshots() {
        for (i, u) in s.values().iter().enumerate() {
            let p = g.point(i);
            if dim == 1 {
                writeln!(w, "{:e},{:e},{:e}", s.time(), p[0], u)?;
            } else {
                writeln!(w, "{:e},{:e},{:e},{:e}", s.time(), p[0], p[1], u)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(traj: &FlowTrajectory, path: &Path) -> Result<()> {
    write_csv(traj, std::fs::File::create(path)?)
}

/// Reads a CSV written by [`write_csv`]. The grid is rebuilt from the node
/// coordinates of the first snapshot.
pub fn read_csv(r: impl Read) -> Result<FlowTrajectory> {
    let r = BufReader::new(r);
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    let dim = match header.trim() {
        "t,x,u" => 1,
        "t,x,y,u" => 2,
        h => return Err(Error::Format(format!("unexpected header {h:?}"))),
    };
    let mut rows: Vec<Vec<f64>> = vec![];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Format(format!("{e} in {line:?}")))?;
        if row.len() != dim + 2 {
            return Err(Error::Format(format!("expected {} columns in {line:?}", dim + 2)));
        }
        rows.push(row);
    }
    let t0 = rows.first().ok_or_else(|| Error::Format("no data rows".into()))?[0];
    let first: Vec<&Vec<f64>> = rows.iter().take_while(|r| r[0] == t0).collect();
    let mut xs: Vec<f64> = first.iter().map(|r| r[1]).collect();
    xs.dedup();
    let axes = if dim == 1 {
        vec![Axis::from_nodes(xs)?]
    } else {
        let nx = first.iter().take_while(|r| r[2] == first[0][2]).count();
        let xs: Vec<f64> = first[..nx].iter().map(|r| r[1]).collect();
        let ys: Vec<f64> = first.iter().step_by(nx.max(1)).map(|r| r[2]).collect();
        vec![Axis::from_nodes(xs)?, Axis::from_nodes(ys)?]
    };
    let grid = Grid::new(axes)?;
    let n = grid.len();
    if !rows.len().is_multiple_of(n) {
        return Err(Error::Format("row count is not a multiple of the grid size".into()));
    }
    let snapshots = rows
        .chunks(n)
        .map(|c| ScalarField::new(grid.clone(), c.iter().map(|r| r[dim + 1]).collect(), c[0][0]))
        .collect::<Result<Vec<_>>>()?;
    FlowTrajectory::from_snapshots(snapshots)
}

pub fn write_binary(traj: &FlowTrajectory, w: impl Write) -> Result<()> {
    let mut w = BufWriter::new(w);
    let g = traj.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u16).to_le_bytes())?;
    w.write_all(&(traj.snapshots().len() as u32).to_le_bytes())?;
    for ax in g.axes() {
        w.write_all(&(ax.len() as u32).to_le_bytes())?;
        w.write_all(&ax.lower().to_le_bytes())?;
        w.write_all(&ax.spacing().unwrap_or(0.0).to_le_bytes())?;
        if ax.spacing().is_none() {
            for x in ax.nodes() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    for s in traj.snapshots() {
        w.write_all(&s.time().to_le_bytes())?;
        for v in s.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary_file(traj: &FlowTrajectory, path: &Path) -> Result<()> {
    write_binary(traj, std::fs::File::create(path)?)
}

fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary(r: impl Read) -> Result<FlowTrajectory> {
    let mut r = BufReader::new(r);
    let mut magic = [0; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u16(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u16(&mut r)? as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let count = read_u32(&mut r)? as usize;
    let mut axes = Vec::with_capacity(dim);
    for _ in 0..dim {
        let n = read_u32(&mut r)? as usize;
        let lower = read_f64(&mut r)?;
        let h = read_f64(&mut r)?;
        axes.push(if h > 0.0 {
            Axis::uniform(lower, lower + (n - 1) as f64 * h, n)?
        } else {
            Axis::from_nodes((0..n).map(|_| read_f64(&mut r)).collect::<Result<_>>()?)?
        });
    }
    let grid = Grid::new(axes)?;
    let mut snapshots = Vec::with_capacity(count);
    for _ in 0..count {
        let t = read_f64(&mut r)?;
        let vals = (0..grid.len()).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        snapshots.push(ScalarField::new(grid.clone(), vals, t)?);
    }
    FlowTrajectory::from_snapshots(snapshots)
}

pub fn read_binary_file(path: &Path) -> Result<FlowTrajectory> {
    read_binary(std::fs::File::open(path)?)
}
