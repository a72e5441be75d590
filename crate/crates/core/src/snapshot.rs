//! Binary snapshots of pairs.
//!
//! Layout, little-endian: magic `YMH1`, `u32` version, `u8` n, `n × u32` dims,
//! `n × f64` lengths, one `i32` flux entry per coordinate plane, `f64` ε, then
//! `u` as `(re, im)` per site and `α` as `n` values per site.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::functional::PairState;
use crate::lattice::{make_grid, FormField, ScalarField};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"YMH1";
const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(pair: &PairState, mut w: W) -> Result<()> {
    let g = pair.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[g.n() as u8])?;
    for &d in g.dims() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for &l in g.lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    for &m in g.flux() {
        let m = i32::try_from(m).map_err(|_| Error::Snapshot(format!("flux {m} does not fit in i32")))?;
        w.write_all(&m.to_le_bytes())?;
    }
    w.write_all(&pair.eps.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * g.num_sites() + 8 * g.num_cells(1));
    for z in pair.u.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    for a in pair.alpha.values() {
        buf.extend_from_slice(&a.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<PairState> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("unknown magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = read_array::<1, _>(&mut r)?[0] as usize;
    if n != 2 && n != 3 {
        return Err(Error::Snapshot(format!("dimension {n} is not 2 or 3")));
    }
    let dims = (0..n)
        .map(|_| Ok(u32::from_le_bytes(read_array(&mut r)?) as usize))
        .collect::<Result<Vec<_>>>()?;
    let lengths = (0..n)
        .map(|_| Ok(f64::from_le_bytes(read_array(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    let np = if n == 2 { 1 } else { 3 };
    let flux = (0..np)
        .map(|_| Ok(i32::from_le_bytes(read_array(&mut r)?) as i64))
        .collect::<Result<Vec<_>>>()?;
    let eps = f64::from_le_bytes(read_array(&mut r)?);
    let (grid, bg) = make_grid(n, &dims, &lengths, &flux)?;
    let mut u = Vec::with_capacity(grid.num_sites());
    for _ in 0..grid.num_sites() {
        let re = f64::from_le_bytes(read_array(&mut r)?);
        let im = f64::from_le_bytes(read_array(&mut r)?);
        u.push(Complex64::new(re, im));
    }
    let alpha = (0..grid.num_cells(1))
        .map(|_| Ok(f64::from_le_bytes(read_array(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    PairState::new(
        ScalarField::from_values(&grid, u)?,
        FormField::from_values(&grid, 1, alpha)?,
        bg,
        eps,
    )
}
