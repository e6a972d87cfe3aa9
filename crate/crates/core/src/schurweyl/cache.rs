//! Binary cache of Schur transforms: a little-endian header
//! `(n, d, dim)` as u64, then `dim` index triples `(block, tableau, gl)`
//! as u32, then the `dim × dim` matrix row-major as (re, im) f64 pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::qcore::linalg::{c64, ComplexMatrix};

use super::transform::{SchurIndex, SchurTransform};

pub fn cache_path(dir: &Path, n: usize, d: usize) -> PathBuf {
    dir.join(format!("schur_n{n}_d{d}.bin"))
}

pub fn write(st: &SchurTransform, mut out: impl Write) -> Result<()> {
    let dim = st.dim();
    for v in [st.n(), st.d(), dim] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    for idx in st.index_map() {
        for v in [idx.block, idx.tableau, idx.gl] {
            out.write_all(&(v as u32).to_le_bytes())?;
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            let z = st.matrix()[(i, j)];
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read(mut input: impl Read) -> Result<SchurTransform> {
    let mut u64buf = [0u8; 8];
    let mut header = [0usize; 3];
    for h in header.iter_mut() {
        input.read_exact(&mut u64buf)?;
        *h = u64::from_le_bytes(u64buf) as usize;
    }
    let [n, d, dim] = header;
    let expected = d.checked_pow(n as u32);
    if expected != Some(dim) {
        return Err(Error::Parse { line: 0, message: format!("header dim {dim} ≠ {d}^{n}") });
    }
    crate::qcore::check_capacity(dim.saturating_mul(dim))?;
    let mut u32buf = [0u8; 4];
    let mut next_u32 = |input: &mut dyn Read| -> Result<usize> {
        input.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf) as usize)
    };
    let mut index_map = Vec::with_capacity(dim);
    for _ in 0..dim {
        let block = next_u32(&mut input)?;
        let tableau = next_u32(&mut input)?;
        let gl = next_u32(&mut input)?;
        index_map.push(SchurIndex { block, tableau, gl });
    }
    let mut matrix = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            input.read_exact(&mut u64buf)?;
            let re = f64::from_le_bytes(u64buf);
            input.read_exact(&mut u64buf)?;
            let im = f64::from_le_bytes(u64buf);
            matrix[(i, j)] = c64(re, im);
        }
    }
    SchurTransform::from_parts(n, d, matrix, index_map)
}

/// Loads `(n, d)` from `dir`, building and storing it on a miss.
pub fn load_or_build(dir: &Path, n: usize, d: usize) -> Result<SchurTransform> {
    let path = cache_path(dir, n, d);
    if let Ok(file) = fs::File::open(&path) {
        return read(std::io::BufReader::new(file));
    }
    let st = SchurTransform::build(n, d)?;
    fs::create_dir_all(dir)?;
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    write(&st, &mut w)?;
    w.flush()?;
    Ok(st)
}
