//! `GFLD` debug dump: a 32-byte little-endian header
//! `{magic "GFLD", nx: u32, ny: u32, reserved: u32, dx: f64, dy: f64}`
//! followed by `nx·ny` f64 values in row-major order (x index outermost).

use std::io::{self, Read, Write};

use ndarray::Array2;

use super::field::FieldSample;

pub const MAGIC: &[u8; 4] = b"GFLD";
pub const HEADER_LEN: usize = 32;

pub fn write_gfld<W: Write>(sample: &FieldSample, mut out: W) -> io::Result<()> {
    let dim = |n: usize| u32::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "dimension too large"));
    out.write_all(MAGIC)?;
    out.write_all(&dim(sample.nx)?.to_le_bytes())?;
    out.write_all(&dim(sample.ny)?.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    out.write_all(&sample.dx.to_le_bytes())?;
    out.write_all(&sample.dy.to_le_bytes())?;
    for v in sample.values.iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a dump back; `seed` and `common_shift` are not stored and come back as 0.
pub fn read_gfld<R: Read>(mut input: R) -> io::Result<FieldSample> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "missing GFLD magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let (nx, ny) = (u32_at(4), u32_at(8));
    let (dx, dy) = (f64_at(16), f64_at(24));
    let mut raw = vec![0u8; nx * ny * 8];
    input.read_exact(&mut raw)?;
    let values: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let values = Array2::from_shape_vec((nx, ny), values).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    Ok(FieldSample { values, dx, dy, nx, ny, seed: 0, common_shift: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldsim::simulate_field;
    use crate::model::{CovarianceModel, Horizon};

    #[test]
    fn header_layout_and_round_trip() {
        let m = CovarianceModel::new(1.0, 1.0, 0.0).unwrap();
        let s = simulate_field(&m, &Horizon::new(2.0, 1.0).unwrap(), 0.5, 0.25, 1).unwrap();
        let mut buf = Vec::new();
        write_gfld(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 8 * s.nx * s.ny);
        assert_eq!(&buf[..4], b"GFLD");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 5);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 0.5);
        let back = read_gfld(&buf[..]).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!((back.dx, back.dy), (0.5, 0.25));
        assert!(read_gfld(&b"NOPE"[..]).is_err());
    }
}
