//! "KPPG" snapshot container.
//!
//! Little-endian layout: magic `KPPG`, `u32` version (1), `u32` payload code
//! (1 = f64 field, 2 = bitmask), `u32` N, `u64 × N` dims, `f64 × N` spacing,
//! `f64 × N` origin (center of the first cell), `f64` time, then the row-major
//! payload. Bitmasks are packed LSB-first and padded to whole bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{GridField, SolverError};
use crate::geometry::GridMask;
use crate::lattice::Lattice;
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"KPPG";
pub const VERSION: u32 = 1;
pub const PAYLOAD_FIELD: u32 = 1;
pub const PAYLOAD_MASK: u32 = 2;

/// Decoded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Field(GridField<f64>),
    Mask { mask: GridMask, time: f64 },
}

fn write_header<W: Write>(w: &mut W, code: u32, lattice: &Lattice, time: f64) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u32::<LE>(code)?;
    w.write_u32::<LE>(lattice.dim() as u32)?;
    for &d in lattice.dims() {
        w.write_u64::<LE>(d as u64)?;
    }
    for &h in lattice.spacing() {
        w.write_f64::<LE>(h)?;
    }
    for o in lattice.origin() {
        w.write_f64::<LE>(o)?;
    }
    w.write_f64::<LE>(time)
}

/// Writes a field; values are widened to f64.
pub fn write_field<W: Write, T: Real>(w: &mut W, field: &GridField<T>) -> std::io::Result<()> {
    write_header(w, PAYLOAD_FIELD, field.lattice(), field.time())?;
    for v in field.values() {
        w.write_f64::<LE>(v.as_f64())?;
    }
    Ok(())
}

pub fn write_mask<W: Write>(w: &mut W, mask: &GridMask, time: f64) -> std::io::Result<()> {
    write_header(w, PAYLOAD_MASK, mask.lattice(), time)?;
    w.write_all(&mask.packed())
}

fn bad(msg: impl Into<String>) -> SolverError {
    SolverError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into()))
}

pub fn read<R: Read>(r: &mut R) -> Result<Snapshot, SolverError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a KPPG file"));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(bad(format!("unsupported KPPG version {version}")));
    }
    let code = r.read_u32::<LE>()?;
    let n = r.read_u32::<LE>()? as usize;
    if !(1..=3).contains(&n) {
        return Err(bad(format!("unsupported dimension {n}")));
    }
    let dims = (0..n).map(|_| r.read_u64::<LE>().map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
    let spacing = (0..n).map(|_| r.read_f64::<LE>()).collect::<Result<Vec<_>, _>>()?;
    let origin = (0..n).map(|_| r.read_f64::<LE>()).collect::<Result<Vec<_>, _>>()?;
    let time = r.read_f64::<LE>()?;
    let lattice = Lattice::from_origin(dims, spacing, origin)?;
    match code {
        PAYLOAD_FIELD => {
            let mut values = vec![0.0; lattice.len()];
            r.read_f64_into::<LE>(&mut values)?;
            Ok(Snapshot::Field(GridField::new(lattice, time, values)?))
        }
        PAYLOAD_MASK => {
            let mut bytes = vec![0u8; lattice.len().div_ceil(8)];
            r.read_exact(&mut bytes)?;
            Ok(Snapshot::Mask { mask: GridMask::from_packed(lattice, &bytes)?, time })
        }
        other => Err(bad(format!("unknown payload code {other}"))),
    }
}

pub fn save_field<T: Real>(path: &Path, field: &GridField<T>) -> Result<(), SolverError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn save_mask(path: &Path, mask: &GridMask, time: f64) -> Result<(), SolverError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mask(&mut w, mask, time)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Snapshot, SolverError> {
    read(&mut BufReader::new(File::open(path)?))
}

pub fn load_field(path: &Path) -> Result<GridField<f64>, SolverError> {
    match load(path)? {
        Snapshot::Field(f) => Ok(f),
        Snapshot::Mask { .. } => Err(bad(format!("{} holds a mask, expected a field", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let l = Lattice::from_origin(vec![2, 3], vec![0.5, 0.25], vec![1.0, -1.0]).unwrap();
        let f = GridField::new(l, 2.5, vec![0.0, 0.1, 0.2, 0.3, 0.4, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[0..4], b"KPPG");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 2);
        assert_eq!(buf.len(), 16 + 16 + 16 + 16 + 8 + 6 * 8);
        let back = read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, Snapshot::Field(f));
    }

    #[test]
    fn mask_payload_is_bit_packed() {
        let l = Lattice::new(vec![10], vec![1.0], vec![0.0]).unwrap();
        let bits = (0..10).map(|i| i % 3 == 0).collect();
        let m = GridMask::new(l, bits).unwrap();
        let mut buf = Vec::new();
        write_mask(&mut buf, &m, 0.0).unwrap();
        assert_eq!(buf.len(), 16 + 8 + 8 + 8 + 8 + 2);
        assert_eq!(buf[buf.len() - 2], 0b0100_1001);
        assert_eq!(buf[buf.len() - 1], 0b0000_0010);
        match read(&mut buf.as_slice()).unwrap() {
            Snapshot::Mask { mask, .. } => assert_eq!(mask, m),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read(&mut b"NOPE\x01\x00\x00\x00".as_slice()).is_err());
    }
}
