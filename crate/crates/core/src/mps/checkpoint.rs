//! Binary snapshot of a [`TimeBinMps`].
//!
//! Layout (all little-endian): the 8-byte magic, a u32 format version, the
//! chain metadata, then for each site its (left, phys, right) dimensions as
//! u64 followed by the row-major tensor as (re, im) f64 pairs.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::tensor::SiteTensor;
use super::{BinLayout, Channels, TimeBinMps};
use crate::error::{Error, Result};
use crate::model::TimeGrid;

const MAGIC: &[u8; 8] = b"WGQEDMPS";
const VERSION: u32 = 1;
// refuse absurd headers instead of allocating them
const MAX_ELEMENTS: u64 = 1 << 28;

fn io(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

pub fn write_checkpoint(state: &TimeBinMps, mut w: impl Write) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let channels: u32 = match state.layout.channels {
        Channels::Right => 1,
        Channels::Both => 2,
    };
    buf.extend_from_slice(&channels.to_le_bytes());
    buf.extend_from_slice(&(state.layout.cap as u32).to_le_bytes());
    buf.extend_from_slice(&state.photons.to_le_bytes());
    buf.extend_from_slice(&state.grid.dt().to_le_bytes());
    for v in [state.grid.n_steps(), state.sites.len(), state.emitter, state.oc] {
        buf.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for s in &state.sites {
        for v in [s.dl, s.d, s.dr] {
            buf.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for c in &s.data {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(io)
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(io)?;
        Ok(b)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        if v > MAX_ELEMENTS {
            return Err(Error::Checkpoint(format!("implausible size field {v}")));
        }
        Ok(v as usize)
    }
}

pub fn read_checkpoint(r: impl Read) -> Result<TimeBinMps> {
    let mut r = Reader { inner: r };
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let channels = match r.u32()? {
        1 => Channels::Right,
        2 => Channels::Both,
        c => return Err(Error::Checkpoint(format!("bad channel count {c}"))),
    };
    let cap = r.u32()? as usize;
    let photons = r.u32()?;
    let dt = r.f64()?;
    let n_steps = r.usize()?;
    let n_sites = r.usize()?;
    let emitter = r.usize()?;
    let oc = r.usize()?;
    let grid = TimeGrid::new(dt, n_steps).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if n_sites != n_steps + 1 || emitter >= n_sites || oc >= n_sites {
        return Err(Error::Checkpoint("inconsistent chain metadata".into()));
    }
    let layout = BinLayout { channels, cap };
    let mut sites = Vec::with_capacity(n_sites);
    let mut prev_dr = 1;
    for i in 0..n_sites {
        let (dl, d, dr) = (r.usize()?, r.usize()?, r.usize()?);
        let expected_d = if i == emitter { 2 } else { layout.dim() };
        if dl != prev_dr || d != expected_d || (dl as u64) * (d as u64) * (dr as u64) > MAX_ELEMENTS {
            return Err(Error::Checkpoint(format!("site {i}: bad dimensions ({dl}, {d}, {dr})")));
        }
        let mut t = SiteTensor::zeros(dl, d, dr);
        for c in t.data.iter_mut() {
            *c = C64::new(r.f64()?, r.f64()?);
        }
        prev_dr = dr;
        sites.push(t);
    }
    if prev_dr != 1 {
        return Err(Error::Checkpoint("open right boundary".into()));
    }
    Ok(TimeBinMps { sites, emitter, oc, layout, grid, photons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PulseSpec;

    #[test]
    fn round_trip() {
        let pulse = PulseSpec::gaussian(1.0, 0.3, 2).unwrap();
        let grid = TimeGrid::new(0.1, 25).unwrap();
        let mps = TimeBinMps::build_input(&pulse, &grid, Channels::Both).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mps, &mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(back, mps);
    }

    #[test]
    fn rejects_corruption() {
        let pulse = PulseSpec::rect(1.0, 1).unwrap();
        let grid = TimeGrid::new(0.25, 4).unwrap();
        let mps = TimeBinMps::build_input(&pulse, &grid, Channels::Right).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mps, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_checkpoint(bad.as_slice()).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(read_checkpoint(bad.as_slice()).is_err());
        assert!(read_checkpoint(&bytes[..bytes.len() - 3]).is_err());
    }
}
