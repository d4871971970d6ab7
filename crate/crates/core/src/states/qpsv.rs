//! QPSV state-vector files.
//!
//! Layout, all little endian:
//!
//! ```text
//! b"QPSV" | version: u32 = 1 | local_dim: u8 | n_sites: u16 | dims: u16 × d | (re: f64, im: f64) × ν^N
//! ```
//!
//! The number of dims `d` is not stored; it is whatever is left between the
//! fixed header and the amplitude block, which has a known size.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{pow, PureState};
use crate::error::{Error, Result};
use crate::lattice::Window;

pub const MAGIC: &[u8; 4] = b"QPSV";
pub const VERSION: u32 = 1;
const FIXED_HEADER: usize = 4 + 4 + 1 + 2;

pub fn encode(psi: &PureState) -> Vec<u8> {
    let w = psi.window();
    let mut out = Vec::with_capacity(FIXED_HEADER + 2 * w.dimension() + 16 * psi.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(psi.local_dim() as u8);
    out.extend_from_slice(&(w.site_count() as u16).to_le_bytes());
    for &d in w.dims() {
        out.extend_from_slice(&(d as u16).to_le_bytes());
    }
    for z in psi.amplitudes() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<PureState> {
    if bytes.len() < FIXED_HEADER || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing QPSV magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let nu = bytes[8] as usize;
    let n_sites = u16::from_le_bytes([bytes[9], bytes[10]]) as usize;
    if !(2..=4).contains(&nu) {
        return Err(Error::Format(format!("local dimension {nu} out of range")));
    }
    if n_sites == 0 || n_sites > crate::lattice::MAX_STATE_SITES {
        return Err(Error::Format(format!("site count {n_sites} out of range")));
    }
    let amp_bytes = 16 * pow(nu, n_sites);
    let dim_bytes =
        bytes.len().checked_sub(FIXED_HEADER + amp_bytes).ok_or_else(|| Error::Format("file is truncated".into()))?;
    if dim_bytes % 2 != 0 || dim_bytes == 0 || dim_bytes > 6 {
        return Err(Error::Format(format!("cannot infer window dims from {dim_bytes} header bytes")));
    }
    let dims: Vec<usize> = bytes[FIXED_HEADER..FIXED_HEADER + dim_bytes]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]) as usize)
        .collect();
    let window = Window::new(&dims).map_err(|e| Error::Format(format!("bad dims {dims:?}: {e}")))?;
    if window.site_count() != n_sites {
        return Err(Error::Format(format!("dims {dims:?} do not multiply to {n_sites} sites")));
    }
    let amplitudes = bytes[FIXED_HEADER + dim_bytes..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    PureState::new(&window, nu, amplitudes).map_err(|e| Error::Format(e.to_string()))
}

pub fn write(path: &Path, psi: &PureState) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(psi))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<PureState> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let w = Window::new(&[1, 2]).unwrap();
        let psi = PureState::from_real(&w, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let bytes = encode(&psi);
        assert_eq!(&bytes[..4], b"QPSV");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(bytes[8], 2);
        assert_eq!(&bytes[9..11], &[2, 0]);
        assert_eq!(&bytes[11..15], &[1, 0, 2, 0]);
        assert_eq!(&bytes[15..23], &1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 15 + 4 * 16);
    }

    #[test]
    fn rejects_corruption() {
        let psi = generators::ghz(&Window::chain(3).unwrap());
        let bytes = encode(&psi);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode(&bad).is_err());
        let mut bad = bytes;
        let last = bad.len() - 9;
        bad[last] ^= 0x40; // perturb a real part so the norm breaks
        assert!(decode(&bad).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.qpsv");
        let psi = generators::random_state(&Window::new(&[2, 3]).unwrap(), 2, 3);
        write(&path, &psi).unwrap();
        assert_eq!(read(&path).unwrap(), psi);
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(dims in prop::sample::select(vec![vec![3], vec![2, 2], vec![1, 2, 2], vec![5]]),
                                  nu in 2usize..=3, seed in 0u64..1000) {
            let w = Window::new(&dims).unwrap();
            let psi = generators::random_state(&w, nu, seed);
            let back = decode(&encode(&psi)).unwrap();
            prop_assert_eq!(back.window().dims(), w.dims());
            prop_assert!(back.amplitudes().iter().zip(psi.amplitudes()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        }
    }
}
