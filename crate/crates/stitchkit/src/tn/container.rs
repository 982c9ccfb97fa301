//! Flat binary tensor container: 8-byte magic, little-endian u32 header
//! length, JSON header (kind, shapes, bond dimensions, convention version),
//! then the complex entries as interleaved little-endian f64 pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::c64;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mpo::{Mpo, MpoTensor};
use super::mps::{Mps, SiteTensor};
use super::transfer::MpdoTensor;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"STKTNSR\x01";
const CONVENTION_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    convention: u32,
    /// per-tensor shapes; MPS `[left, 2, right]`, MPO `[left, 2, 2, right]`,
    /// MPDO `[2, 2, chi, chi]`
    shapes: Vec<Vec<usize>>,
    bond_dims: Vec<usize>,
}

fn write_container(path: &Path, header: &Header, payload: &[c64]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(MAGIC)?;
    let header_bytes = serde_json::to_vec(header)?;
    file.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    file.write_all(&header_bytes)?;
    for z in payload {
        file.write_all(&z.re.to_le_bytes())?;
        file.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_container(path: &Path, expected_kind: &str) -> Result<(Header, Vec<c64>)> {
    let mut file = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config(format!("{} is not a tensor container", path.display())));
    }
    let mut len_bytes = [0u8; 4];
    file.read_exact(&mut len_bytes)?;
    let mut header_bytes = vec![0u8; u32::from_le_bytes(len_bytes) as usize];
    file.read_exact(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)?;
    if header.kind != expected_kind {
        return Err(Error::Config(format!(
            "container holds a {} tensor, expected {expected_kind}",
            header.kind
        )));
    }
    if header.convention != CONVENTION_VERSION {
        return Err(Error::Config(format!(
            "unsupported convention version {}",
            header.convention
        )));
    }
    let expected: usize = header.shapes.iter().map(|s| s.iter().product::<usize>()).sum();
    let mut rest = Vec::new();
    file.read_to_end(&mut rest)?;
    if rest.len() != expected * 16 {
        return Err(Error::Config(format!(
            "payload holds {} bytes, expected {}",
            rest.len(),
            expected * 16
        )));
    }
    let payload = rest
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok((header, payload))
}

pub fn save_mps(path: impl AsRef<Path>, mps: &Mps) -> Result<()> {
    let header = Header {
        kind: "mps".into(),
        convention: CONVENTION_VERSION,
        shapes: mps.tensors().iter().map(|t| vec![t.left, 2, t.right]).collect(),
        bond_dims: mps.bond_dims(),
    };
    let payload: Vec<c64> = mps.tensors().iter().flat_map(|t| t.data.iter().copied()).collect();
    write_container(path.as_ref(), &header, &payload)
}

pub fn load_mps(path: impl AsRef<Path>) -> Result<Mps> {
    let (header, payload) = read_container(path.as_ref(), "mps")?;
    let mut tensors = Vec::new();
    let mut offset = 0usize;
    for shape in &header.shapes {
        if shape.len() != 3 || shape[1] != 2 {
            return Err(Error::Config("malformed MPS shape".into()));
        }
        let count = shape.iter().product::<usize>();
        tensors.push(SiteTensor {
            left: shape[0],
            right: shape[2],
            data: payload[offset..offset + count].to_vec(),
        });
        offset += count;
    }
    Mps::from_tensors(tensors)
}

pub fn save_mpo(path: impl AsRef<Path>, mpo: &Mpo) -> Result<()> {
    let header = Header {
        kind: "mpo".into(),
        convention: CONVENTION_VERSION,
        shapes: mpo.tensors().iter().map(|t| vec![t.left, 2, 2, t.right]).collect(),
        bond_dims: mpo.bond_dims(),
    };
    let payload: Vec<c64> = mpo.tensors().iter().flat_map(|t| t.data.iter().copied()).collect();
    write_container(path.as_ref(), &header, &payload)
}

pub fn load_mpo(path: impl AsRef<Path>) -> Result<Mpo> {
    let (header, payload) = read_container(path.as_ref(), "mpo")?;
    let mut tensors = Vec::new();
    let mut offset = 0usize;
    for shape in &header.shapes {
        if shape.len() != 4 || shape[1] != 2 || shape[2] != 2 {
            return Err(Error::Config("malformed MPO shape".into()));
        }
        let count = shape.iter().product::<usize>();
        tensors.push(MpoTensor {
            left: shape[0],
            right: shape[3],
            data: payload[offset..offset + count].to_vec(),
        });
        offset += count;
    }
    Mpo::from_tensors(tensors)
}

pub fn save_mpdo_tensor(path: impl AsRef<Path>, tensor: &MpdoTensor) -> Result<()> {
    let header = Header {
        kind: "mpdo".into(),
        convention: CONVENTION_VERSION,
        shapes: vec![vec![2, 2, tensor.chi, tensor.chi]],
        bond_dims: vec![tensor.chi],
    };
    write_container(path.as_ref(), &header, &tensor.data)
}

pub fn load_mpdo_tensor(path: impl AsRef<Path>) -> Result<MpdoTensor> {
    let (header, payload) = read_container(path.as_ref(), "mpdo")?;
    let shape = header
        .shapes
        .first()
        .ok_or_else(|| Error::Config("empty mpdo container".into()))?;
    if shape.len() != 4 || shape[0] != 2 || shape[1] != 2 || shape[2] != shape[3] {
        return Err(Error::Config("malformed MPDO shape".into()));
    }
    Ok(MpdoTensor { chi: shape[2], data: payload })
}
