//! Batch files: length-prefixed JSON header (region, M, scheme, seed), then
//! the outcome bits packed 8 per byte, then the distinct unitaries as four
//! complex numbers per site.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MeasurementBatch, Scheme, ShadowRecord};
use crate::dense::Interval;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"STKBATCH";

#[derive(Serialize, Deserialize)]
struct BatchHeader {
    region: Interval,
    m: usize,
    scheme: Scheme,
    seed: u64,
}

pub fn save_batch(path: impl AsRef<Path>, batch: &MeasurementBatch) -> Result<()> {
    let mut file = BufWriter::new(File::create(path.as_ref())?);
    file.write_all(MAGIC)?;
    let header = BatchHeader {
        region: batch.region,
        m: batch.len(),
        scheme: batch.scheme,
        seed: batch.seed,
    };
    let header_bytes = serde_json::to_vec(&header)?;
    file.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    file.write_all(&header_bytes)?;

    // outcomes, packed little-endian within each byte
    let sites = batch.region.len;
    let total_bits = batch.len() * sites;
    let mut packed = vec![0u8; total_bits.div_ceil(8)];
    for (r, record) in batch.records.iter().enumerate() {
        for (j, &bit) in record.outcome.iter().enumerate() {
            let pos = r * sites + j;
            packed[pos / 8] |= bit << (pos % 8);
        }
    }
    file.write_all(&packed)?;

    // one unitary set per distinct-unitary group
    let group_size = match batch.scheme {
        Scheme::Shadow => 1,
        Scheme::Reuse { n_m, .. } => n_m,
    };
    for (r, record) in batch.records.iter().enumerate() {
        if r % group_size != 0 {
            continue;
        }
        for u in &record.unitaries {
            for i in 0..2 {
                for j in 0..2 {
                    let z = u[(i, j)];
                    file.write_all(&z.re.to_le_bytes())?;
                    file.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn load_batch(path: impl AsRef<Path>) -> Result<MeasurementBatch> {
    let mut file = BufReader::new(File::open(path.as_ref())?);
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config(format!(
            "{} is not a measurement batch",
            path.as_ref().display()
        )));
    }
    let mut len_bytes = [0u8; 4];
    file.read_exact(&mut len_bytes)?;
    let mut header_bytes = vec![0u8; u32::from_le_bytes(len_bytes) as usize];
    file.read_exact(&mut header_bytes)?;
    let header: BatchHeader = serde_json::from_slice(&header_bytes)?;

    let sites = header.region.len;
    let total_bits = header.m * sites;
    let mut packed = vec![0u8; total_bits.div_ceil(8)];
    file.read_exact(&mut packed)?;

    let group_size = match header.scheme {
        Scheme::Shadow => 1,
        Scheme::Reuse { n_m, .. } => n_m,
    };
    let groups = header.m.div_ceil(group_size);
    let mut unitary_bytes = vec![0u8; groups * sites * 4 * 16];
    file.read_exact(&mut unitary_bytes)?;
    let mut values = unitary_bytes.chunks_exact(8).map(|c| {
        f64::from_le_bytes(c.try_into().unwrap())
    });
    let mut group_unitaries: Vec<Vec<Mat<Complex64>>> = Vec::with_capacity(groups);
    for _ in 0..groups {
        let mut us = Vec::with_capacity(sites);
        for _ in 0..sites {
            let mut u = Mat::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    let re = values.next().ok_or_else(|| Error::Config("truncated batch".into()))?;
                    let im = values.next().ok_or_else(|| Error::Config("truncated batch".into()))?;
                    u[(i, j)] = Complex64::new(re, im);
                }
            }
            us.push(u);
        }
        group_unitaries.push(us);
    }

    let records = (0..header.m)
        .map(|r| {
            let outcome = (0..sites)
                .map(|j| {
                    let pos = r * sites + j;
                    (packed[pos / 8] >> (pos % 8)) & 1
                })
                .collect();
            ShadowRecord {
                round: r,
                unitaries: group_unitaries[r / group_size].clone(),
                outcome,
            }
        })
        .collect();
    Ok(MeasurementBatch {
        region: header.region,
        scheme: header.scheme,
        seed: header.seed,
        records,
    })
}
