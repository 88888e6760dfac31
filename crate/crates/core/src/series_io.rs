//! On-disk layouts for [`NoiseTimeSeries`].
//!
//! CSV: header `index,time_s,current`, one row per sample.
//!
//! Binary (all little-endian):
//!
//! | offset | type      | content          |
//! |--------|-----------|------------------|
//! | 0      | `[u8; 4]` | magic `QNTS`     |
//! | 4      | `u32`     | version (1)      |
//! | 8      | `f64`     | sample rate, Hz  |
//! | 16     | `u64`     | sample count `n` |
//! | 24     | `f64 * n` | samples          |

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::sampler::NoiseTimeSeries;

pub const MAGIC: &[u8; 4] = b"QNTS";
pub const VERSION: u32 = 1;

pub fn write_csv<W: Write>(series: &NoiseTimeSeries, mut out: W) -> Result<()> {
    writeln!(out, "index,time_s,current")?;
    for (i, v) in series.samples.iter().enumerate() {
        writeln!(out, "{},{:e},{:e}", i, series.time(i), v)?;
    }
    Ok(())
}

/// Reads a CSV written by [`write_csv`]. The sample rate is recovered from
/// the first two timestamps (a single-row file needs `fallback_rate`).
pub fn read_csv<R: BufRead>(input: R, fallback_rate: f64) -> Result<NoiseTimeSeries> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "index,time_s,current" {
        return Err(Error::Format(format!("unexpected CSV header {header:?}")));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!("row {row}: expected 3 fields")));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {row}: {e}")))
        };
        times.push(parse(fields[1])?);
        samples.push(parse(fields[2])?);
    }
    let sample_rate = if times.len() >= 2 {
        1.0 / (times[1] - times[0])
    } else {
        fallback_rate
    };
    Ok(NoiseTimeSeries::new(samples, sample_rate, 0, "csv"))
}

pub fn write_binary<W: Write>(series: &NoiseTimeSeries, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&series.sample_rate.to_le_bytes())?;
    out.write_all(&(series.samples.len() as u64).to_le_bytes())?;
    for v in &series.samples {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<NoiseTimeSeries> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let sample_rate = f64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut samples = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        input.read_exact(&mut b8)?;
        samples.push(f64::from_le_bytes(b8));
    }
    Ok(NoiseTimeSeries::new(samples, sample_rate, 0, "binary"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_header_layout() {
        let s = NoiseTimeSeries::new(vec![1.5, -2.0], 8.0, 0, "t");
        let mut buf = Vec::new();
        write_binary(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16);
        assert_eq!(&buf[0..4], b"QNTS");
        assert_eq!(&buf[4..8], &[1, 0, 0, 0]);
        assert_eq!(&buf[8..16], &8.0f64.to_le_bytes());
        assert_eq!(&buf[16..24], &2u64.to_le_bytes());
        assert_eq!(&buf[24..32], &1.5f64.to_le_bytes());
    }

    #[test]
    fn binary_rejects_bad_magic() {
        let buf = b"QNTX\x01\x00\x00\x00".to_vec();
        assert!(matches!(read_binary(&buf[..]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let text = "i,t,v\n0,0,1\n";
        assert!(read_csv(text.as_bytes(), 1.0).is_err());
    }
}
