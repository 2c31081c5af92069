use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::matched::RangeDopplerMap;
use crate::error::{Error, Result};

pub const DUMP_FORMAT: &str = "f32le-magnitude-row-major";

/// Text header stored next to a binary map dump as `<name>.hdr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapHeader {
    pub format: String,
    pub scenario: String,
    pub doppler_bins: usize,
    pub range_bins: usize,
    pub zero_doppler_row: usize,
    pub gate_start_sample: usize,
    pub meters_per_range_bin: f64,
    pub hz_per_doppler_bin: f64,
}

pub fn header_path(bin: &Path) -> PathBuf {
    bin.with_extension("hdr")
}

/// Writes `|X|` as little-endian f32, row-major (Doppler rows of range bins),
/// plus its header.
pub fn write_map_dump(map: &RangeDopplerMap, scenario: &str, bin: &Path) -> Result<MapHeader> {
    let header = MapHeader {
        format: DUMP_FORMAT.into(),
        scenario: scenario.into(),
        doppler_bins: map.rows(),
        range_bins: map.cols(),
        zero_doppler_row: map.rows() / 2,
        gate_start_sample: map.gate_start,
        meters_per_range_bin: map.meters_per_range_bin,
        hz_per_doppler_bin: map.hz_per_doppler_bin,
    };
    let mut bytes = Vec::with_capacity(map.power().len() * 4);
    for p in map.power() {
        bytes.extend_from_slice(&(p.sqrt() as f32).to_le_bytes());
    }
    let text = toml::to_string(&header).map_err(|e| Error::Config(e.to_string()))?;
    let hdr = header_path(bin);
    fs::write(&hdr, text).map_err(|e| Error::io(&hdr, e))?;
    fs::write(bin, bytes).map_err(|e| Error::io(bin, e))?;
    Ok(header)
}

pub fn read_map_dump(bin: &Path) -> Result<(MapHeader, Vec<f32>)> {
    let hdr = header_path(bin);
    let text = fs::read_to_string(&hdr).map_err(|e| Error::io(&hdr, e))?;
    let header: MapHeader = toml::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    if header.format != DUMP_FORMAT {
        return Err(Error::Schema(format!("unknown dump format {}", header.format)));
    }
    let bytes = fs::read(bin).map_err(|e| Error::io(bin, e))?;
    if bytes.len() != header.doppler_bins * header.range_bins * 4 {
        return Err(Error::Schema(format!(
            "{} bytes for a {}x{} map",
            bytes.len(),
            header.doppler_bins,
            header.range_bins
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok((header, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalchain::{range_doppler, CpiConfig, RangeProfiles};
    use num_complex::Complex64;

    #[test]
    fn round_trip() {
        let cfg = CpiConfig::default();
        let (rows, cols) = (8, 5);
        let data = (0..rows * cols).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let map = range_doppler(&RangeProfiles { rows, cols, gate_start: 100, data }, &cfg);
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("map.bin");
        let written = write_map_dump(&map, "coexistence", &bin).unwrap();
        let (header, mags) = read_map_dump(&bin).unwrap();
        assert_eq!(header, written);
        assert_eq!((header.doppler_bins, header.range_bins, header.gate_start_sample), (8, 5, 100));
        assert_eq!(mags.len(), 40);
        for (i, m) in mags.iter().enumerate() {
            assert!((*m as f64 - map.power()[i].sqrt()).abs() < 1e-4 * (1.0 + *m as f64));
        }
        let text = fs::read_to_string(header_path(&bin)).unwrap();
        assert!(text.contains("scenario = \"coexistence\""));
    }

    #[test]
    fn truncated_body_rejected() {
        let cfg = CpiConfig::default();
        let data = vec![Complex64::new(1.0, 0.0); 4];
        let map = range_doppler(&RangeProfiles { rows: 2, cols: 2, gate_start: 0, data }, &cfg);
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("m.bin");
        write_map_dump(&map, "static", &bin).unwrap();
        fs::write(&bin, [0u8; 6]).unwrap();
        assert!(matches!(read_map_dump(&bin), Err(Error::Schema(_))));
    }
}
