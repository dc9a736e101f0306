//! Binary serialization for trained models and training datasets.
//!
//! Both formats are little-endian with a 4-byte magic and a format version.
//! Model files carry an architecture header, row-major f64 weight blocks per
//! stream, and the fixed-point LUT blobs the hardware pipeline uses, so a
//! file fully describes the deployed predictor.  Dataset files pack labels
//! as f32 (the dataset is ~690 MB at full size; f64 would double that for
//! precision the labels do not carry).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::Error;

use super::dataset::{Scenario, TrainingDataset};
use super::quant::{SigmoidLut, ThresholdLut};
use super::{Activation, AnnModel, StreamNet};

pub const MODEL_MAGIC: [u8; 4] = *b"TNMD";
pub const DATASET_MAGIC: [u8; 4] = *b"TNDS";
pub const FORMAT_VERSION: u32 = 1;

fn bad(kind: &'static str, detail: impl ToString) -> Error {
    Error::Format { kind, detail: detail.to_string() }
}

fn write_u32(w: &mut impl Write, v: u32) -> Result<(), Error> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read, kind: &'static str) -> Result<u32, Error> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| bad(kind, format!("truncated header: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

fn write_matrix(w: &mut impl Write, m: &DMatrix<f64>) -> Result<(), Error> {
    let mut buf = Vec::with_capacity(m.len() * 8);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            buf.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_matrix(
    r: &mut impl Read,
    rows: usize,
    cols: usize,
    kind: &'static str,
) -> Result<DMatrix<f64>, Error> {
    let mut buf = vec![0u8; rows * cols * 8];
    r.read_exact(&mut buf).map_err(|e| bad(kind, format!("truncated weight block: {e}")))?;
    let vals: Vec<f64> =
        buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    // the block is row-major on disk; from_fn traverses column-major
    Ok(DMatrix::from_fn(rows, cols, |r, c| vals[r * cols + c]))
}

fn write_stream(w: &mut impl Write, net: &StreamNet) -> Result<(), Error> {
    write_u32(w, net.inputs() as u32)?;
    write_u32(w, net.hidden() as u32)?;
    write_u32(w, net.outputs() as u32)?;
    w.write_all(&[match net.activation {
        Activation::Sigmoid => 0u8,
        Activation::Identity => 1,
    }])?;
    write_matrix(w, &net.w1)?;
    write_matrix(w, &net.w2)
}

fn read_stream(r: &mut impl Read) -> Result<StreamNet, Error> {
    const KIND: &str = "model";
    let inputs = read_u32(r, KIND)? as usize;
    let hidden = read_u32(r, KIND)? as usize;
    let outputs = read_u32(r, KIND)? as usize;
    if inputs == 0 || hidden == 0 || outputs == 0 {
        return Err(bad(KIND, "architecture header contains a zero dimension"));
    }
    let mut act = [0u8; 1];
    r.read_exact(&mut act).map_err(|e| bad(KIND, format!("truncated header: {e}")))?;
    let activation = match act[0] {
        0 => Activation::Sigmoid,
        1 => Activation::Identity,
        other => return Err(bad(KIND, format!("unknown activation tag {other}"))),
    };
    let w1 = read_matrix(r, hidden, inputs + 1, KIND)?;
    let w2 = read_matrix(r, outputs, hidden + 1, KIND)?;
    Ok(StreamNet { w1, w2, activation })
}

/// Write a trained model: magic, version, three stream blocks, then the
/// activation and threshold LUT blobs of the quantized pipeline.
pub fn save_model(path: &Path, model: &AnnModel) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MODEL_MAGIC)?;
    write_u32(&mut w, FORMAT_VERSION)?;
    for stream in model.streams() {
        write_stream(&mut w, stream)?;
    }
    let sigmoid = SigmoidLut::build();
    write_u32(&mut w, sigmoid.size_bytes() as u32)?;
    w.write_all(sigmoid.entries())?;
    let threshold = ThresholdLut::default();
    write_u32(&mut w, threshold.size_bytes() as u32)?;
    for bank in &threshold.banks {
        w.write_all(bank)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<AnnModel, Error> {
    const KIND: &str = "model";
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| bad(KIND, format!("truncated magic: {e}")))?;
    if magic != MODEL_MAGIC {
        return Err(bad(KIND, format!("bad magic {magic:02x?}")));
    }
    let version = read_u32(&mut r, KIND)?;
    if version != FORMAT_VERSION {
        return Err(bad(KIND, format!("unsupported version {version}, expected {FORMAT_VERSION}")));
    }
    let cores = read_stream(&mut r)?;
    let switches = read_stream(&mut r)?;
    let links = read_stream(&mut r)?;

    // LUT blobs are derived data; validate their sizes so a truncated or
    // foreign file is rejected, then drop them (they are rebuilt on demand)
    for expected in [SigmoidLut::build().size_bytes(), ThresholdLut::default().size_bytes()] {
        let len = read_u32(&mut r, KIND)? as usize;
        if len != expected {
            return Err(bad(KIND, format!("LUT blob length {len}, expected {expected}")));
        }
        let mut blob = vec![0u8; len];
        r.read_exact(&mut blob).map_err(|e| bad(KIND, format!("truncated LUT blob: {e}")))?;
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(bad(KIND, "trailing bytes after the threshold LUT"));
    }
    Ok(AnnModel { cores, switches, links })
}

/// Write a dataset: magic, version, counts, then per scenario the f64
/// utilization vector followed by the f32 ΔT trajectory (steps × components,
/// row-major by step).
pub fn save_dataset(path: &Path, data: &TrainingDataset) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&DATASET_MAGIC)?;
    write_u32(&mut w, FORMAT_VERSION)?;
    write_u32(&mut w, data.scenarios.len() as u32)?;
    write_u32(&mut w, data.steps as u32)?;
    write_u32(&mut w, data.components as u32)?;
    for scen in &data.scenarios {
        let mut buf = Vec::with_capacity(scen.u.len() * 8 + scen.delta.len() * 4);
        for &u in &scen.u {
            buf.extend_from_slice(&u.to_le_bytes());
        }
        for &d in &scen.delta {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<TrainingDataset, Error> {
    const KIND: &str = "dataset";
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| bad(KIND, format!("truncated magic: {e}")))?;
    if magic != DATASET_MAGIC {
        return Err(bad(KIND, format!("bad magic {magic:02x?}")));
    }
    let version = read_u32(&mut r, KIND)?;
    if version != FORMAT_VERSION {
        return Err(bad(KIND, format!("unsupported version {version}, expected {FORMAT_VERSION}")));
    }
    let n_scenarios = read_u32(&mut r, KIND)? as usize;
    let steps = read_u32(&mut r, KIND)? as usize;
    let components = read_u32(&mut r, KIND)? as usize;
    if steps == 0 || components == 0 {
        return Err(bad(KIND, "zero steps or components in header"));
    }
    let mut scenarios = Vec::with_capacity(n_scenarios);
    for s in 0..n_scenarios {
        let mut ubuf = vec![0u8; components * 8];
        r.read_exact(&mut ubuf)
            .map_err(|e| bad(KIND, format!("scenario {s}: truncated utilizations: {e}")))?;
        let u: Vec<f64> =
            ubuf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if u.iter().any(|x| !x.is_finite()) {
            return Err(bad(KIND, format!("scenario {s}: non-finite utilization")));
        }
        let mut dbuf = vec![0u8; steps * components * 4];
        r.read_exact(&mut dbuf)
            .map_err(|e| bad(KIND, format!("scenario {s}: truncated trajectory: {e}")))?;
        let delta: Vec<f32> =
            dbuf.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        scenarios.push(Scenario { u, delta });
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(bad(KIND, "trailing bytes after the last scenario"));
    }
    Ok(TrainingDataset { components, steps, scenarios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::{RcThermalModel, ThermalConstants};
    use crate::topology::Topology;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("thermnoc-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn model_round_trips_bit_identically() {
        let model = AnnModel::new_seeded(0.1, 42);
        let path = tmp("model-roundtrip.bin");
        save_model(&path, &model).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, model, "weights must survive serialization exactly");
    }

    #[test]
    fn dataset_round_trips_bit_identically() {
        let rc = RcThermalModel::for_topology(&Topology::default_8x8(), &ThermalConstants::default())
            .unwrap();
        let data = TrainingDataset::generate(&rc, 3, 7, 5).unwrap();
        let path = tmp("dataset-roundtrip.bin");
        save_dataset(&path, &data).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, data, "scenarios must survive serialization exactly");
    }

    #[test]
    fn wrong_magic_and_truncation_are_rejected_with_the_file_kind() {
        let model_path = tmp("model-magic.bin");
        std::fs::write(&model_path, b"NOPE").unwrap();
        match load_model(&model_path) {
            Err(Error::Format { kind: "model", .. }) => {}
            other => panic!("expected model format error, got {other:?}"),
        }

        let model = AnnModel::new_seeded(0.05, 1);
        let full = tmp("model-trunc.bin");
        save_model(&full, &model).unwrap();
        let bytes = std::fs::read(&full).unwrap();
        let cut = tmp("model-trunc-cut.bin");
        std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        match load_model(&cut) {
            Err(Error::Format { kind: "model", .. }) => {}
            other => panic!("expected truncation error, got {other:?}"),
        }

        let ds_path = tmp("dataset-magic.bin");
        std::fs::write(&ds_path, b"XXXXXXXXXXXX").unwrap();
        match load_dataset(&ds_path) {
            Err(Error::Format { kind: "dataset", .. }) => {}
            other => panic!("expected dataset format error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let model = AnnModel::new_seeded(0.05, 2);
        let path = tmp("model-trailing.bin");
        save_model(&path, &model).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0xAB);
        std::fs::write(&path, &bytes).unwrap();
        match load_model(&path) {
            Err(Error::Format { kind: "model", detail }) => {
                assert!(detail.contains("trailing"), "detail was: {detail}");
            }
            other => panic!("expected trailing-bytes error, got {other:?}"),
        }
    }
}
