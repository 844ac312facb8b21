//! Versioned binary model file.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        8 bytes  "CMLPMODL"
//! version      u32      1
//! seed         u64
//! features     u32 count, then per name: u32 byte length + UTF-8 bytes
//! classes      u32 count, then one i8 per class
//! layers       u32 count, then per layer:
//!                u32 inputs, u32 outputs, u8 activation, u8 frozen,
//!                inputs*outputs f64 weights (row-major), outputs f64 biases
//! config       u8 present; if 1:
//!                f64 learning_rate, u32 batch_size, u32 max_epochs,
//!                f64 beta1, f64 beta2, f64 epsilon, u64 seed,
//!                u8 early-stop present, u32 patience, f64 min_delta
//! retained     u8 present; if 1: u32 layer, u64 source_seed
//! ```

use std::path::Path;

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::neural::model::{EarlyStopping, MlpModel, RetainedLayer, TrainConfig};
use crate::neural::network::{Activation, DenseLayer, Network};

pub const MAGIC: &[u8; 8] = b"CMLPMODL";
pub const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("model dimension fits u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelFormat(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
    fn flag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(Error::ModelFormat(format!("bad flag byte {v}"))),
        }
    }
    /// Count-prefixed length, sanity-checked against the bytes left.
    fn len(&mut self, min_item_bytes: usize) -> Result<usize> {
        let n = self.u32()?;
        if n.saturating_mul(min_item_bytes) > self.buf.len() - self.pos {
            return Err(Error::ModelFormat(format!("truncated at byte {}", self.pos)));
        }
        Ok(n)
    }
}

pub fn encode_model(model: &MlpModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION as usize);
    w.u64(model.seed);
    w.u32(model.feature_names.len());
    for name in &model.feature_names {
        w.str(name);
    }
    w.u32(SensationClass::COUNT);
    for c in SensationClass::ALL {
        w.u8(c.value() as u8);
    }
    w.u32(model.network.layers.len());
    for layer in &model.network.layers {
        w.u32(layer.inputs());
        w.u32(layer.outputs());
        w.u8(layer.activation.code());
        w.u8(u8::from(layer.frozen));
        layer.weights.as_slice().iter().for_each(|&v| w.f64(v));
        layer.biases.iter().for_each(|&v| w.f64(v));
    }
    match &model.config {
        None => w.u8(0),
        Some(c) => {
            w.u8(1);
            w.f64(c.learning_rate);
            w.u32(c.batch_size);
            w.u32(c.max_epochs);
            w.f64(c.beta1);
            w.f64(c.beta2);
            w.f64(c.epsilon);
            w.u64(c.seed);
            let es = c.early_stopping;
            w.u8(u8::from(es.is_some()));
            let es = es.unwrap_or_default();
            w.u32(es.patience);
            w.f64(es.min_delta);
        }
    }
    match &model.retained {
        None => w.u8(0),
        Some(r) => {
            w.u8(1);
            w.u32(r.layer);
            w.u64(r.source_seed);
        }
    }
    w.0
}

pub fn decode_model(bytes: &[u8]) -> Result<MlpModel> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(MAGIC.len()).map_err(|_| Error::ModelVersion {
        found: "file shorter than the magic header".into(),
        expected: String::from_utf8_lossy(MAGIC).into_owned(),
    })?;
    if magic != MAGIC {
        return Err(Error::ModelVersion {
            found: format!("magic {:?}", String::from_utf8_lossy(magic)),
            expected: format!("magic {:?}", String::from_utf8_lossy(MAGIC)),
        });
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION as usize {
        return Err(Error::ModelVersion {
            found: format!("version {version}"),
            expected: format!("version {FORMAT_VERSION}"),
        });
    }
    let seed = r.u64()?;
    let n_features = r.len(4)?;
    let mut feature_names = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        let len = r.len(1)?;
        let bytes = r.take(len)?;
        let name = std::str::from_utf8(bytes)
            .map_err(|_| Error::ModelFormat("feature name is not UTF-8".into()))?;
        feature_names.push(name.to_string());
    }
    let n_classes = r.len(1)?;
    let classes: Vec<i8> = (0..n_classes).map(|_| r.u8().map(|b| b as i8)).collect::<Result<_>>()?;
    let expected: Vec<i8> = SensationClass::ALL.iter().map(|c| c.value()).collect();
    if classes != expected {
        return Err(Error::ModelFormat(format!("class list {classes:?}")));
    }
    let n_layers = r.len(10)?;
    let mut layers = Vec::with_capacity(n_layers);
    for l in 0..n_layers {
        let inputs = r.u32()?;
        let outputs = r.u32()?;
        let code = r.u8()?;
        let activation = Activation::from_code(code)
            .ok_or_else(|| Error::ModelFormat(format!("layer {l}: activation code {code}")))?;
        let frozen = r.flag()?;
        let count = inputs
            .checked_mul(outputs)
            .and_then(|c| c.checked_add(outputs))
            .filter(|c| c.saturating_mul(8) <= bytes.len() - r.pos)
            .ok_or_else(|| Error::ModelFormat(format!("truncated in layer {l}")))?;
        let mut values = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let biases = values.split_off(inputs * outputs);
        layers.push(DenseLayer {
            weights: Matrix::from_vec(inputs, outputs, values),
            biases,
            activation,
            frozen,
        });
    }
    let config = if r.flag()? {
        let learning_rate = r.f64()?;
        let batch_size = r.u32()?;
        let max_epochs = r.u32()?;
        let beta1 = r.f64()?;
        let beta2 = r.f64()?;
        let epsilon = r.f64()?;
        let seed = r.u64()?;
        let has_es = r.flag()?;
        let patience = r.u32()?;
        let min_delta = r.f64()?;
        Some(TrainConfig {
            learning_rate,
            batch_size,
            max_epochs,
            beta1,
            beta2,
            epsilon,
            seed,
            early_stopping: has_es.then_some(EarlyStopping { patience, min_delta }),
        })
    } else {
        None
    };
    let retained = if r.flag()? {
        Some(RetainedLayer {
            layer: r.u32()?,
            source_seed: r.u64()?,
        })
    } else {
        None
    };
    if r.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    let model = MlpModel {
        network: Network { layers },
        feature_names,
        seed,
        config,
        retained,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
