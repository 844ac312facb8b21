//! Five-class MLP classifier: initialization, mini-batch Adam training with
//! per-layer freezing, and argmax prediction.

use log::debug;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::neural::network::{Activation, Adam, LayerGrad, Network};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopping {
    pub patience: usize,
    pub min_delta: f64,
}

impl Default for EarlyStopping {
    fn default() -> Self {
        EarlyStopping {
            patience: 25,
            min_delta: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Stop once the epoch training loss has not improved by `min_delta`
    /// for `patience` epochs.
    pub early_stopping: Option<EarlyStopping>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            batch_size: 200,
            max_epochs: 500,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            early_stopping: None,
        }
    }
}

impl TrainConfig {
    /// Fixed-length schedule used for source models.
    pub fn source(seed: u64) -> Self {
        TrainConfig {
            seed,
            ..Default::default()
        }
    }

    /// Schedule with plateau stopping, used for fine-tuning.
    pub fn fine_tune(seed: u64) -> Self {
        TrainConfig {
            seed,
            early_stopping: Some(EarlyStopping::default()),
            ..Default::default()
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.max_epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be > 0", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max epochs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Config("Adam epsilon must be > 0".into()));
        }
        Ok(())
    }
}

/// Where a copied-in layer came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetainedLayer {
    pub layer: usize,
    pub source_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub network: Network,
    pub feature_names: Vec<String>,
    /// Initialization seed.
    pub seed: u64,
    /// Configuration of the most recent training run.
    pub config: Option<TrainConfig>,
    pub retained: Option<RetainedLayer>,
}

/// Training outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    /// Mean cross-entropy per epoch.
    pub loss: Vec<f64>,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn epochs(&self) -> usize {
        self.loss.len()
    }
}

/// ReLU hidden layers and a five-way softmax head. The first width is the
/// input width and the last must be 5.
pub fn init_model(layer_widths: &[usize], seed: u64) -> Result<MlpModel> {
    if layer_widths.len() < 3 {
        return Err(Error::InvalidInput("need at least one hidden layer".into()));
    }
    if layer_widths.last() != Some(&SensationClass::COUNT) {
        return Err(Error::InvalidInput(format!(
            "output width must be {}",
            SensationClass::COUNT
        )));
    }
    let network = Network::init(layer_widths, Activation::Softmax, seed)?;
    let feature_names = (0..layer_widths[0]).map(|i| format!("x{i}")).collect();
    Ok(MlpModel {
        network,
        feature_names,
        seed,
        config: None,
        retained: None,
    })
}

impl MlpModel {
    /// Model for the named input features with the given hidden widths.
    pub fn new(feature_names: Vec<String>, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut widths = vec![feature_names.len()];
        widths.extend_from_slice(hidden);
        widths.push(SensationClass::COUNT);
        init_model(&widths, seed)?.with_feature_names(feature_names)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.network.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.network.input_width(),
                actual: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn classes(&self) -> [SensationClass; SensationClass::COUNT] {
        SensationClass::ALL
    }

    pub fn input_width(&self) -> usize {
        self.network.input_width()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        let w = self.network.widths();
        w[1..w.len() - 1].to_vec()
    }

    pub fn parameter_count(&self) -> usize {
        self.network.parameter_count()
    }

    pub fn layer_count(&self) -> usize {
        self.network.layers.len()
    }

    pub fn freeze(&mut self, layer: usize, frozen: bool) {
        self.network.layers[layer].frozen = frozen;
    }

    /// Structural invariants: softmax head of width 5, ReLU hidden layers,
    /// input width equal to the feature count.
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        let n = self.network.layers.len();
        if n < 2 {
            return Err(Error::InvalidInput("model needs a hidden layer".into()));
        }
        let head = &self.network.layers[n - 1];
        if head.activation != Activation::Softmax || head.outputs() != SensationClass::COUNT {
            return Err(Error::InvalidInput("output layer must be a 5-way softmax".into()));
        }
        if self.network.layers[..n - 1]
            .iter()
            .any(|l| l.activation != Activation::Relu)
        {
            return Err(Error::InvalidInput("hidden layers must use ReLU".into()));
        }
        if self.feature_names.len() != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                actual: self.feature_names.len(),
            });
        }
        Ok(())
    }

    /// Class probabilities, one row per input row.
    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        self.network.forward(x)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<SensationClass>> {
        let p = self.forward(x)?;
        Ok(p.iter_rows().map(|row| SensationClass::from_index(argmax(row))).collect())
    }
}

/// First index of the maximum.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn forward(model: &MlpModel, x: &Matrix) -> Result<Matrix> {
    model.forward(x)
}

pub fn predict(model: &MlpModel, x: &Matrix) -> Result<Vec<SensationClass>> {
    model.predict(x)
}

/// Mean categorical cross-entropy of the batch and its gradient with
/// respect to every trainable parameter.
pub fn loss_and_gradients(
    model: &MlpModel,
    x: &Matrix,
    labels: &[SensationClass],
) -> Result<(f64, Vec<Option<LayerGrad>>)> {
    let cache = model.network.forward_cached(x)?;
    let probs = cache.output();
    let n = x.rows() as f64;
    if !probs.is_finite() {
        return Ok((f64::NAN, vec![None; model.network.layers.len()]));
    }
    let mut loss = 0.0;
    let mut grad = probs.clone();
    for (r, label) in labels.iter().enumerate() {
        let k = label.index();
        loss -= probs.get(r, k).max(f64::MIN_POSITIVE).ln();
        let row = grad.row_mut(r);
        row[k] -= 1.0;
        row.iter_mut().for_each(|g| *g /= n);
    }
    let (grads, _) = model.network.backward(&cache, grad, false);
    Ok((loss / n, grads))
}

/// Mini-batch Adam on mean cross-entropy. Rows are reshuffled every epoch
/// from `config.seed`; the final short batch is kept. Frozen layers are
/// left bit-identical.
pub fn train(
    model: &mut MlpModel,
    x: &Matrix,
    labels: &[SensationClass],
    config: &TrainConfig,
) -> Result<TrainHistory> {
    config.validate()?;
    if x.rows() == 0 {
        return Err(Error::EmptyInput("training matrix"));
    }
    if labels.len() != x.rows() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} rows",
            labels.len(),
            x.rows()
        )));
    }
    if x.cols() != model.input_width() {
        return Err(Error::WidthMismatch {
            expected: model.input_width(),
            actual: x.cols(),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("training matrix".into()));
    }
    if model.network.layers.iter().all(|l| l.frozen) {
        return Err(Error::AllLayersFrozen);
    }

    let mut adam = Adam::new(
        &model.network,
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.epsilon,
    );
    let mut shuffle = rng::rng(rng::derive(config.seed, "shuffle"));
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut history = TrainHistory {
        loss: Vec::with_capacity(config.max_epochs),
        stopped_early: false,
    };
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut batch_labels = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut shuffle);
        let mut total = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let xb = x.select_rows(chunk);
            batch_labels.clear();
            batch_labels.extend(chunk.iter().map(|&i| labels[i]));
            let (loss, grads) = loss_and_gradients(model, &xb, &batch_labels)?;
            if !loss.is_finite() {
                return Err(Error::NanLoss { epoch, batch: b });
            }
            total += loss * chunk.len() as f64;
            adam.step(&mut model.network, &grads);
        }
        let epoch_loss = total / x.rows() as f64;
        history.loss.push(epoch_loss);
        if let Some(es) = config.early_stopping {
            if epoch_loss < best - es.min_delta {
                best = epoch_loss;
                stale = 0;
            } else {
                stale += 1;
                if stale >= es.patience {
                    debug!("early stop at epoch {epoch}, loss {epoch_loss:.5}");
                    history.stopped_early = true;
                    break;
                }
            }
        }
    }
    model.config = Some(*config);
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_matches_formula() {
        let m = init_model(&[10, 64, 64, 5], 7).unwrap();
        assert_eq!(m.parameter_count(), 10 * 64 + 64 + 64 * 64 + 64 + 64 * 5 + 5);
        assert_eq!(m.hidden_widths(), vec![64, 64]);
        m.validate().unwrap();
    }

    #[test]
    fn requires_hidden_layer_and_five_outputs() {
        assert!(init_model(&[6, 5], 1).is_err());
        assert!(init_model(&[6, 8, 4], 1).is_err());
        assert!(init_model(&[6, 64, 5], 1).is_ok());
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.2; 5]), 0);
        assert_eq!(argmax(&[0.1, 0.3, 0.3, 0.2, 0.1]), 1);
    }

    #[test]
    fn all_frozen_is_an_error() {
        let mut m = init_model(&[2, 4, 5], 1).unwrap();
        m.freeze(0, true);
        m.freeze(1, true);
        let x = Matrix::from_rows(&[vec![0.0, 1.0]]);
        let y = [SensationClass::ALL[2]];
        assert!(matches!(
            train(&mut m, &x, &y, &TrainConfig::default()),
            Err(Error::AllLayersFrozen)
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::default();
        c.batch_size = 0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        assert!(TrainConfig::fine_tune(1).early_stopping.is_some());
        assert!(TrainConfig::source(1).early_stopping.is_none());
    }
}
