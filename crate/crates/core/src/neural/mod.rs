//! From-scratch multilayer perceptron: dense layers, Adam, per-layer
//! freezing and a versioned model file.

pub mod io;
pub mod model;
pub mod network;

pub use io::{decode_model, encode_model, load_model, save_model, FORMAT_VERSION, MAGIC};
pub use model::{
    argmax, forward, init_model, loss_and_gradients, predict, train, EarlyStopping, MlpModel, RetainedLayer,
    TrainConfig, TrainHistory,
};
pub use network::{Activation, Adam, DenseLayer, ForwardCache, LayerGrad, Network};
