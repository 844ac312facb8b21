//! Per-class generative adversarial oversampler built on the in-crate
//! network engine. Each minority class gets its own generator and
//! discriminator, trained only on that class's rows.

use log::warn;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::neural::{Activation, Adam, Network};
use crate::resampling::interpolate::interpolate_class;
use crate::resampling::{check_plan, Augmented, ResamplePlan};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub generator_lr: f64,
    pub discriminator_lr: f64,
    /// Adam β1 for both players.
    pub beta1: f64,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            generator_hidden: vec![32, 32],
            discriminator_hidden: vec![32, 32],
            latent_dim: 8,
            epochs: 300,
            batch_size: 64,
            generator_lr: 1e-3,
            discriminator_lr: 1e-3,
            beta1: 0.5,
            seed: 0,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let dims_ok = self.latent_dim > 0
            && self.epochs > 0
            && self.batch_size > 0
            && self.generator_hidden.iter().all(|&w| w > 0)
            && self.discriminator_hidden.iter().all(|&w| w > 0);
        if !dims_ok {
            return Err(Error::Config("GAN dimensions must be positive".into()));
        }
        if !(self.generator_lr > 0.0 && self.discriminator_lr > 0.0) {
            return Err(Error::Config("GAN learning rates must be positive".into()));
        }
        Ok(())
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect(),
    )
}

/// Gradient of mean cross-entropy w.r.t. the logits for a constant target
/// column of a two-way softmax.
fn grad_towards(probs: &Matrix, target: usize) -> Matrix {
    let n = probs.rows() as f64;
    let mut g = probs.clone();
    for r in 0..g.rows() {
        let row = g.row_mut(r);
        row[target] -= 1.0;
        row.iter_mut().for_each(|v| *v /= n);
    }
    g
}

const REAL: usize = 1;
const FAKE: usize = 0;

/// Fit a generator against its discriminator on `data`. `None` when
/// training diverges.
fn fit_generator(data: &Matrix, config: &GanConfig, seed: u64) -> Result<Option<Network>> {
    let d = data.cols();
    let mut gw = vec![config.latent_dim];
    gw.extend(&config.generator_hidden);
    gw.push(d);
    let mut dw = vec![d];
    dw.extend(&config.discriminator_hidden);
    dw.push(2);
    let mut generator = Network::init(&gw, Activation::Identity, rng::derive(seed, "generator"))?;
    let mut discriminator = Network::init(&dw, Activation::Softmax, rng::derive(seed, "discriminator"))?;
    let mut g_opt = Adam::new(&generator, config.generator_lr, config.beta1, 0.999, 1e-8);
    let mut d_opt = Adam::new(&discriminator, config.discriminator_lr, config.beta1, 0.999, 1e-8);
    let mut rng = rng::rng(rng::derive(seed, "gan-batches"));
    let mut order: Vec<usize> = (0..data.rows()).collect();

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let b = chunk.len();
            let real = data.select_rows(chunk);
            let fake = generator.forward(&gaussian(b, config.latent_dim, &mut rng))?;
            if !fake.is_finite() {
                return Ok(None);
            }

            let both = real.vstack(&fake);
            let cache = discriminator.forward_cached(&both)?;
            let probs = cache.output();
            if !probs.is_finite() {
                return Ok(None);
            }
            let mut grad = probs.clone();
            let m = both.rows() as f64;
            for r in 0..grad.rows() {
                let row = grad.row_mut(r);
                row[if r < b { REAL } else { FAKE }] -= 1.0;
                row.iter_mut().for_each(|v| *v /= m);
            }
            let (d_grads, _) = discriminator.backward(&cache, grad, false);
            d_opt.step(&mut discriminator, &d_grads);

            // non-saturating generator step: push D(G(z)) towards "real"
            let z = gaussian(b, config.latent_dim, &mut rng);
            let g_cache = generator.forward_cached(&z)?;
            let d_cache = discriminator.forward_cached(g_cache.output())?;
            let (_, grad_fake) = discriminator.backward(&d_cache, grad_towards(d_cache.output(), REAL), true);
            let grad_fake = grad_fake.expect("input gradient requested");
            if !grad_fake.is_finite() {
                return Ok(None);
            }
            let (g_grads, _) = generator.backward(&g_cache, grad_fake, false);
            g_opt.step(&mut generator, &g_grads);
        }
    }
    if generator.layers.iter().all(|l| l.is_finite()) {
        Ok(Some(generator))
    } else {
        Ok(None)
    }
}

/// Generated rows for one class, or `None` if the GAN diverged.
pub fn generate_class(data: &Matrix, count: usize, config: &GanConfig, seed: u64) -> Result<Option<Matrix>> {
    config.validate()?;
    let Some(generator) = fit_generator(data, config, seed)? else {
        return Ok(None);
    };
    let mut rng = rng::rng(rng::derive(seed, "gan-sample"));
    let out = generator.forward(&gaussian(count, config.latent_dim, &mut rng))?;
    Ok(out.is_finite().then_some(out))
}

/// Original rows verbatim, then GAN samples per minority class. Classes
/// with fewer than two rows, or whose GAN diverges, fall back to
/// interpolation.
pub fn oversample_gan(
    x: &Matrix,
    labels: &[SensationClass],
    plan: &ResamplePlan,
    config: &GanConfig,
) -> Result<Augmented> {
    config.validate()?;
    let by_class = check_plan(x, labels, plan)?;
    let mut out = Augmented::from_original(x, labels);
    for (class, rows) in &by_class {
        let deficit = plan.deficit(*class);
        if deficit == 0 {
            continue;
        }
        let seed = rng::derive_index(config.seed ^ plan.seed, "gan", class.index() as u64);
        let generated = if rows.len() >= 2 {
            generate_class(&x.select_rows(rows), deficit, config, seed)?
        } else {
            None
        };
        match generated {
            Some(g) => g.iter_rows().for_each(|row| out.push(row, *class)),
            None => {
                warn!("GAN for class {class} unusable; falling back to interpolation");
                out.fallbacks.push(*class);
                let mut r = rng::rng(rng::derive_index(plan.seed, "interp", class.index() as u64));
                for row in interpolate_class(x, rows, deficit, &mut r) {
                    out.push(&row, *class);
                }
            }
        }
    }
    Ok(out)
}
