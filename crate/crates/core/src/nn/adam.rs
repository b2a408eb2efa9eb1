use alloc::vec;
use alloc::vec::Vec;

use super::model::{LayerGrads, SiameseModel};

/// Adam optimizer state for one model, with L2 weight decay folded into
/// the gradient. Moment constants are the conventional values.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub weight_decay: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<LayerGrads>,
    v: Vec<LayerGrads>,
}

impl Adam {
    pub fn new(model: &SiameseModel, lr: f64, weight_decay: f64) -> Self {
        let zeros = || {
            model
                .layers
                .iter()
                .map(|l| LayerGrads {
                    w: vec![0.0; l.w.len()],
                    b: vec![0.0; l.b.len()],
                })
                .collect::<Vec<_>>()
        };
        Adam {
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn step(&mut self, model: &mut SiameseModel, grads: &[LayerGrads]) {
        self.t += 1;
        let (lr, b1, b2, eps) = (self.lr, self.beta1, self.beta2, self.eps);
        let bc1 = 1.0 - libm::pow(b1, self.t as f64);
        let bc2 = 1.0 - libm::pow(b2, self.t as f64);
        for (li, layer) in model.layers.iter_mut().enumerate() {
            let update = |param: &mut f64, grad: f64, m: &mut f64, v: &mut f64, wd: f64| {
                let g = grad + wd * *param;
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *param -= lr * m_hat / (libm::sqrt(v_hat) + eps);
            };
            for i in 0..layer.w.len() {
                update(
                    &mut layer.w[i],
                    grads[li].w[i],
                    &mut self.m[li].w[i],
                    &mut self.v[li].w[i],
                    self.weight_decay,
                );
            }
            for i in 0..layer.b.len() {
                // bias decay omitted
                update(
                    &mut layer.b[i],
                    grads[li].b[i],
                    &mut self.m[li].b[i],
                    &mut self.v[li].b[i],
                    0.0,
                );
            }
        }
    }
}
