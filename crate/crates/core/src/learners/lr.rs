//! Two-stage penalised logistic regression.
//!
//! Stage 1 minimises `mean logistic loss + l1 * |w|_1` by accelerated
//! proximal gradient (soft-thresholding), which yields exact zeros. Stage 2
//! refits the surviving features on `mean logistic loss + l2 * |w|_2^2` by
//! gradient descent with step halving. The intercept is never penalised.

use serde::{Deserialize, Serialize};

use super::{log_loss, sigmoid, LrConfig};
use crate::dataset::TimeIndexedDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub intercept: f64,
    /// One weight per input feature; zero for features dropped in stage 1.
    pub weights: Vec<f64>,
    pub selected: Vec<bool>,
    pub converged: bool,
    /// Gradient norm of the stage-2 objective at the returned solution.
    pub grad_norm: f64,
}

impl LrModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.intercept + dot(&self.weights, row))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense row-major design restricted to a feature subset.
struct Design<'a> {
    x: std::borrow::Cow<'a, [f64]>,
    width: usize,
    y: &'a [u8],
}

impl Design<'_> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.width.max(1)).take(self.n())
    }

    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let total: f64 = if self.width == 0 {
            self.y.iter().map(|&y| log_loss(y, b)).sum()
        } else {
            self.rows().zip(self.y).map(|(r, &y)| log_loss(y, b + dot(w, r))).sum()
        };
        total / self.n() as f64
    }

    /// Mean logistic loss and its gradient w.r.t. (w, b).
    fn loss_grad(&self, w: &[f64], b: f64, gw: &mut [f64]) -> (f64, f64) {
        gw.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        let mut gb = 0.0;
        let n = self.n() as f64;
        let mut step = |z: f64, y: u8| {
            let (l, p) = loss_and_prob(y, z);
            loss += l;
            let d = p - y as f64;
            gb += d;
            d
        };
        if self.width == 0 {
            for &y in self.y {
                step(b, y);
            }
        } else {
            for (r, &y) in self.rows().zip(self.y) {
                let d = step(b + dot(w, r), y);
                for (g, x) in gw.iter_mut().zip(r) {
                    *g += d * x;
                }
            }
        }
        gw.iter_mut().for_each(|g| *g /= n);
        (loss / n, gb / n)
    }
}

/// Logistic loss and `sigmoid(z)` from a single exponential.
fn loss_and_prob(y: u8, z: f64) -> (f64, f64) {
    let e = (-z.abs()).exp();
    let softplus = z.max(0.0) + e.ln_1p();
    let p = if z >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
    (softplus - y as f64 * z, p)
}

/// Mean logistic loss plus `l2 * |w|^2` and its analytic gradient
/// `(grad_w, grad_b)` on `data`.
pub fn logistic_objective(data: &TimeIndexedDataset, w: &[f64], b: f64, l2: f64) -> (f64, Vec<f64>, f64) {
    let design = Design {
        x: std::borrow::Cow::Borrowed(data.features()),
        width: data.n_features(),
        y: &data.labels,
    };
    let mut gw = vec![0.0; w.len()];
    let (loss, gb) = design.loss_grad(w, b, &mut gw);
    for (g, wi) in gw.iter_mut().zip(w) {
        *g += 2.0 * l2 * wi;
    }
    (loss + l2 * dot(w, w), gw, gb)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// FISTA with backtracking and function-value restart on the L1 problem.
fn lasso_stage(d: &Design<'_>, l1: f64, max_iter: usize, tol: f64) -> (Vec<f64>, f64) {
    let p = d.width;
    let rate = d.y.iter().map(|&y| y as f64).sum::<f64>() / d.n() as f64;
    let mut w = vec![0.0; p];
    let mut b = (rate / (1.0 - rate)).ln();
    // 1/L with L = trace(X'X)/(4n) + 1/4 bounds the logistic Lipschitz constant
    let mean_sq: f64 = d.x.iter().map(|v| v * v).sum::<f64>() / d.n() as f64;
    let mut step = 4.0 / (mean_sq + 1.0);
    let (mut vw, mut vb) = (w.clone(), b);
    let mut t = 1.0f64;
    let mut gw = vec![0.0; p];
    let penalised = |w: &[f64], b: f64| d.loss(w, b) + l1 * w.iter().map(|x| x.abs()).sum::<f64>();
    let mut obj = penalised(&w, b);

    for _ in 0..max_iter {
        let (fv, gb) = d.loss_grad(&vw, vb, &mut gw);
        let (nw, nb, new_loss) = loop {
            let nw: Vec<f64> = vw
                .iter()
                .zip(&gw)
                .map(|(v, g)| soft_threshold(v - step * g, step * l1))
                .collect();
            let nb = vb - step * gb;
            let mut lin = (nb - vb) * gb;
            let mut sq = (nb - vb) * (nb - vb);
            for k in 0..p {
                let dlt = nw[k] - vw[k];
                lin += dlt * gw[k];
                sq += dlt * dlt;
            }
            let loss = d.loss(&nw, nb);
            if loss <= fv + lin + sq / (2.0 * step) || step < 1e-12 {
                break (nw, nb, loss);
            }
            step /= 2.0;
        };
        let mapping: f64 = nw.iter().zip(&vw).map(|(a, v)| (a - v) * (a - v)).sum::<f64>() + (nb - vb) * (nb - vb);
        let new_obj = new_loss + l1 * nw.iter().map(|x| x.abs()).sum::<f64>();
        if new_obj > obj {
            // restart momentum from the last iterate
            vw.copy_from_slice(&w);
            vb = b;
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        for k in 0..p {
            vw[k] = nw[k] + beta * (nw[k] - w[k]);
        }
        vb = nb + beta * (nb - b);
        w = nw;
        b = nb;
        t = t_next;
        obj = new_obj;
        if mapping.sqrt() / step < tol {
            break;
        }
    }
    (w, b)
}

/// Gradient descent with step halving on the ridge problem. Each
/// iteration first tries the Barzilai-Borwein step and halves it until the
/// Armijo condition holds.
fn ridge_stage(
    d: &Design<'_>,
    l2: f64,
    mut w: Vec<f64>,
    mut b: f64,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64, f64, bool) {
    let p = d.width;
    let obj_of = |w: &[f64], b: f64| d.loss(w, b) + l2 * dot(w, w);
    let full_grad = |w: &[f64], b: f64, gw: &mut [f64]| {
        let (loss, gb) = d.loss_grad(w, b, gw);
        for (g, wi) in gw.iter_mut().zip(w) {
            *g += 2.0 * l2 * wi;
        }
        (loss + l2 * dot(w, w), gb)
    };
    let mut gw = vec![0.0; p];
    let (mut f, mut gb) = full_grad(&w, b, &mut gw);
    let mut step = 1.0;
    let mut next_gw = vec![0.0; p];
    for _ in 0..max_iter {
        let g2 = dot(&gw, &gw) + gb * gb;
        if g2.sqrt() < tol {
            return (w, b, g2.sqrt(), true);
        }
        let (nw, nb) = loop {
            let nw: Vec<f64> = w.iter().zip(&gw).map(|(w, g)| w - step * g).collect();
            let nb = b - step * gb;
            if obj_of(&nw, nb) <= f - 0.5 * step * g2 {
                break (nw, nb);
            }
            step /= 2.0;
            if step < 1e-16 {
                return (w, b, g2.sqrt(), false);
            }
        };
        let (nf, ngb) = full_grad(&nw, nb, &mut next_gw);
        // BB1 step from the secant pair
        let mut ss = (nb - b) * (nb - b);
        let mut sy = (nb - b) * (ngb - gb);
        for k in 0..p {
            let sk = nw[k] - w[k];
            ss += sk * sk;
            sy += sk * (next_gw[k] - gw[k]);
        }
        step = if sy > 0.0 { ss / sy } else { step * 2.0 };
        w = nw;
        b = nb;
        f = nf;
        gb = ngb;
        std::mem::swap(&mut gw, &mut next_gw);
    }
    let norm = (dot(&gw, &gw) + gb * gb).sqrt();
    (w, b, norm, norm < tol)
}

pub(crate) fn fit(train: &TimeIndexedDataset, cfg: &LrConfig) -> LrModel {
    let n_features = train.n_features();
    let full = Design {
        x: std::borrow::Cow::Borrowed(train.features()),
        width: n_features,
        y: &train.labels,
    };
    let (w1, b1) = lasso_stage(&full, cfg.l1, cfg.max_iter, cfg.tol);
    let selected: Vec<bool> = w1.iter().map(|&w| w != 0.0).collect();
    let keep: Vec<usize> = (0..n_features).filter(|&j| selected[j]).collect();

    let mut reduced = Vec::with_capacity(train.n_rows() * keep.len());
    for i in 0..train.n_rows() {
        let row = train.row(i);
        reduced.extend(keep.iter().map(|&j| row[j]));
    }
    let design = Design {
        x: std::borrow::Cow::Owned(reduced),
        width: keep.len(),
        y: &train.labels,
    };
    let start: Vec<f64> = keep.iter().map(|&j| w1[j]).collect();
    let (w2, b2, grad_norm, converged) = ridge_stage(&design, cfg.l2, start, b1, cfg.max_iter, cfg.tol);

    let mut weights = vec![0.0; n_features];
    for (&j, &w) in keep.iter().zip(&w2) {
        weights[j] = w;
    }
    if !converged {
        tracing::warn!(grad_norm, "logistic regression stopped before reaching tolerance");
    }
    LrModel {
        intercept: b2,
        weights,
        selected,
        converged,
        grad_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy(n: usize) -> TimeIndexedDataset {
        let mut rng = crate::seed::rng(5);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let labels = rows
            .iter()
            .map(|r| {
                let z = 1.5 * r[0] - r[1];
                (rng.random::<f64>() < sigmoid(z)) as u8
            })
            .collect::<Vec<_>>();
        TimeIndexedDataset::from_rows(&rows, &labels)
    }

    #[test]
    fn huge_l1_predicts_base_rate() {
        let d = noisy(400);
        let m = fit(
            &d,
            &LrConfig {
                l1: 1e6,
                ..LrConfig::default()
            },
        );
        assert!(m.weights.iter().all(|&w| w == 0.0));
        assert!(m.selected.iter().all(|s| !s));
        assert!((m.predict_row(d.row(0)) - d.bad_rate()).abs() < 1e-6);
    }

    #[test]
    fn zero_weights_score_half() {
        let m = LrModel {
            intercept: 0.0,
            weights: vec![0.0; 3],
            selected: vec![false; 3],
            converged: true,
            grad_norm: 0.0,
        };
        assert_eq!(m.predict_row(&[1.0, -4.0, 9.0]), 0.5);
    }

    #[test]
    fn lasso_drops_noise_features_and_stage_two_respects_mask() {
        let d = noisy(2000);
        let m = fit(
            &d,
            &LrConfig {
                l1: 0.02,
                l2: 1e-3,
                max_iter: 2000,
                tol: 1e-7,
            },
        );
        assert!(m.selected[0] && m.selected[1]);
        for (w, s) in m.weights.iter().zip(&m.selected) {
            if !s {
                assert_eq!(*w, 0.0);
            }
        }
        assert!(m.weights[0] > 0.5 && m.weights[1] < -0.3);
        assert!(m.converged, "grad norm {}", m.grad_norm);
    }
}
