//! Negative-sampling loss for one (target, context) pair and its gradients.
//!
//! For an input vector `v`, the positive context's output vector `u` and
//! negative samples `n_1..n_K`:
//!
//! ```text
//! loss = -ln s(u.v) - sum_j ln s(-n_j.v)
//! ```
//!
//! where `s` is the logistic function. The category-aware variant adds the
//! same loss with the category's input vector in place of `v`, sharing `u`
//! and the negatives.

use crate::dense::dot;

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub loss: f64,
    pub input: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Loss of one pair and its gradient with respect to every vector involved.
pub fn pair_loss_grad(input: &[f64], positive: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let dim = input.len();
    let mut g = PairGradient {
        loss: 0.0,
        input: vec![0.0; dim],
        positive: vec![0.0; dim],
        negatives: Vec::with_capacity(negatives.len()),
    };
    accumulate(input, positive, negatives, &mut g);
    g
}

fn accumulate(input: &[f64], positive: &[f64], negatives: &[&[f64]], g: &mut PairGradient) {
    let x = dot(positive, input);
    g.loss += softplus(-x);
    let coef = sigmoid(x) - 1.0;
    for i in 0..input.len() {
        g.input[i] += coef * positive[i];
        g.positive[i] += coef * input[i];
    }
    let fresh = g.negatives.is_empty();
    for (j, neg) in negatives.iter().enumerate() {
        let x = dot(neg, input);
        g.loss += softplus(x);
        let coef = sigmoid(x);
        for i in 0..input.len() {
            g.input[i] += coef * neg[i];
        }
        if fresh {
            g.negatives.push(input.iter().map(|v| coef * v).collect());
        } else {
            for (d, v) in g.negatives[j].iter_mut().zip(input) {
                *d += coef * v;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointGradient {
    pub word_loss: f64,
    pub category_loss: f64,
    pub word_input: Vec<f64>,
    pub category_input: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

impl JointGradient {
    pub fn loss(&self) -> f64 {
        self.word_loss + self.category_loss
    }
}

/// Word-side plus category-side loss for one pair, sharing the context and
/// negative output vectors.
pub fn joint_loss_grad(
    word_input: &[f64],
    category_input: &[f64],
    positive: &[f64],
    negatives: &[&[f64]],
) -> JointGradient {
    let word = pair_loss_grad(word_input, positive, negatives);
    let cat = pair_loss_grad(category_input, positive, negatives);
    JointGradient {
        word_loss: word.loss,
        category_loss: cat.loss,
        word_input: word.input,
        category_input: cat.input,
        positive: word.positive.iter().zip(&cat.positive).map(|(a, b)| a + b).collect(),
        negatives: word
            .negatives
            .iter()
            .zip(&cat.negatives)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect(),
    }
}

/// Loss only, for finite-difference checks and logging.
pub fn pair_loss(input: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    softplus(-dot(positive, input)) + negatives.iter().map(|n| softplus(dot(n, input))).sum::<f64>()
}
