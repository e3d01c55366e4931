//! Multinomial logistic regression trained by full-batch gradient descent.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub lr: f64,
    pub epochs: usize,
    /// Coefficient of the squared Frobenius norm of the weights.
    pub l2: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            lr: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

impl LogRegParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::InvalidParam("learning rate must be > 0".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::InvalidParam("l2 must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// `C x (N + 1)`; the last column is the bias.
    pub weights: Array2<f64>,
    /// Class id of each weight row, ascending.
    pub classes: Vec<i64>,
}

fn check_features(x: &[Vec<f64>]) -> Result<usize> {
    let dim = x.first().ok_or(Error::Empty("feature set"))?.len();
    for row in x {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
    }
    Ok(dim)
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    z.iter_mut().for_each(|v| *v /= total);
}

fn class_scores(w: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    w.rows()
        .into_iter()
        .map(|row| row.iter().take(n).zip(x).map(|(a, b)| a * b).sum::<f64>() + row[n])
        .collect()
}

/// Mean cross-entropy plus `l2 * ||w||^2`, and its gradient with respect to
/// `w`. `y` holds row indices into `w`.
pub fn loss_and_gradient(
    w: &Array2<f64>,
    x: &[Vec<f64>],
    y: &[usize],
    l2: f64,
) -> Result<(f64, Array2<f64>)> {
    let dim = check_features(x)?;
    if w.ncols() != dim + 1 {
        return Err(Error::DimensionMismatch {
            left: w.ncols() - 1,
            right: dim,
        });
    }
    if y.len() != x.len() {
        return Err(Error::InvalidParam(format!(
            "{} labels for {} examples",
            y.len(),
            x.len()
        )));
    }
    let c = w.nrows();
    let n = x.len() as f64;
    let mut grad = Array2::zeros(w.dim());
    let mut loss = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        if yi >= c {
            return Err(Error::InvalidParam(format!(
                "label index {yi} out of range for {c} classes"
            )));
        }
        let mut p = class_scores(w, xi);
        softmax_in_place(&mut p);
        loss -= p[yi].max(f64::MIN_POSITIVE).ln();
        p[yi] -= 1.0;
        for (k, pk) in p.iter().enumerate() {
            for (d, v) in xi.iter().enumerate() {
                grad[[k, d]] += pk * v;
            }
            grad[[k, dim]] += pk;
        }
    }
    grad.mapv_inplace(|g| g / n);
    grad.scaled_add(2.0 * l2, w);
    loss = loss / n + l2 * w.iter().map(|v| v * v).sum::<f64>();
    Ok((loss, grad))
}

/// Trains on the classes present in `y`.
pub fn train_logreg(x: &[Vec<f64>], y: &[i64], hyper: &LogRegParams) -> Result<LogisticModel> {
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    train_logreg_with_classes(x, y, &classes, hyper)
}

/// Trains with an explicit class list; every listed class needs an example.
pub fn train_logreg_with_classes(
    x: &[Vec<f64>],
    y: &[i64],
    classes: &[i64],
    hyper: &LogRegParams,
) -> Result<LogisticModel> {
    train_logreg_traced(x, y, classes, hyper).map(|(m, _)| m)
}

/// Also returns the training loss before every update and after the last.
pub fn train_logreg_traced(
    x: &[Vec<f64>],
    y: &[i64],
    classes: &[i64],
    hyper: &LogRegParams,
) -> Result<(LogisticModel, Vec<f64>)> {
    hyper.validate()?;
    let dim = check_features(x)?;
    if y.len() != x.len() {
        return Err(Error::InvalidParam(format!(
            "{} labels for {} examples",
            y.len(),
            x.len()
        )));
    }
    let mut sorted = classes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2 {
        return Err(Error::InvalidParam(
            "at least two classes are required".into(),
        ));
    }
    let idx = y
        .iter()
        .map(|l| {
            sorted
                .binary_search(l)
                .map_err(|_| Error::InvalidParam(format!("label {l} is not a listed class")))
        })
        .collect::<Result<Vec<usize>>>()?;
    for (k, c) in sorted.iter().enumerate() {
        if !idx.contains(&k) {
            return Err(Error::InvalidParam(format!(
                "class {c} has no training examples"
            )));
        }
    }
    let mut w = Array2::zeros((sorted.len(), dim + 1));
    let mut trace = Vec::with_capacity(hyper.epochs + 1);
    for _ in 0..hyper.epochs {
        let (loss, grad) = loss_and_gradient(&w, x, &idx, hyper.l2)?;
        trace.push(loss);
        w.scaled_add(-hyper.lr, &grad);
    }
    trace.push(loss_and_gradient(&w, x, &idx, hyper.l2)?.0);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("trained weights"));
    }
    Ok((
        LogisticModel {
            weights: w,
            classes: sorted,
        },
        trace,
    ))
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.weights.ncols() - 1
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                left: self.n_features(),
                right: x.len(),
            });
        }
        Ok(())
    }

    /// Class probabilities, in the order of `classes`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut p = class_scores(&self.weights, x);
        softmax_in_place(&mut p);
        Ok(p)
    }

    /// Highest-scoring class; ties go to the lowest class id.
    pub fn predict(&self, x: &[f64]) -> Result<i64> {
        self.check(x)?;
        let scores = class_scores(&self.weights, x);
        let mut best = 0;
        for (k, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = k;
            }
        }
        Ok(self.classes[best])
    }
}

/// Fraction of correctly predicted examples.
pub fn evaluate(model: &LogisticModel, x: &[Vec<f64>], y: &[i64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParam(format!(
            "{} labels for {} examples",
            y.len(),
            x.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut correct = 0usize;
    for (xi, &yi) in x.iter().zip(y) {
        if model.predict(xi)? == yi {
            correct += 1;
        }
    }
    Ok(correct as f64 / x.len() as f64)
}

/// Prediction counts: `confusion[true][predicted]`, indexed by position in
/// `model.classes`. Labels outside the class list are an error.
pub fn confusion_matrix(model: &LogisticModel, x: &[Vec<f64>], y: &[i64]) -> Result<Array2<usize>> {
    if x.len() != y.len() {
        return Err(Error::InvalidParam(format!(
            "{} labels for {} examples",
            y.len(),
            x.len()
        )));
    }
    let c = model.classes.len();
    let pos = |l: i64| {
        model
            .classes
            .binary_search(&l)
            .map_err(|_| Error::InvalidParam(format!("label {l} is not a model class")))
    };
    let mut m = Array2::zeros((c, c));
    for (xi, &yi) in x.iter().zip(y) {
        m[[pos(yi)?, pos(model.predict(xi)?)?]] += 1;
    }
    Ok(m)
}

/// Per-class accuracy (recall) from a confusion matrix; `None` for classes
/// without examples.
pub fn per_class_accuracy(confusion: &Array2<usize>) -> Vec<Option<f64>> {
    confusion
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let total: usize = row.sum();
            (total > 0).then(|| row[k] as f64 / total as f64)
        })
        .collect()
}
