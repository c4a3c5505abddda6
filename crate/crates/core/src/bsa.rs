//! Forward-only boundary-semantic attention fusion and the segmentation /
//! boundary losses, at toy scale with externally supplied weights.
//!
//! All dense algebra runs sequentially in a fixed summation order, so
//! identical inputs give bitwise-identical outputs.

use crate::error::{Error, Result};

/// Probability clamp applied before every logarithm.
pub const PROB_EPS: f64 = 1e-7;

/// Dense row-major matrix of finite reals (`rows` points/tokens by `cols` channels).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn same_shape(&self, other: &FeatureMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    fn matmul(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FeatureMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Columns `[start, start + width)`.
    fn column_block(&self, start: usize, width: usize) -> FeatureMatrix {
        let data = (0..self.rows)
            .flat_map(|r| self.row(r)[start..start + width].iter().copied())
            .collect();
        FeatureMatrix {
            rows: self.rows,
            cols: width,
            data,
        }
    }

    fn concat_columns(&self, other: &FeatureMatrix) -> FeatureMatrix {
        let data = (0..self.rows)
            .flat_map(|r| self.row(r).iter().chain(other.row(r)).copied())
            .collect();
        FeatureMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }
}

/// `x -> x W + b` with `W` of shape `in_dim x out_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    weight: FeatureMatrix,
    bias: Vec<f64>,
}

impl AffineMap {
    pub fn new(weight: FeatureMatrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(Error::ShapeMismatch(format!(
                "bias has {} entries, weight has {} output columns",
                bias.len(),
                weight.cols()
            )));
        }
        if bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("bias entries must be finite".into()));
        }
        Ok(Self { weight, bias })
    }

    pub fn linear(weight: FeatureMatrix) -> Self {
        let bias = vec![0.0; weight.cols()];
        Self { weight, bias }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn weight(&self) -> &FeatureMatrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let mut out = x.matmul(&self.weight)?;
        for r in 0..out.rows {
            let cols = out.cols;
            for (v, b) in out.data[r * cols..(r + 1) * cols].iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(out)
    }
}

/// Stack of affine maps with a rectifier between consecutive layers (none
/// after the last).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<AffineMap>,
}

impl Mlp {
    pub fn new(layers: Vec<AffineMap>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("an MLP needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::ShapeMismatch(format!(
                    "layer output {} does not feed layer input {}",
                    w[0].out_dim(),
                    w[1].in_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn single(layer: AffineMap) -> Self {
        Self {
            layers: vec![layer],
        }
    }

    /// Builds layers from alternating `(weight, bias)` matrices, each bias
    /// stored as a `1 x out_dim` matrix.
    pub fn from_matrices(mats: Vec<FeatureMatrix>) -> Result<Self> {
        if !mats.len().is_multiple_of(2) {
            return Err(Error::ShapeMismatch(
                "expected (weight, bias) matrix pairs".into(),
            ));
        }
        let mut layers = Vec::new();
        let mut it = mats.into_iter();
        while let (Some(w), Some(b)) = (it.next(), it.next()) {
            if b.rows() != 1 {
                return Err(Error::ShapeMismatch("bias must be a single row".into()));
            }
            layers.push(AffineMap::new(w, b.data)?);
        }
        Self::new(layers)
    }

    pub fn to_matrices(&self) -> Vec<FeatureMatrix> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weight.clone(),
                    FeatureMatrix {
                        rows: 1,
                        cols: l.bias.len(),
                        data: l.bias.clone(),
                    },
                ]
            })
            .collect()
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn layers(&self) -> &[AffineMap] {
        &self.layers
    }

    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let mut h = self.layers[0].apply(x)?;
        for layer in &self.layers[1..] {
            for v in &mut h.data {
                *v = v.max(0.0);
            }
            h = layer.apply(&h)?;
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionQueues {
    pub q: FeatureMatrix,
    pub k: FeatureMatrix,
    pub v: FeatureMatrix,
}

/// Applies `map` and reshapes its `3·d_k` output channels into three
/// consecutive blocks: query, key, value.
pub fn split_queues(f: &FeatureMatrix, map: &Mlp) -> Result<AttentionQueues> {
    let out = map.out_dim();
    if !out.is_multiple_of(3) {
        return Err(Error::ShapeMismatch(format!(
            "queue map output dimension {out} is not divisible by 3"
        )));
    }
    let h = map.apply(f)?;
    let dk = out / 3;
    Ok(AttentionQueues {
        q: h.column_block(0, dk),
        k: h.column_block(dk, dk),
        v: h.column_block(2 * dk, dk),
    })
}

/// Row-stochastic attention matrix `softmax(fuse([q_b | q_s]) k_sᵀ / sqrt(d_k))`.
pub fn attention_weights(
    qb: &FeatureMatrix,
    qs: &FeatureMatrix,
    ks: &FeatureMatrix,
    fuse: &Mlp,
) -> Result<FeatureMatrix> {
    let dk = qs.cols();
    if !qb.same_shape(qs) || !ks.same_shape(qs) {
        return Err(Error::ShapeMismatch(format!(
            "queues must share one shape: q_b {}x{}, q_s {}x{}, k_s {}x{}",
            qb.rows(),
            qb.cols(),
            qs.rows(),
            qs.cols(),
            ks.rows(),
            ks.cols()
        )));
    }
    if fuse.in_dim() != 2 * dk || fuse.out_dim() != dk {
        return Err(Error::ShapeMismatch(format!(
            "fusion map must be {}->{}, got {}->{}",
            2 * dk,
            dk,
            fuse.in_dim(),
            fuse.out_dim()
        )));
    }
    let fused = fuse.apply(&qb.concat_columns(qs))?;
    let n = qs.rows();
    let scale = 1.0 / (dk as f64).sqrt();
    let mut a = FeatureMatrix::zeros(n, n);
    for i in 0..n {
        let q = fused.row(i);
        let row = &mut a.data[i * n..(i + 1) * n];
        for (j, logit) in row.iter_mut().enumerate() {
            let dot: f64 = q.iter().zip(ks.row(j)).map(|(x, y)| x * y).sum();
            *logit = dot * scale;
        }
        softmax_in_place(row);
    }
    Ok(a)
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Semantic feature enriched with boundary information: the boundary and
/// semantic queries are concatenated, fused back to `d_k` channels, and used
/// to attend over the semantic keys and values.
pub fn fused_attention(
    qb: &FeatureMatrix,
    qs: &FeatureMatrix,
    ks: &FeatureMatrix,
    vs: &FeatureMatrix,
    fuse: &Mlp,
) -> Result<FeatureMatrix> {
    if !vs.same_shape(qs) {
        return Err(Error::ShapeMismatch(format!(
            "value queue is {}x{}, expected {}x{}",
            vs.rows(),
            vs.cols(),
            qs.rows(),
            qs.cols()
        )));
    }
    attention_weights(qb, qs, ks, fuse)?.matmul(vs)
}

fn check_scores(pred: &FeatureMatrix, target: &FeatureMatrix) -> Result<()> {
    if !pred.same_shape(target) {
        return Err(Error::ShapeMismatch(format!(
            "scores are {}x{}, targets {}x{}",
            pred.rows(),
            pred.cols(),
            target.rows(),
            target.cols()
        )));
    }
    if pred.rows() == 0 || pred.cols() == 0 {
        return Err(Error::ShapeMismatch("empty score matrix".into()));
    }
    if pred.data.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidParameter("scores must lie in [0, 1]".into()));
    }
    for r in 0..target.rows() {
        let row = target.row(r);
        let ones = row.iter().filter(|&&t| t == 1.0).count();
        let zeros = row.iter().filter(|&&t| t == 0.0).count();
        if ones != 1 || ones + zeros != row.len() {
            return Err(Error::InvalidParameter(format!(
                "target row {r} is not one-hot"
            )));
        }
    }
    Ok(())
}

/// `1 - 2 Σ_i p_i·t_i / Σ_i (p_i·p_i + t_i·t_i)` over score rows.
pub fn dice_term(pred: &FeatureMatrix, target: &FeatureMatrix) -> Result<f64> {
    check_scores(pred, target)?;
    let mut inter = 0.0;
    let mut norm = 0.0;
    for (&p, &t) in pred.data.iter().zip(&target.data) {
        inter += p * t;
        norm += p * p + t * t;
    }
    Ok(1.0 - 2.0 * inter / norm)
}

/// Mean cross-entropy plus the dice term.
pub fn semantic_loss(pred: &FeatureMatrix, target: &FeatureMatrix) -> Result<f64> {
    let dice = dice_term(pred, target)?;
    let mut ce = 0.0;
    for r in 0..pred.rows() {
        for (&p, &t) in pred.row(r).iter().zip(target.row(r)) {
            if t != 0.0 {
                ce -= t * p.clamp(PROB_EPS, 1.0 - PROB_EPS).ln();
            }
        }
    }
    Ok(ce / pred.rows() as f64 + dice)
}

/// Mean binary cross-entropy plus `1 - 2 Σ e_i g_i / Σ (e_i + g_i)`, with the
/// pseudo-labels `g` in the numerator. An all-zero pair (no predicted and no
/// true boundary) has a dice term of zero.
pub fn boundary_loss(scores: &[f64], pseudo_labels: &[f64]) -> Result<f64> {
    if scores.len() != pseudo_labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} boundary scores for {} pseudo-labels",
            scores.len(),
            pseudo_labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::ShapeMismatch("no boundary scores".into()));
    }
    if let Some(i) = pseudo_labels.iter().position(|&g| g != 0.0 && g != 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pseudo-label {i} is not binary"
        )));
    }
    if scores.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
        return Err(Error::InvalidParameter("boundary scores must lie in [0, 1]".into()));
    }
    let mut bce = 0.0;
    let mut inter = 0.0;
    let mut total = 0.0;
    for (&e, &g) in scores.iter().zip(pseudo_labels) {
        let c = e.clamp(PROB_EPS, 1.0 - PROB_EPS);
        bce -= g * c.ln() + (1.0 - g) * (1.0 - c).ln();
        inter += e * g;
        total += e + g;
    }
    let dice = if total > 0.0 {
        1.0 - 2.0 * inter / total
    } else {
        0.0
    };
    Ok(bce / scores.len() as f64 + dice)
}
