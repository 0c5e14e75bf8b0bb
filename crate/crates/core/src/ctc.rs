//! Connectionist temporal classification: the path reduction operator, the
//! log-domain forward–backward lattice, loss/gradient with respect to logits,
//! and an exhaustive path-enumeration oracle.
//!
//! The blank symbol is always class 0.

use crate::error::{Error, Result};
use crate::numerics::{log_add, log_softmax_rows, log_sum_exp, LogProb, Matrix};

/// Class index of the blank symbol in every inventory.
pub const BLANK: usize = 0;

/// A phone label sequence `z`. Never contains the blank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelSeq(Vec<usize>);

impl LabelSeq {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if let Some(pos) = labels.iter().position(|&l| l == BLANK) {
            return Err(Error::BlankInLabels(pos));
        }
        Ok(LabelSeq(labels))
    }

    pub fn empty() -> Self {
        LabelSeq(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Minimum number of frames a CTC path needs to emit this sequence:
    /// one per label plus a separating blank between adjacent repeats.
    pub fn min_frames(&self) -> usize {
        let repeats = self.0.windows(2).filter(|w| w[0] == w[1]).count();
        self.0.len() + repeats
    }

    pub fn max_label(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }
}

/// A frame-level path over phones and blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtcPath(pub Vec<usize>);

/// `∅ z₁ ∅ z₂ … z_u ∅`, the lattice state sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedSeq(Vec<usize>);

impl ExtendedSeq {
    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether state `s` may be entered directly from `s − 2`.
    #[inline]
    fn can_skip_into(&self, s: usize) -> bool {
        s >= 2 && self.0[s] != BLANK && self.0[s] != self.0[s - 2]
    }
}

/// Collapses runs of identical symbols, then removes blanks.
pub fn ctc_reduce(path: &CtcPath) -> LabelSeq {
    let mut out = Vec::new();
    let mut prev = None;
    for &sym in &path.0 {
        if Some(sym) != prev && sym != BLANK {
            out.push(sym);
        }
        prev = Some(sym);
    }
    LabelSeq(out)
}

pub fn extend_labels(z: &LabelSeq) -> ExtendedSeq {
    let mut symbols = Vec::with_capacity(2 * z.len() + 1);
    symbols.push(BLANK);
    for &l in z.as_slice() {
        symbols.push(l);
        symbols.push(BLANK);
    }
    ExtendedSeq(symbols)
}

/// Forward and backward lattices in log domain.
///
/// `alpha[t, s]` is the log-probability of all prefixes of length `t + 1`
/// ending in state `s` (emission at `t` included). `beta[t, s]` is the
/// log-probability of completing from state `s` at frame `t` using frames
/// `t + 1 ..` only, so `logsumexp_s(alpha[t, s] + beta[t, s])` equals the
/// log-likelihood at every frame.
#[derive(Debug, Clone)]
pub struct CtcTables {
    pub extended: ExtendedSeq,
    pub alpha: Matrix,
    pub beta: Matrix,
    pub log_likelihood: LogProb,
}

impl CtcTables {
    /// `logsumexp_s(alpha[t, s] + beta[t, s])` for frame `t`.
    pub fn frame_total(&self, t: usize) -> f64 {
        let joint: Vec<f64> = self
            .alpha
            .row(t)
            .iter()
            .zip(self.beta.row(t))
            .map(|(a, b)| a + b)
            .collect();
        log_sum_exp(&joint).unwrap_or(f64::NEG_INFINITY)
    }
}

fn check_labels(z: &LabelSeq, classes: usize) -> Result<()> {
    match z.max_label() {
        Some(label) if label >= classes => Err(Error::LabelOutOfInventory { label, classes }),
        _ => Ok(()),
    }
}

fn check_normalized(log_posteriors: &Matrix) -> Result<()> {
    for (frame, row) in log_posteriors.iter_rows().enumerate() {
        let sum: f64 = row.iter().map(|v| v.exp()).sum();
        if sum.is_nan() || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized { frame, sum });
        }
    }
    Ok(())
}

/// Runs the CTC forward–backward recursions over row-normalized
/// log-posteriors (`T × K`). Infeasible pairs yield a `−∞` likelihood.
pub fn ctc_forward_backward(log_posteriors: &Matrix, z: &LabelSeq) -> Result<CtcTables> {
    let (frames, classes) = log_posteriors.shape();
    if frames == 0 {
        return Err(Error::EmptySequence);
    }
    check_labels(z, classes)?;
    check_normalized(log_posteriors)?;
    Ok(lattice(log_posteriors, z))
}

fn lattice(lp: &Matrix, z: &LabelSeq) -> CtcTables {
    let frames = lp.rows();
    let ext = extend_labels(z);
    let states = ext.len();
    let sym = ext.symbols();
    let neg = f64::NEG_INFINITY;

    let mut alpha = Matrix::filled(frames, states, neg);
    alpha[(0, 0)] = lp[(0, sym[0])];
    if states > 1 {
        alpha[(0, 1)] = lp[(0, sym[1])];
    }
    for t in 1..frames {
        for s in 0..states {
            let mut acc = alpha[(t - 1, s)];
            if s >= 1 {
                acc = log_add(acc, alpha[(t - 1, s - 1)]);
            }
            if ext.can_skip_into(s) {
                acc = log_add(acc, alpha[(t - 1, s - 2)]);
            }
            alpha[(t, s)] = if acc == neg { neg } else { acc + lp[(t, sym[s])] };
        }
    }

    let mut beta = Matrix::filled(frames, states, neg);
    beta[(frames - 1, states - 1)] = 0.0;
    if states > 1 {
        beta[(frames - 1, states - 2)] = 0.0;
    }
    for t in (0..frames - 1).rev() {
        for s in 0..states {
            let mut acc = beta[(t + 1, s)] + lp[(t + 1, sym[s])];
            if s + 1 < states {
                acc = log_add(acc, beta[(t + 1, s + 1)] + lp[(t + 1, sym[s + 1])]);
            }
            if s + 2 < states && ext.can_skip_into(s + 2) {
                acc = log_add(acc, beta[(t + 1, s + 2)] + lp[(t + 1, sym[s + 2])]);
            }
            beta[(t, s)] = acc;
        }
    }

    let last = frames - 1;
    let mut ll = alpha[(last, states - 1)];
    if states > 1 {
        ll = log_add(ll, alpha[(last, states - 2)]);
    }
    CtcTables {
        extended: ext,
        alpha,
        beta,
        log_likelihood: LogProb::new(ll).unwrap_or(LogProb::ZERO),
    }
}

/// CTC loss `−log P(z | X)` with the softmax folded in, and its gradient with
/// respect to the pre-softmax logits: `softmax(logits) − γ`.
pub fn ctc_loss_and_grad(logits: &Matrix, z: &LabelSeq) -> Result<(f64, Matrix)> {
    let (frames, classes) = logits.shape();
    if frames == 0 {
        return Err(Error::EmptySequence);
    }
    check_labels(z, classes)?;
    if z.min_frames() > frames {
        return Err(Error::InfeasibleAlignment {
            frames,
            labels: z.len(),
            required: z.min_frames(),
        });
    }
    let lp = log_softmax_rows(logits)?;
    let tables = lattice(&lp, z);
    let ll = tables.log_likelihood.value();
    if !ll.is_finite() {
        return Err(Error::Divergence(format!(
            "non-finite CTC log-likelihood {ll} for {frames} frames"
        )));
    }

    let sym = tables.extended.symbols();
    let mut grad = Matrix::zeros(frames, classes);
    for t in 0..frames {
        let row = grad.row_mut(t);
        for (g, &l) in row.iter_mut().zip(lp.row(t)) {
            *g = l.exp();
        }
        for (s, &k) in sym.iter().enumerate() {
            let joint = tables.alpha[(t, s)] + tables.beta[(t, s)];
            if joint > f64::NEG_INFINITY {
                row[k] -= (joint - ll).exp();
            }
        }
    }
    Ok((-ll, grad))
}

/// Upper bound on `K^T` for [`ctc_brute_force`].
pub const ORACLE_MAX_PATHS: u64 = 10_000_000;

/// Sums the probabilities of all `K^T` frame paths that reduce to `z`.
pub fn ctc_brute_force(log_posteriors: &Matrix, z: &LabelSeq) -> Result<f64> {
    let (frames, classes) = log_posteriors.shape();
    let total = (classes as u64)
        .checked_pow(frames as u32)
        .filter(|&n| n <= ORACLE_MAX_PATHS)
        .ok_or(Error::OracleBoundExceeded { classes, frames })?;
    if frames == 0 {
        return Err(Error::EmptySequence);
    }
    check_labels(z, classes)?;

    let mut path = vec![0usize; frames];
    let mut acc = f64::NEG_INFINITY;
    let mut candidate = CtcPath(Vec::with_capacity(frames));
    for _ in 0..total {
        candidate.0.clear();
        candidate.0.extend_from_slice(&path);
        if ctc_reduce(&candidate) == *z {
            let lp: f64 = path
                .iter()
                .enumerate()
                .map(|(t, &k)| log_posteriors[(t, k)])
                .sum();
            acc = log_add(acc, lp);
        }
        // odometer increment, last frame fastest
        for digit in path.iter_mut().rev() {
            *digit += 1;
            if *digit < classes {
                break;
            }
            *digit = 0;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: usize = 1;
    const B: usize = 2;
    const C: usize = 3;

    fn seq(v: &[usize]) -> LabelSeq {
        LabelSeq::new(v.to_vec()).unwrap()
    }

    fn uniform(frames: usize, classes: usize) -> Matrix {
        Matrix::filled(frames, classes, -(classes as f64).ln())
    }

    #[test]
    fn reduce_examples() {
        let path = CtcPath(vec![A, A, BLANK, A, A, B, B, C]);
        assert_eq!(ctc_reduce(&path), seq(&[A, A, B, C]));
        assert!(ctc_reduce(&CtcPath(vec![BLANK; 3])).is_empty());
        assert_eq!(ctc_reduce(&CtcPath(vec![A, BLANK, A])), seq(&[A, A]));
    }

    #[test]
    fn extend_examples() {
        assert_eq!(extend_labels(&seq(&[A, B])).symbols(), &[0, A, 0, B, 0]);
        assert_eq!(extend_labels(&LabelSeq::empty()).symbols(), &[0]);
        assert_eq!(extend_labels(&seq(&[A])).symbols(), &[0, A, 0]);
    }

    #[test]
    fn label_seq_rejects_blank() {
        assert!(matches!(
            LabelSeq::new(vec![1, 0]),
            Err(Error::BlankInLabels(1))
        ));
        assert_eq!(seq(&[A, A, B, B, B]).min_frames(), 8);
    }

    #[test]
    fn two_frame_single_label() {
        // paths AA, A∅, ∅A out of four equiprobable paths
        let tables = ctc_forward_backward(&uniform(2, 2), &seq(&[A])).unwrap();
        assert!((tables.log_likelihood.value() - 0.75f64.ln()).abs() < 1e-12);
        let (loss, _) = ctc_loss_and_grad(&Matrix::zeros(2, 2), &seq(&[A])).unwrap();
        assert!((loss + 0.75f64.ln()).abs() < 1e-12);
        let brute = ctc_brute_force(&uniform(2, 2), &seq(&[A])).unwrap();
        assert!((brute - 0.75f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_frame_cases() {
        let lp = Matrix::from_rows(&[vec![0.2f64.ln(), 0.3f64.ln(), 0.5f64.ln()]]).unwrap();
        let t = ctc_forward_backward(&lp, &LabelSeq::empty()).unwrap();
        assert!((t.log_likelihood.value() - 0.2f64.ln()).abs() < 1e-12);
        let t = ctc_forward_backward(&lp, &seq(&[A, B])).unwrap();
        assert!(t.log_likelihood.is_zero());
        assert!(ctc_brute_force(&lp, &seq(&[A, B])).unwrap() == f64::NEG_INFINITY);
        assert!(matches!(
            ctc_loss_and_grad(&Matrix::zeros(1, 3), &seq(&[A, B])),
            Err(Error::InfeasibleAlignment { frames: 1, labels: 2, required: 2 })
        ));
    }

    #[test]
    fn repeated_labels_need_a_blank() {
        let lp = uniform(2, 2);
        let t = ctc_forward_backward(&lp, &seq(&[A, A])).unwrap();
        assert!(t.log_likelihood.is_zero());
        let t = ctc_forward_backward(&uniform(3, 2), &seq(&[A, A])).unwrap();
        assert!((t.log_likelihood.value() - (1.0f64 / 8.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ctc_forward_backward(&uniform(3, 2), &seq(&[2])),
            Err(Error::LabelOutOfInventory { label: 2, classes: 2 })
        ));
        assert!(matches!(
            ctc_forward_backward(&Matrix::zeros(2, 2), &seq(&[1])),
            Err(Error::Unnormalized { frame: 0, .. })
        ));
        assert!(matches!(
            ctc_brute_force(&uniform(12, 4), &seq(&[1])),
            Err(Error::OracleBoundExceeded { .. })
        ));
    }

    #[test]
    fn lattice_consistency_per_frame() {
        let logits = Matrix::from_vec(
            5,
            4,
            (0..20).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect(),
        )
        .unwrap();
        let lp = log_softmax_rows(&logits).unwrap();
        let t = ctc_forward_backward(&lp, &seq(&[1, 3])).unwrap();
        let ll = t.log_likelihood.value();
        for f in 0..5 {
            assert!((t.frame_total(f) - ll).abs() < 1e-9);
        }
    }
}
