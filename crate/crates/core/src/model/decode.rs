use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::ctc::{ctc_reduce, CtcPath, LabelSeq, BLANK};
use crate::error::{Error, Result};
use crate::numerics::{argmax, log_add, Matrix};

/// Best-path decoding: per-frame argmax (ties to the lowest index), then
/// CTC reduction.
pub fn greedy_decode(logits: &Matrix) -> LabelSeq {
    let path = CtcPath(logits.iter_rows().map(argmax).collect());
    ctc_reduce(&path)
}

/// Prefix beam search over log-posteriors. Returns the best prefix.
pub fn prefix_beam_decode(log_posteriors: &Matrix, beam_width: usize) -> Result<LabelSeq> {
    prefix_beam_search(log_posteriors, beam_width).map(|(z, _)| z)
}

#[derive(Debug, Clone, Copy)]
struct PrefixScore {
    /// Paths ending in blank.
    blank: f64,
    /// Paths ending in the prefix's last label.
    non_blank: f64,
}

impl PrefixScore {
    const EMPTY: PrefixScore = PrefixScore {
        blank: f64::NEG_INFINITY,
        non_blank: f64::NEG_INFINITY,
    };

    fn total(&self) -> f64 {
        log_add(self.blank, self.non_blank)
    }
}

/// Prefix beam search keeping blank and non-blank mass separately per
/// prefix. Returns the best prefix and its log score. Beam ranking is by
/// score, then lexicographically by prefix, so results are deterministic.
pub fn prefix_beam_search(log_posteriors: &Matrix, beam_width: usize) -> Result<(LabelSeq, f64)> {
    if beam_width == 0 {
        return Err(Error::ZeroBeamWidth);
    }
    let mut beam: Vec<(Vec<usize>, PrefixScore)> = vec![(
        Vec::new(),
        PrefixScore {
            blank: 0.0,
            non_blank: f64::NEG_INFINITY,
        },
    )];

    for row in log_posteriors.iter_rows() {
        let mut next: BTreeMap<Vec<usize>, PrefixScore> = BTreeMap::new();
        for (prefix, score) in &beam {
            let total = score.total();
            let entry = next.entry(prefix.clone()).or_insert(PrefixScore::EMPTY);
            entry.blank = log_add(entry.blank, total + row[BLANK]);

            let last = prefix.last().copied();
            for (k, &lp) in row.iter().enumerate().skip(1) {
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                let mut extended = prefix.clone();
                extended.push(k);
                if Some(k) == last {
                    // repeat without a blank collapses into the same prefix
                    let same = next.entry(prefix.clone()).or_insert(PrefixScore::EMPTY);
                    same.non_blank = log_add(same.non_blank, score.non_blank + lp);
                    let ext = next.entry(extended).or_insert(PrefixScore::EMPTY);
                    ext.non_blank = log_add(ext.non_blank, score.blank + lp);
                } else {
                    let ext = next.entry(extended).or_insert(PrefixScore::EMPTY);
                    ext.non_blank = log_add(ext.non_blank, total + lp);
                }
            }
        }
        let mut ranked: Vec<(Vec<usize>, PrefixScore)> = next.into_iter().collect();
        ranked.sort_by(|(pa, sa), (pb, sb)| {
            sb.total()
                .partial_cmp(&sa.total())
                .unwrap_or(Ordering::Equal)
                .then_with(|| pa.cmp(pb))
        });
        ranked.truncate(beam_width);
        beam = ranked;
    }

    let (best, score) = beam
        .into_iter()
        .next()
        .map(|(p, s)| (p, s.total()))
        .unwrap_or((Vec::new(), 0.0));
    Ok((LabelSeq::new(best)?, score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_softmax_rows;

    fn one_hot_logits(path: &[usize], classes: usize) -> Matrix {
        let mut m = Matrix::zeros(path.len(), classes);
        for (t, &k) in path.iter().enumerate() {
            m[(t, k)] = 5.0;
        }
        m
    }

    #[test]
    fn greedy_examples() {
        let logits = one_hot_logits(&[1, 1, 0, 1, 1, 2, 2, 3], 4);
        assert_eq!(greedy_decode(&logits).as_slice(), &[1, 1, 2, 3]);
        let logits = one_hot_logits(&[0, 0, 0], 4);
        assert!(greedy_decode(&logits).is_empty());
        // exact ties resolve to blank
        assert!(greedy_decode(&Matrix::zeros(4, 3)).is_empty());
    }

    #[test]
    fn beam_width_one_follows_greedy_on_peaked_posteriors() {
        let logits = one_hot_logits(&[1, 0, 2, 2, 0, 1], 3);
        let lp = log_softmax_rows(&logits).unwrap();
        assert_eq!(prefix_beam_decode(&lp, 1).unwrap(), greedy_decode(&logits));
    }

    #[test]
    fn merging_mass_can_beat_best_path() {
        // best path is ∅∅ (0.36) but "A" collects 0.64 over three paths
        let p = [[0.6, 0.4], [0.6, 0.4]];
        let lp = Matrix::from_rows(&p.iter().map(|r| r.iter().map(|v: &f64| v.ln()).collect()).collect::<Vec<_>>()).unwrap();
        let (z, score) = prefix_beam_search(&lp, 4).unwrap();
        assert_eq!(z.as_slice(), &[1]);
        assert!((score - 0.64f64.ln()).abs() < 1e-12);
        assert!(greedy_decode(&lp).is_empty());
    }

    #[test]
    fn zero_width_rejected() {
        assert!(matches!(
            prefix_beam_decode(&Matrix::zeros(2, 2), 0),
            Err(Error::ZeroBeamWidth)
        ));
    }
}
