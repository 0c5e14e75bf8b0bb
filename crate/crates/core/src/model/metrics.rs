use std::ops::AddAssign;

use crate::ctc::LabelSeq;

/// Levenshtein alignment counts of a hypothesis against a reference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub ref_length: usize,
}

impl ErrorCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// `(S + I + D) / N`, or `None` for an empty reference.
    pub fn per(&self) -> Option<f64> {
        (self.ref_length > 0).then(|| self.errors() as f64 / self.ref_length as f64)
    }
}

impl AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.substitutions += rhs.substitutions;
        self.insertions += rhs.insertions;
        self.deletions += rhs.deletions;
        self.ref_length += rhs.ref_length;
    }
}

impl std::iter::Sum for ErrorCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ErrorCounts::default(), |mut acc, c| {
            acc += c;
            acc
        })
    }
}

/// Unit-cost edit distance. Among minimum-cost alignments the one with the
/// most substitutions is reported; insertions and deletions then follow
/// from the two lengths, so swapping arguments swaps `I` and `D` exactly.
pub fn edit_distance(hyp: &LabelSeq, reference: &LabelSeq) -> ErrorCounts {
    let h = hyp.as_slice();
    let r = reference.as_slice();
    // cell = (cost, -substitutions), minimized lexicographically
    let mut prev: Vec<(usize, isize)> = (0..=h.len()).map(|j| (j, 0)).collect();
    let mut cur = vec![(0usize, 0isize); h.len() + 1];
    for i in 1..=r.len() {
        cur[0] = (i, 0);
        for j in 1..=h.len() {
            let diag = if r[i - 1] == h[j - 1] {
                prev[j - 1]
            } else {
                (prev[j - 1].0 + 1, prev[j - 1].1 - 1)
            };
            let del = (prev[j].0 + 1, prev[j].1);
            let ins = (cur[j - 1].0 + 1, cur[j - 1].1);
            cur[j] = diag.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (cost, neg_subs) = prev[h.len()];
    let substitutions = (-neg_subs) as usize;
    // D - I = |ref| - |hyp| and D + I = cost - S
    let indels = cost - substitutions;
    let diff = r.len() as isize - h.len() as isize;
    let deletions = ((indels as isize + diff) / 2) as usize;
    let insertions = indels - deletions;
    ErrorCounts {
        substitutions,
        insertions,
        deletions,
        ref_length: r.len(),
    }
}
