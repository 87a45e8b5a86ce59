use std::ops::Range;

/// One position in a pattern sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Matches exactly one child.
    Fixed,
    /// Matches a contiguous run of zero or more children.
    Ellipsis,
}

/// Enumerates the ways `n` children can be divided among `shape`.
///
/// Each candidate gives, per slot, the range of children it covers. Fixed
/// slots always cover one child. Candidates come in lexicographic order of
/// the ellipsis run lengths, so earlier ellipses take shorter runs first.
pub fn enumerate_splits(n: usize, shape: &[Slot]) -> Splits {
    let fixed = shape.iter().filter(|s| **s == Slot::Fixed).count();
    let ellipses = shape.iter().filter(|s| **s == Slot::Ellipsis).count();
    let state = if fixed > n || (ellipses == 0 && fixed != n) {
        None
    } else {
        // Start with every run empty except the last, which takes the slack.
        let mut lens = vec![0; ellipses];
        if let Some(last) = lens.last_mut() {
            *last = n - fixed;
        }
        Some(lens)
    };
    Splits { shape: shape.to_vec(), state }
}

#[derive(Debug, Clone)]
pub struct Splits {
    shape: Vec<Slot>,
    state: Option<Vec<usize>>,
}

impl Splits {
    fn ranges(&self, lens: &[usize]) -> Vec<Range<usize>> {
        let mut out = Vec::with_capacity(self.shape.len());
        let mut at = 0;
        let mut runs = lens.iter();
        for slot in &self.shape {
            let len = match slot {
                Slot::Fixed => 1,
                Slot::Ellipsis => *runs.next().unwrap_or(&0),
            };
            out.push(at..at + len);
            at += len;
        }
        out
    }
}

impl Iterator for Splits {
    type Item = Vec<Range<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        let lens = self.state.take()?;
        let out = self.ranges(&lens);
        // Successor in lexicographic order with a fixed total: find the
        // rightmost run (other than the last) that can grow by taking from
        // the tail, grow it, and put all remaining slack in the last run.
        let k = lens.len();
        if k >= 2 {
            let mut next = lens;
            let mut i = k - 1;
            while i > 0 {
                i -= 1;
                let tail: usize = next[i + 1..].iter().sum();
                if tail > 0 {
                    next[i] += 1;
                    for x in &mut next[i + 1..] {
                        *x = 0;
                    }
                    next[k - 1] = tail - 1;
                    self.state = Some(next);
                    break;
                }
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Slot::{Ellipsis as E, Fixed as F};

    #[test]
    fn three_children_two_ellipses_around_fixed() {
        let got: Vec<_> = enumerate_splits(3, &[E, F, E]).collect();
        assert_eq!(got, vec![vec![0..0, 0..1, 1..3], vec![0..1, 1..2, 2..3], vec![0..2, 2..3, 3..3]]);
    }

    #[test]
    fn empty_children_single_ellipsis() {
        assert_eq!(enumerate_splits(0, &[E]).collect::<Vec<_>>(), vec![vec![0..0]]);
    }

    #[test]
    fn two_ellipses_have_n_plus_one_candidates() {
        for n in 0..8 {
            assert_eq!(enumerate_splits(n, &[E, E]).count(), n + 1);
        }
    }

    #[test]
    fn impossible_shapes_yield_nothing() {
        assert_eq!(enumerate_splits(1, &[F, F]).count(), 0);
        assert_eq!(enumerate_splits(3, &[F, F]).count(), 0);
        assert_eq!(enumerate_splits(2, &[F, F]).count(), 1);
        assert_eq!(enumerate_splits(0, &[]).count(), 1);
    }
}
