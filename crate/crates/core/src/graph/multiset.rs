use super::Label;

/// A multiset of labels stored as a sorted `(label, count)` list.
///
/// λ is silently dropped on insertion.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelMultiset {
    counts: Vec<(Label, u32)>,
    len: u32,
}

impl LabelMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut all: Vec<Label> = labels.into_iter().filter(|l| !l.is_lambda()).collect();
        all.sort_unstable();
        let mut counts: Vec<(Label, u32)> = Vec::new();
        for l in all {
            match counts.last_mut() {
                Some((last, c)) if *last == l => *c += 1,
                _ => counts.push((l, 1)),
            }
        }
        let len = counts.iter().map(|&(_, c)| c).sum();
        LabelMultiset { counts, len }
    }

    /// Total number of elements, with multiplicity.
    #[inline]
    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self, label: Label) -> u32 {
        match self.counts.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    pub fn insert(&mut self, label: Label) {
        if label.is_lambda() {
            return;
        }
        match self.counts.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => self.counts[i].1 += 1,
            Err(i) => self.counts.insert(i, (label, 1)),
        }
        self.len += 1;
    }

    /// Removes one copy of `label`; returns whether it was present.
    pub fn remove(&mut self, label: Label) -> bool {
        match self.counts.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => {
                if self.counts[i].1 == 1 {
                    self.counts.remove(i);
                } else {
                    self.counts[i].1 -= 1;
                }
                self.len -= 1;
                true
            }
            Err(_) => false,
        }
    }

    /// `|self ∩ other|` with multiset semantics, by a linear merge.
    pub fn intersection_size(&self, other: &LabelMultiset) -> u32 {
        let (a, b) = (&self.counts, &other.counts);
        let (mut i, mut j, mut total) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    total += a[i].1.min(b[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
        total
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, u32)> + '_ {
        self.counts.iter().copied()
    }
}

impl FromIterator<Label> for LabelMultiset {
    fn from_iter<T: IntoIterator<Item = Label>>(iter: T) -> Self {
        LabelMultiset::from_labels(iter)
    }
}

/// `max(|a|, |b|) - |a ∩ b|`: edits needed to turn one label multiset into
/// the other.
#[inline]
pub fn gamma(a: &LabelMultiset, b: &LabelMultiset) -> u32 {
    a.len().max(b.len()) - a.intersection_size(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ms(xs: &[u32]) -> LabelMultiset {
        xs.iter().map(|&x| Label(x)).collect()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&ms(&[]), &ms(&[])), 0);
        // {A,A,B} vs {A,B,C}
        assert_eq!(gamma(&ms(&[0, 0, 1]), &ms(&[0, 1, 2])), 1);
        // {A} vs {B,C}
        assert_eq!(gamma(&ms(&[0]), &ms(&[1, 2])), 2);
    }

    #[test]
    fn lambda_never_enters() {
        let mut m = ms(&[0, u32::MAX, 0]);
        assert_eq!(m.len(), 2);
        m.insert(Label::LAMBDA);
        assert_eq!(m.len(), 2);
        assert_eq!(m.count(Label::LAMBDA), 0);
    }

    #[test]
    fn insert_remove_track_len() {
        let mut m = ms(&[3, 1]);
        m.insert(Label(1));
        assert_eq!(m.count(Label(1)), 2);
        assert!(m.remove(Label(1)));
        assert!(m.remove(Label(1)));
        assert!(!m.remove(Label(1)));
        assert_eq!(m, ms(&[3]));
    }

    proptest! {
        #[test]
        fn gamma_is_symmetric_and_reflexive(
            a in proptest::collection::vec(0u32..5, 0..12),
            b in proptest::collection::vec(0u32..5, 0..12),
        ) {
            let (a, b) = (ms(&a), ms(&b));
            prop_assert_eq!(gamma(&a, &b), gamma(&b, &a));
            prop_assert_eq!(gamma(&a, &a), 0);
            prop_assert!(gamma(&a, &b) <= a.len().max(b.len()));
        }

        #[test]
        fn incremental_edits_match_rebuild(
            base in proptest::collection::vec(0u32..4, 0..10),
            ops in proptest::collection::vec((any::<bool>(), 0u32..4), 0..20),
        ) {
            let mut m = ms(&base);
            let mut plain = base.clone();
            for (add, x) in ops {
                if add {
                    m.insert(Label(x));
                    plain.push(x);
                } else if let Some(p) = plain.iter().position(|&y| y == x) {
                    plain.swap_remove(p);
                    prop_assert!(m.remove(Label(x)));
                } else {
                    prop_assert!(!m.remove(Label(x)));
                }
            }
            prop_assert_eq!(m, ms(&plain));
        }
    }
}
