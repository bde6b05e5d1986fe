use std::cmp::Ordering;

use crate::error::{Error, Result};

pub type TermId = u32;

/// Sparse nonnegative vector over term ids. Entries are kept sorted by term
/// id with no duplicates and no zero weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(TermId, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accepts entries in any order. Duplicate term ids are summed and zero
    /// weights dropped; negative or non-finite weights are rejected.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TermId, f64)>,
    {
        let mut v: Vec<(TermId, f64)> = entries.into_iter().collect();
        for &(term, weight) in &v {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidWeight { term, weight });
            }
        }
        v.sort_by_key(|e| e.0);
        let mut out: Vec<(TermId, f64)> = Vec::with_capacity(v.len());
        for (t, w) in v {
            match out.last_mut() {
                Some(last) if last.0 == t => last.1 += w,
                _ => out.push((t, w)),
            }
        }
        out.retain(|e| e.1 != 0.0);
        Ok(SparseVector { entries: out })
    }

    // Caller guarantees the invariants.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(TermId, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|e| e.1 > 0.0 && e.1.is_finite()));
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: TermId) -> f64 {
        self.entries
            .binary_search_by_key(&term, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Multiplies every weight by `s`. A zero factor empties the vector.
    pub fn scaled(&self, s: f64) -> SparseVector {
        assert!(s.is_finite() && s >= 0.0, "scale factor must be nonnegative");
        if s == 0.0 {
            return SparseVector::new();
        }
        SparseVector {
            entries: self.entries.iter().map(|&(t, w)| (t, w * s)).filter(|e| e.1 > 0.0).collect(),
        }
    }

    /// Unit-l2 copy; the empty vector stays empty.
    pub fn normalized(&self) -> SparseVector {
        let n = self.l2_norm();
        if n == 0.0 {
            return SparseVector::new();
        }
        self.scaled(1.0 / n)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SparseVector, s: f64) -> SparseVector {
        if s == 0.0 || other.is_empty() {
            return self.clone();
        }
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    Ordering::Less => {
                        i += 1;
                        *x
                    }
                    Ordering::Greater => {
                        j += 1;
                        (y.0, s * y.1)
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (x.0, x.1 + s * y.1)
                    }
                },
                (Some(x), None) => {
                    i += 1;
                    *x
                }
                (None, Some(y)) => {
                    j += 1;
                    (y.0, s * y.1)
                }
                (None, None) => unreachable!(),
            };
            if next.1 > 0.0 {
                out.push(next);
            }
        }
        SparseVector { entries: out }
    }
}

/// Cosine similarity; 0 when either vector is empty.
pub fn cosine(u: &SparseVector, v: &SparseVector) -> f64 {
    let denom = u.l2_norm() * v.l2_norm();
    if denom == 0.0 {
        return 0.0;
    }
    u.dot(v) / denom
}
