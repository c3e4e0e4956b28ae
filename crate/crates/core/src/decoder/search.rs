//! Lazy k-best enumeration over a product of sorted lists.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::ops::Add;

/// Returns up to `limit` index vectors, one per list, in ascending order of
/// the summed key. Each list must be sorted ascending by key. Ties are
/// broken by the index vector, so the output is deterministic.
pub fn k_best<K>(lists: &[Vec<K>], limit: usize) -> Vec<Vec<usize>>
where
    K: Ord + Copy + Add<Output = K> + Default,
{
    if limit == 0 || lists.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    let key_of = |idx: &[usize]| -> K {
        idx.iter()
            .zip(lists)
            .fold(K::default(), |acc, (&i, l)| acc + l[i])
    };
    let first = vec![0usize; lists.len()];
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    heap.push(Reverse((key_of(&first), first.clone())));
    seen.insert(first);
    let mut out = Vec::new();
    while let Some(Reverse((_, idx))) = heap.pop() {
        for j in 0..lists.len() {
            if idx[j] + 1 < lists[j].len() {
                let mut next = idx.clone();
                next[j] += 1;
                if seen.insert(next.clone()) {
                    heap.push(Reverse((key_of(&next), next)));
                }
            }
        }
        out.push(idx);
        if out.len() == limit {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Key3(pub i64, pub i64, pub i64);

impl Add for Key3 {
    type Output = Key3;
    fn add(self, o: Key3) -> Key3 {
        Key3(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_brute_force() {
        let lists = vec![vec![1u32, 2, 5], vec![0, 3], vec![1, 1, 4]];
        let mut all = Vec::new();
        for a in 0..3 {
            for b in 0..2 {
                for c in 0..3 {
                    all.push((lists[0][a] + lists[1][b] + lists[2][c], vec![a, b, c]));
                }
            }
        }
        all.sort();
        let got = k_best(&lists, all.len() + 5);
        assert_eq!(got.len(), all.len());
        let want: Vec<Vec<usize>> = all.into_iter().map(|(_, v)| v).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn empty_cases() {
        assert!(k_best::<u32>(&[vec![1], vec![]], 3).is_empty());
        assert_eq!(k_best::<u32>(&[], 3), vec![Vec::<usize>::new()]);
    }
}
