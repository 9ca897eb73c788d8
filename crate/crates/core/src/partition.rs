//! Set partitions of a finite ground set and the refinement lattice.
//!
//! A partition of `{0, .., n-1}` is stored as its restricted-growth string:
//! position `i` holds the index of its block, blocks being numbered in order of
//! their smallest element. Two partitions are equal iff their strings are.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest ground size accepted by [`enumerate_partitions`].
pub const MAX_ENUMERATION_SIZE: usize = 12;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    rgs: Vec<usize>,
}

impl SetPartition {
    /// Normalizes an arbitrary labelling of positions into restricted-growth form.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("a partition needs a non-empty ground set"));
        }
        let mut seen: Vec<&T> = Vec::new();
        let rgs = labels
            .iter()
            .map(|l| match seen.iter().position(|s| *s == l) {
                Some(b) => b,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            })
            .collect();
        Ok(SetPartition { rgs })
    }

    /// Builds a partition from a restricted-growth string, rejecting non-normal input.
    pub fn from_rgs(rgs: Vec<usize>) -> Result<Self> {
        if rgs.is_empty() {
            return Err(Error::invalid("a partition needs a non-empty ground set"));
        }
        let mut max = None::<usize>;
        for &b in &rgs {
            let bound = max.map_or(0, |m| m + 1);
            if b > bound {
                return Err(Error::invalid(format!(
                    "restricted-growth string {:?} is not in normal form",
                    rgs
                )));
            }
            max = Some(max.map_or(b, |m| m.max(b)));
        }
        Ok(SetPartition { rgs })
    }

    /// Builds a partition from explicit 0-based blocks.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                if i >= n {
                    return Err(Error::invalid(format!("element {} outside ground set of size {}", i + 1, n)));
                }
                if label[i] != usize::MAX {
                    return Err(Error::invalid(format!("element {} appears in two blocks", i + 1)));
                }
                label[i] = b;
            }
        }
        if let Some(i) = label.iter().position(|&l| l == usize::MAX) {
            return Err(Error::invalid(format!("element {} is not covered by any block", i + 1)));
        }
        Self::from_labels(&label)
    }

    pub fn discrete(n: usize) -> Self {
        assert!(n > 0);
        SetPartition { rgs: (0..n).collect() }
    }

    pub fn full(n: usize) -> Self {
        assert!(n > 0);
        SetPartition { rgs: vec![0; n] }
    }

    pub fn ground_size(&self) -> usize {
        self.rgs.len()
    }

    pub fn block_count(&self) -> usize {
        self.rgs.iter().max().map_or(0, |m| m + 1)
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.rgs[i]
    }

    pub fn rgs(&self) -> &[usize] {
        &self.rgs
    }

    /// Blocks as sorted lists of 0-based elements, ordered by smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        blocks
    }

    pub fn is_discrete(&self) -> bool {
        self.block_count() == self.ground_size()
    }

    pub fn is_full(&self) -> bool {
        self.block_count() == 1
    }

    fn check_same_ground(&self, other: &SetPartition) -> Result<()> {
        if self.ground_size() != other.ground_size() {
            return Err(Error::invalid(format!(
                "ground sizes differ ({} vs {})",
                self.ground_size(),
                other.ground_size()
            )));
        }
        Ok(())
    }

    /// Refinement order: every block of `self` lies inside a block of `other`.
    pub fn leq(&self, other: &SetPartition) -> Result<bool> {
        self.check_same_ground(other)?;
        Ok(self.refines(other))
    }

    pub(crate) fn refines(&self, other: &SetPartition) -> bool {
        let mut image = vec![usize::MAX; self.block_count()];
        for (i, &b) in self.rgs.iter().enumerate() {
            let target = other.rgs[i];
            if image[b] == usize::MAX {
                image[b] = target;
            } else if image[b] != target {
                return false;
            }
        }
        true
    }

    /// Finest common coarsening.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition> {
        self.check_same_ground(other)?;
        let n = self.ground_size();
        let mut dsu = DisjointSets::new(n);
        let mut first_self = vec![usize::MAX; self.block_count()];
        let mut first_other = vec![usize::MAX; other.block_count()];
        for i in 0..n {
            for (first, b) in [(&mut first_self, self.rgs[i]), (&mut first_other, other.rgs[i])] {
                if first[b] == usize::MAX {
                    first[b] = i;
                } else {
                    dsu.union(first[b], i);
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|i| dsu.find(i)).collect();
        Self::from_labels(&labels)
    }

    /// Coarsest common refinement (blockwise intersections).
    pub fn meet(&self, other: &SetPartition) -> Result<SetPartition> {
        self.check_same_ground(other)?;
        let labels: Vec<(usize, usize)> =
            self.rgs.iter().zip(&other.rgs).map(|(&a, &b)| (a, b)).collect();
        Self::from_labels(&labels)
    }

    /// For `self <= coarser`, the partition of the blocks of `self` induced by `coarser`.
    pub fn induced_on_blocks(&self, coarser: &SetPartition) -> Result<SetPartition> {
        if !self.leq(coarser)? {
            return Err(Error::invalid("induced partition needs a comparable pair"));
        }
        let mut labels = vec![0; self.block_count()];
        for (i, &b) in self.rgs.iter().enumerate() {
            labels[b] = coarser.rgs[i];
        }
        Self::from_labels(&labels)
    }

    /// Paper-style rendering with 1-based elements, e.g. `{{1,2},{3}}`.
    pub fn to_block_string(&self) -> String {
        let inner: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| {
                let elems: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
                format!("{{{}}}", elems.join(","))
            })
            .collect();
        format!("{{{}}}", inner.join(","))
    }
}

impl fmt::Display for SetPartition {
    /// Restricted-growth serialization, e.g. `0,0,1,0` for `{{1,2,4},{3}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rgs.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Serialized as its restricted-growth string.
impl serde::Serialize for SetPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_block_string())
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rgs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad restricted-growth entry {:?}", t)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rgs(rgs)
    }
}

/// Partition of positions by equal values.
pub fn kernel<T: PartialEq>(entries: &[T]) -> Result<SetPartition> {
    SetPartition::from_labels(entries)
}

/// Bell numbers B(0..=n).
pub fn bell_numbers(n: usize) -> Vec<u128> {
    // Bell triangle.
    let mut bells = vec![1u128];
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        bells.push(next[0]);
        row = next;
    }
    bells
}

/// All partitions of an `n`-element set in lexicographic restricted-growth order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<SetPartition>> {
    if n == 0 {
        return Err(Error::invalid("ground size must be at least 1"));
    }
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::limit(format!(
            "enumerating partitions of {} elements needs Bell({}) = {} entries (cap is n <= {})",
            n,
            n,
            bell_numbers(n)[n],
            MAX_ENUMERATION_SIZE
        )));
    }
    let mut out = Vec::with_capacity(bell_numbers(n)[n] as usize);
    let mut rgs = vec![0usize; n];
    // prefix_max[i] = max(rgs[0..=i])
    let mut prefix_max = vec![0usize; n];
    loop {
        out.push(SetPartition { rgs: rgs.clone() });
        // Find the rightmost position that can still grow.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if rgs[i] <= prefix_max[i - 1] {
                break;
            }
            i -= 1;
        }
        rgs[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
        for j in i + 1..n {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}

fn factorial(n: u64) -> i64 {
    (1..=n as i64).product()
}

/// Möbius function of the interval `[lower, upper]` of the partition lattice.
///
/// Closed form: the interval is isomorphic to a product of full partition
/// lattices, one per block of `upper`, of size equal to the number of
/// `lower`-blocks that block contains.
pub fn mobius(lower: &SetPartition, upper: &SetPartition) -> Result<i64> {
    if !lower.leq(upper)? {
        return Err(Error::invalid(format!(
            "mobius needs lower <= upper, got {} and {}",
            lower.to_block_string(),
            upper.to_block_string()
        )));
    }
    Ok(mobius_unchecked(lower, upper))
}

pub(crate) fn mobius_unchecked(lower: &SetPartition, upper: &SetPartition) -> i64 {
    let mut inner = vec![0u64; upper.block_count()];
    let mut counted = vec![false; lower.block_count()];
    for (i, &b) in lower.rgs.iter().enumerate() {
        if !counted[b] {
            counted[b] = true;
            inner[upper.rgs[i]] += 1;
        }
    }
    inner
        .iter()
        .map(|&m| {
            let sign = if (m - 1) % 2 == 0 { 1 } else { -1 };
            sign * factorial(m - 1)
        })
        .product()
}

/// Möbius value `mu(0, pi)` from the discrete partition, used for injective traces.
pub fn mobius_from_discrete(pi: &SetPartition) -> i64 {
    pi.blocks()
        .iter()
        .map(|b| {
            let m = b.len() as u64;
            let sign = if (m - 1) % 2 == 0 { 1 } else { -1 };
            sign * factorial(m - 1)
        })
        .product()
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    /// Recursive definition: mu(a,a)=1, sum_{a<=s<=b} mu(a,s) = 0 for a<b.
    fn mobius_recursive(all: &[SetPartition], a: &SetPartition, b: &SetPartition) -> i64 {
        if a == b {
            return 1;
        }
        let mut sum = 0;
        for s in all {
            if s != b && a.refines(s) && s.refines(b) {
                sum += mobius_recursive(all, a, s);
            }
        }
        -sum
    }

    #[test]
    fn kernel_examples() {
        let k = kernel(&[6, 1, 4, 1, 6, 2, 2, 2]).unwrap();
        assert_eq!(k.to_block_string(), "{{1,5},{2,4},{3},{6,7,8}}");
        assert_eq!(kernel(&[5, 5, 5]).unwrap(), SetPartition::full(3));
        assert_eq!(kernel(&[1, 2, 3]).unwrap(), SetPartition::discrete(3));
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_partitions(1).unwrap().len(), 1);
        assert_eq!(enumerate_partitions(3).unwrap().len(), 5);
        let four = enumerate_partitions(4).unwrap();
        assert_eq!(four.len(), 15);
        for w in four.windows(2) {
            assert!(w[0].rgs < w[1].rgs);
        }
        for (n, b) in [(5, 52), (6, 203), (7, 877)] {
            assert_eq!(enumerate_partitions(n).unwrap().len(), b);
        }
    }

    #[test]
    fn enumeration_guard() {
        match enumerate_partitions(13) {
            Err(Error::ResourceLimit(msg)) => assert!(msg.contains("27644437")),
            other => panic!("unexpected {:?}", other.map(|v| v.len())),
        }
        assert!(matches!(enumerate_partitions(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn brute_force_bell_matches_enumeration() {
        // Independent count: label sequences modulo relabeling.
        for n in 1..=5usize {
            let mut seen = std::collections::HashSet::new();
            let total = n.pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let labels: Vec<usize> = (0..n)
                    .map(|_| {
                        let d = c % n;
                        c /= n;
                        d
                    })
                    .collect();
                seen.insert(kernel(&labels).unwrap());
            }
            assert_eq!(seen.len(), enumerate_partitions(n).unwrap().len());
        }
    }

    #[test]
    fn order_examples() {
        let a = p("0,0,1");
        let b = p("0,1,1");
        assert!(!a.leq(&b).unwrap());
        assert!(!b.leq(&a).unwrap());
        assert!(SetPartition::discrete(3).leq(&a).unwrap());
        assert!(a.leq(&a).unwrap());
        assert!(a.leq(&p("0,0,0,0")).is_err());
    }

    #[test]
    fn join_meet_examples() {
        let a = p("0,0,1");
        let b = p("0,1,1");
        assert_eq!(a.join(&b).unwrap(), SetPartition::full(3));
        assert_eq!(SetPartition::full(3).meet(&a).unwrap(), a);
        assert_eq!(a.join(&SetPartition::discrete(3)).unwrap(), a);
        assert_eq!(a.meet(&b).unwrap(), SetPartition::discrete(3));
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(&p("0,1,0"), &p("0,1,0")).unwrap(), 1);
        assert_eq!(mobius(&SetPartition::discrete(3), &SetPartition::full(3)).unwrap(), 2);
        assert_eq!(mobius(&SetPartition::discrete(4), &SetPartition::full(4)).unwrap(), -6);
        assert!(mobius(&p("0,0,1"), &p("0,1,1")).is_err());
    }

    #[test]
    fn closed_form_matches_recursion() {
        for n in 1..=5 {
            let all = enumerate_partitions(n).unwrap();
            for a in &all {
                for b in &all {
                    if a.refines(b) {
                        assert_eq!(mobius(a, b).unwrap(), mobius_recursive(&all, a, b), "{:?} {:?}", a, b);
                    }
                }
            }
        }
    }

    #[test]
    fn rgs_round_trip_and_validation() {
        let q = p("0,0,1,0");
        assert_eq!(q.to_string(), "0,0,1,0");
        assert_eq!(q.to_block_string(), "{{1,2,4},{3}}");
        assert!("0,2".parse::<SetPartition>().is_err());
        assert!("1,0".parse::<SetPartition>().is_err());
    }

    #[test]
    fn induced_partition() {
        let fine = p("0,1,2,1");
        let coarse = p("0,1,0,1");
        let ind = fine.induced_on_blocks(&coarse).unwrap();
        assert_eq!(ind, p("0,1,0"));
    }
}
