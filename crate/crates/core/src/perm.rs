//! Permutations in one-line notation, 0-based: `p[i]` is the image of `i`.

use crate::error::{Error, Result};

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

pub fn check_permutation(p: &[usize]) -> Result<()> {
    if is_permutation(p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{:?} is not a permutation of 0..{}", p, p.len())))
    }
}

pub fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// `(p ∘ q)(i) = p(q(i))`.
pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

pub fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// Cycles, each starting at its smallest element, ordered by that element.
pub fn cycles(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut c = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            c.push(i);
            i = p[i];
        }
        out.push(c);
    }
    out
}

pub fn cycle_count(p: &[usize]) -> usize {
    cycles(p).len()
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p = identity(n);
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Parses one-line notation, 1-based and comma separated (`"2,1,3"`).
pub fn parse_one_line(s: &str) -> Result<Vec<usize>> {
    let p = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .map(|v| v - 1)
                .ok_or_else(|| Error::Parse(format!("bad permutation entry {:?}", x)))
        })
        .collect::<Result<Vec<usize>>>()?;
    check_permutation(&p)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(all_permutations(0).len(), 1);
        assert_eq!(all_permutations(4).len(), 24);
        let all = all_permutations(3);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[5], vec![2, 1, 0]);
        assert!(all.iter().all(|p| is_permutation(p)));
    }

    #[test]
    fn group_laws() {
        let p = vec![1, 2, 0, 3];
        let q = vec![3, 0, 1, 2];
        assert_eq!(compose(&p, &inverse(&p)), identity(4));
        assert_eq!(compose(&compose(&p, &q), &inverse(&q)), p);
        assert_eq!(cycles(&p), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(cycle_count(&identity(5)), 5);
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_one_line("2,1,3").unwrap(), vec![1, 0, 2]);
        assert!(parse_one_line("1,1").is_err());
        assert!(parse_one_line("0,1").is_err());
    }
}
