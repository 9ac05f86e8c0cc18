//! Splits of the qubit set, containment, bipartite labels, antidiagonal
//! indexing and solution sets.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const MAX_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("qubit count {0} out of range 1..=8")]
    QubitCount(usize),
    #[error("part count k={k} out of range for N={n}")]
    PartCount { n: usize, k: usize },
    #[error("parts do not form a partition of 0..{n}: {reason}")]
    NotPartition { n: usize, reason: String },
    #[error("splits act on different qubit counts ({0} vs {1})")]
    Mismatch(usize, usize),
    #[error("bipartite label needs k=2, got k={0}")]
    NotBipartite(usize),
    #[error("antidiagonal label x={x} out of range for N={n}")]
    LabelOutOfRange { n: usize, x: usize },
    #[error("cannot parse split label {0:?}")]
    Parse(String),
}

/// An ordered partition of qubits `0..n` into `k` disjoint parts.
/// Each part is a bitmask with bit `q` set for qubit `q`; parts are sorted by
/// their smallest qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Split {
    n_qubits: usize,
    parts: Vec<u32>,
}

impl Split {
    pub fn from_masks(n_qubits: usize, masks: Vec<u32>) -> Result<Self, PartitionError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(PartitionError::QubitCount(n_qubits));
        }
        let full = (1u32 << n_qubits) - 1;
        let mut seen = 0u32;
        for &m in &masks {
            if m == 0 {
                return Err(PartitionError::NotPartition { n: n_qubits, reason: "empty part".into() });
            }
            if m & !full != 0 {
                return Err(PartitionError::NotPartition { n: n_qubits, reason: "qubit index out of range".into() });
            }
            if m & seen != 0 {
                return Err(PartitionError::NotPartition { n: n_qubits, reason: "parts overlap".into() });
            }
            seen |= m;
        }
        if seen != full {
            return Err(PartitionError::NotPartition { n: n_qubits, reason: "parts do not cover every qubit".into() });
        }
        let mut parts = masks;
        parts.sort_by_key(|m| m.trailing_zeros());
        Ok(Self { n_qubits, parts })
    }

    pub fn new(n_qubits: usize, parts: &[Vec<usize>]) -> Result<Self, PartitionError> {
        let mut masks = Vec::with_capacity(parts.len());
        for part in parts {
            let mut m = 0u32;
            for &q in part {
                if q >= n_qubits {
                    return Err(PartitionError::NotPartition { n: n_qubits, reason: format!("qubit {q} out of range") });
                }
                if m & (1 << q) != 0 {
                    return Err(PartitionError::NotPartition { n: n_qubits, reason: format!("qubit {q} repeated") });
                }
                m |= 1 << q;
            }
            masks.push(m);
        }
        Self::from_masks(n_qubits, masks)
    }

    /// Parse labels such as `a-(bc)`, `(ab)-(cd)` or `a-b-(cd)`.
    pub fn parse(n_qubits: usize, label: &str) -> Result<Self, PartitionError> {
        let err = || PartitionError::Parse(label.to_string());
        let mut masks = Vec::new();
        for token in label.split('-') {
            let inner = token.trim();
            let inner = match (inner.strip_prefix('('), inner.strip_suffix(')')) {
                (Some(_), Some(_)) => &inner[1..inner.len() - 1],
                (None, None) => inner,
                _ => return Err(err()),
            };
            if inner.is_empty() {
                return Err(err());
            }
            let mut m = 0u32;
            for ch in inner.chars() {
                if !ch.is_ascii_lowercase() {
                    return Err(err());
                }
                let q = (ch as u8 - b'a') as usize;
                if q >= n_qubits || m & (1 << q) != 0 {
                    return Err(err());
                }
                m |= 1 << q;
            }
            masks.push(m);
        }
        Self::from_masks(n_qubits, masks).map_err(|_| err())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn part_qubits(&self, index: usize) -> Vec<usize> {
        let m = self.parts[index];
        (0..self.n_qubits).filter(|q| m & (1 << q) != 0).collect()
    }

    pub fn part_of(&self, qubit: usize) -> usize {
        self.parts.iter().position(|m| m & (1 << qubit) != 0).expect("every qubit belongs to a part")
    }

    pub fn largest_part(&self) -> usize {
        self.parts.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    /// Merge parts `i` and `j` into one.
    pub fn join(&self, i: usize, j: usize) -> Split {
        let mut masks: Vec<u32> = Vec::with_capacity(self.parts.len() - 1);
        for (idx, &m) in self.parts.iter().enumerate() {
            if idx == j {
                continue;
            }
            masks.push(if idx == i { m | self.parts[j] } else { m });
        }
        Split::from_masks(self.n_qubits, masks).expect("joining parts keeps a partition")
    }

    /// Bitmask of a part in antidiagonal-bitstring coordinates (qubit q at bit n-1-q).
    fn part_bits(&self, index: usize) -> u32 {
        let m = self.parts[index];
        let mut out = 0u32;
        for q in 0..self.n_qubits {
            if m & (1 << q) != 0 {
                out |= 1 << (self.n_qubits - 1 - q);
            }
        }
        out
    }

    pub fn label(&self) -> String {
        self.parts
            .iter()
            .map(|&m| {
                let letters: String = (0..self.n_qubits).filter(|q| m & (1 << q) != 0).map(|q| (b'a' + q as u8) as char).collect();
                if letters.len() == 1 {
                    letters
                } else {
                    format!("({letters})")
                }
            })
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Split {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

/// All partitions of `0..n` into exactly `k` parts, in restricted-growth-string order.
pub fn enumerate_splits(n: usize, k: usize) -> Result<Vec<Split>, PartitionError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(PartitionError::QubitCount(n));
    }
    if k == 0 || k > n {
        return Err(PartitionError::PartCount { n, k });
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(pos: usize, used: usize, n: usize, k: usize, rgs: &mut Vec<usize>, out: &mut Vec<Split>) {
        if used + (n - pos) < k {
            return;
        }
        if pos == n {
            if used == k {
                let mut masks = vec![0u32; k];
                for (q, &b) in rgs.iter().enumerate() {
                    masks[b] |= 1 << q;
                }
                out.push(Split { n_qubits: n, parts: masks });
            }
            return;
        }
        let top = used.min(k - 1);
        for b in 0..=top {
            rgs[pos] = b;
            rec(pos + 1, used.max(b + 1), n, k, rgs, out);
        }
    }
    rgs[0] = 0;
    rec(1, 1, n, k, &mut rgs, &mut out);
    Ok(out)
}

/// Stirling number of the second kind.
pub fn stirling2(n: usize, k: usize) -> u64 {
    let mut table = vec![vec![0u64; k + 1]; n + 1];
    table[0][0] = 1;
    for i in 1..=n {
        for j in 1..=k.min(i) {
            table[i][j] = j as u64 * table[i - 1][j] + table[i - 1][j - 1];
        }
    }
    table[n][k]
}

/// True iff every part of `fine` lies inside some part of `coarse`.
pub fn contains(fine: &Split, coarse: &Split) -> Result<bool, PartitionError> {
    if fine.n_qubits != coarse.n_qubits {
        return Err(PartitionError::Mismatch(fine.n_qubits, coarse.n_qubits));
    }
    Ok(fine.parts.iter().all(|f| coarse.parts.iter().any(|c| f & !c == 0)))
}

/// A fixed-width bit string, most significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    pub width: usize,
    pub value: usize,
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width).rev() {
            f.write_str(if self.value >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Label j of a bipartite split: bit for qubit n (n < N-1) is 0 iff qubit n
/// shares a part with the last qubit.
pub fn bipartite_label(split: &Split) -> Result<BitString, PartitionError> {
    if split.k() != 2 {
        return Err(PartitionError::NotBipartite(split.k()));
    }
    let n = split.n_qubits;
    let last = split.part_of(n - 1);
    let mut value = 0usize;
    for q in 0..n - 1 {
        value <<= 1;
        if split.part_of(q) != last {
            value |= 1;
        }
    }
    Ok(BitString { width: n - 1, value })
}

/// The bipartite split carrying label `j` (inverse of [`bipartite_label`]).
pub fn split_from_label(n: usize, j: usize) -> Result<Split, PartitionError> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(PartitionError::QubitCount(n));
    }
    if j == 0 || j >= 1 << (n - 1) {
        return Err(PartitionError::LabelOutOfRange { n, x: j });
    }
    let mut with_last = 1u32 << (n - 1);
    for q in 0..n - 1 {
        if j >> (n - 2 - q) & 1 == 0 {
            with_last |= 1 << q;
        }
    }
    let full = (1u32 << n) - 1;
    Split::from_masks(n, vec![with_last, full & !with_last])
}

/// The correspondence between an operator label x and the antidiagonal entry
/// it probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AntidiagIndex {
    pub n_qubits: usize,
    pub x: usize,
    /// N-bit string with leading 0; qubit 0 is the most significant bit.
    pub bits: usize,
}

impl AntidiagIndex {
    /// One-based row j.
    pub fn row(&self) -> usize {
        self.bits + 1
    }

    /// One-based column j-bar = 2^N + 1 - j.
    pub fn col(&self) -> usize {
        (1 << self.n_qubits) + 1 - self.row()
    }

    pub fn row0(&self) -> usize {
        self.bits
    }

    pub fn col0(&self) -> usize {
        (1 << self.n_qubits) - 1 - self.bits
    }

    pub fn bitstring(&self) -> BitString {
        BitString { width: self.n_qubits, value: self.bits }
    }
}

fn antidiag_bits_raw(n: usize, x: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let inner = antidiag_bits_raw(n - 1, x / 2);
    if x.is_multiple_of(2) {
        inner
    } else {
        !inner & ((1 << (n - 1)) - 1)
    }
}

fn antidiag_label_raw(n: usize, bits: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let low = bits & ((1 << (n - 1)) - 1);
    if n == 2 {
        return low;
    }
    if low >> (n - 2) & 1 == 0 {
        2 * antidiag_label_raw(n - 1, low)
    } else {
        2 * antidiag_label_raw(n - 1, !low & ((1 << (n - 1)) - 1)) + 1
    }
}

pub fn antidiag_index(n: usize, x: usize) -> Result<AntidiagIndex, PartitionError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(PartitionError::QubitCount(n));
    }
    if x >= 1 << (n - 1) {
        return Err(PartitionError::LabelOutOfRange { n, x });
    }
    Ok(AntidiagIndex { n_qubits: n, x, bits: antidiag_bits_raw(n, x) })
}

/// Inverse of [`antidiag_index`] on any N-bit string; a string with leading 1 is
/// first replaced by its complement.
pub fn antidiag_label(n: usize, bits: usize) -> usize {
    let full = (1 << n) - 1;
    let canon = if bits >> (n - 1) & 1 == 1 { !bits & full } else { bits };
    antidiag_label_raw(n, canon)
}

/// Solution sets of one split: groups of x-labels tied together by the
/// separability inequalities for that split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub split: Split,
    pub sets: Vec<Vec<usize>>,
}

impl SolutionSet {
    fn canonical(split: Split, mut sets: Vec<Vec<usize>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
        }
        sets.sort();
        Self { split, sets }
    }

    /// Index of the set containing label x.
    pub fn set_of(&self, x: usize) -> usize {
        self.sets.iter().position(|s| s.contains(&x)).expect("solution sets cover every label")
    }
}

/// Orbits of the antidiagonal bitstrings under flipping all bits of a part,
/// identified up to global complement.
pub fn solution_sets(split: &Split) -> Result<SolutionSet, PartitionError> {
    let n = split.n_qubits;
    let k = split.k();
    if k < 2 {
        return Err(PartitionError::PartCount { n, k });
    }
    let half = 1usize << (n - 1);
    let part_bits: Vec<usize> = (0..k).map(|i| split.part_bits(i) as usize).collect();
    let mut assigned = vec![false; half];
    let mut sets = Vec::with_capacity(1 << (n - k));
    for x in 0..half {
        if assigned[x] {
            continue;
        }
        let b = antidiag_bits_raw(n, x);
        let mut orbit = Vec::with_capacity(1 << (k - 1));
        for subset in 0..(1usize << k) {
            let mut flip = 0usize;
            for (i, pb) in part_bits.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    flip |= pb;
                }
            }
            let y = antidiag_label(n, b ^ flip);
            if !assigned[y] {
                assigned[y] = true;
                orbit.push(y);
            }
        }
        sets.push(orbit);
    }
    Ok(SolutionSet::canonical(split.clone(), sets))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = a;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.0.len() {
            let r = self.find(i);
            map.entry(r).or_default().push(i);
        }
        map.into_values().collect()
    }
}

/// Solution sets obtained by merging the sets of every split that contains
/// `split` one level up. Bipartite splits use the pairwise rule: x and y are
/// tied iff, on each part, their bitstrings agree or are complementary.
pub fn solution_sets_by_refinement(split: &Split) -> Result<SolutionSet, PartitionError> {
    let n = split.n_qubits;
    let k = split.k();
    if k < 2 {
        return Err(PartitionError::PartCount { n, k });
    }
    let half = 1usize << (n - 1);
    let mut uf = UnionFind::new(half);
    if k == 2 {
        let masks: Vec<usize> = (0..2).map(|i| split.part_bits(i) as usize).collect();
        for x in 0..half {
            let bx = antidiag_bits_raw(n, x);
            for y in (x + 1)..half {
                let diff = bx ^ antidiag_bits_raw(n, y);
                if masks.iter().all(|&m| diff & m == 0 || diff & m == m) {
                    uf.union(x, y);
                }
            }
        }
    } else {
        for i in 0..k {
            for j in (i + 1)..k {
                let coarse = split.join(i, j);
                for set in solution_sets_by_refinement(&coarse)?.sets {
                    for w in set.windows(2) {
                        uf.union(w[0], w[1]);
                    }
                }
            }
        }
    }
    Ok(SolutionSet::canonical(split.clone(), uf.groups()))
}

/// Every k-partite split of N qubits together with its solution sets, and
/// for each label x the index of its set in each split.
#[derive(Debug, Clone)]
pub struct SplitLevel {
    pub n_qubits: usize,
    pub k: usize,
    pub entries: Vec<SolutionSet>,
    membership: Vec<Vec<usize>>,
}

impl SplitLevel {
    pub fn new(n: usize, k: usize) -> Result<Self, PartitionError> {
        if k < 2 {
            return Err(PartitionError::PartCount { n, k });
        }
        let splits = enumerate_splits(n, k)?;
        let entries: Vec<SolutionSet> = splits.iter().map(solution_sets).collect::<Result<_, _>>()?;
        let half = 1usize << (n - 1);
        let membership = entries
            .iter()
            .map(|e| {
                let mut m = vec![0usize; half];
                for (si, set) in e.sets.iter().enumerate() {
                    for &x in set {
                        m[x] = si;
                    }
                }
                m
            })
            .collect();
        Ok(Self { n_qubits: n, k, entries, membership })
    }

    /// The solution set of split `split_index` that contains x.
    pub fn set_containing(&self, split_index: usize, x: usize) -> &[usize] {
        &self.entries[split_index].sets[self.membership[split_index][x]]
    }
}
