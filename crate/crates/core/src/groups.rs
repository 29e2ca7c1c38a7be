//! Finite transformation groups and their actions on samples.
//!
//! Five group families are supported: componentwise sign changes, full
//! permutations, permutations restricted to strata, within-pair swaps, and
//! per-cluster sign changes. Every group is finite with an exactly
//! computable element count, supports uniform sampling, and can be
//! enumerated when small enough.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// A family of transformations together with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GroupKind {
    /// All 2^n sign vectors acting componentwise on scalar values.
    SignChange { n: usize },
    /// All n! reorderings of the action target.
    FullPermutation { n: usize },
    /// Permutations that never move an index across a stratum boundary.
    /// `strata[i]` is the stratum label of index `i`.
    StratifiedPermutation { strata: Vec<usize> },
    /// Independent swaps within disjoint pairs. `pairs[i]` is the pair
    /// label of index `i`; every label must appear exactly twice.
    PairSwap { pairs: Vec<usize> },
    /// All 2^q sign vectors acting on whole cluster rows.
    ClusterSignChange { q: usize },
}

/// Discriminant carried by sampled and enumerated elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupTag {
    SignChange,
    FullPermutation,
    StratifiedPermutation,
    PairSwap,
    ClusterSignChange,
}

/// Packed vector of sign bits; a set bit means "flip".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignVec {
    words: Vec<u64>,
    len: usize,
}

impl SignVec {
    pub fn zeros(len: usize) -> Self {
        SignVec {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Low `len` bits of `bits` as a sign vector (len <= 64).
    pub fn from_bits(bits: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        let mask = if len == 64 {
            u64::MAX
        } else {
            (1u64 << len) - 1
        };
        SignVec {
            words: vec![bits & mask],
            len,
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect();
        let spare = words.len() * 64 - len;
        if spare > 0 {
            if let Some(last) = words.last_mut() {
                *last &= u64::MAX >> spare;
            }
        }
        SignVec { words, len }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn flip_at(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, flip: bool) {
        let (w, b) = (i / 64, i % 64);
        if flip {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    fn xor(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        SignVec {
            words,
            len: self.len,
        }
    }

    fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

/// How an element transforms the action target of a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Action {
    /// Flip the sign of unit `i` (or of cluster row `i`).
    Signs(SignVec),
    /// Reorder: output slot `i` takes input slot `perm[i]`.
    Permutation(Vec<u32>),
}

/// One element of a finite transformation group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupElement {
    pub kind: GroupTag,
    pub action: Action,
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        match &self.action {
            Action::Signs(s) => s.is_zero(),
            Action::Permutation(p) => p.iter().enumerate().all(|(i, &v)| v as usize == i),
        }
    }
}

impl GroupKind {
    pub fn tag(&self) -> GroupTag {
        match self {
            GroupKind::SignChange { .. } => GroupTag::SignChange,
            GroupKind::FullPermutation { .. } => GroupTag::FullPermutation,
            GroupKind::StratifiedPermutation { .. } => GroupTag::StratifiedPermutation,
            GroupKind::PairSwap { .. } => GroupTag::PairSwap,
            GroupKind::ClusterSignChange { .. } => GroupTag::ClusterSignChange,
        }
    }

    /// Number of indices the group acts on.
    pub fn action_len(&self) -> usize {
        match self {
            GroupKind::SignChange { n } | GroupKind::FullPermutation { n } => *n,
            GroupKind::StratifiedPermutation { strata } => strata.len(),
            GroupKind::PairSwap { pairs } => pairs.len(),
            GroupKind::ClusterSignChange { q } => *q,
        }
    }

    /// Check well-formedness of the parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupKind::SignChange { n }
            | GroupKind::FullPermutation { n }
            | GroupKind::ClusterSignChange { q: n } => {
                if *n == 0 {
                    return Err(Error::structure("group must act on at least one index"));
                }
            }
            GroupKind::StratifiedPermutation { strata } => {
                if strata.is_empty() {
                    return Err(Error::structure(
                        "stratified group needs at least one index",
                    ));
                }
            }
            GroupKind::PairSwap { pairs } => {
                if pairs.is_empty() {
                    return Err(Error::structure("pair-swap group needs at least one pair"));
                }
                let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
                for &label in pairs {
                    *counts.entry(label).or_insert(0) += 1;
                }
                if let Some((label, c)) = counts.iter().find(|(_, &c)| c != 2) {
                    return Err(Error::structure(format!(
                        "pair label {label} has {c} members, expected exactly 2"
                    )));
                }
            }
        }
        if self.action_len() > u32::MAX as usize {
            return Err(Error::structure("group action length exceeds u32 range"));
        }
        Ok(())
    }

    /// Exact number of group elements.
    pub fn element_count(&self) -> Result<BigUint> {
        self.validate()?;
        Ok(match self {
            GroupKind::SignChange { n } => BigUint::one() << *n,
            GroupKind::FullPermutation { n } => factorial(*n),
            GroupKind::StratifiedPermutation { strata } => stratum_positions(strata)
                .values()
                .map(|idx| factorial(idx.len()))
                .product(),
            GroupKind::PairSwap { pairs } => BigUint::one() << pair_list(pairs)?.len(),
            GroupKind::ClusterSignChange { q } => BigUint::one() << *q,
        })
    }

    /// The identity element.
    pub fn identity(&self) -> GroupElement {
        let action = match self {
            GroupKind::SignChange { n } => Action::Signs(SignVec::zeros(*n)),
            GroupKind::ClusterSignChange { q } => Action::Signs(SignVec::zeros(*q)),
            _ => Action::Permutation(identity_perm(self.action_len())),
        };
        GroupElement {
            kind: self.tag(),
            action,
        }
    }

    /// Draw one element uniformly at random.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroupElement> {
        self.validate()?;
        let action = match self {
            GroupKind::SignChange { n } => Action::Signs(SignVec::random(*n, rng)),
            GroupKind::ClusterSignChange { q } => Action::Signs(SignVec::random(*q, rng)),
            GroupKind::FullPermutation { n } => {
                let mut p = identity_perm(*n);
                p.shuffle(rng);
                Action::Permutation(p)
            }
            GroupKind::StratifiedPermutation { strata } => {
                let mut p = identity_perm(strata.len());
                for positions in stratum_positions(strata).values() {
                    let mut images = positions.clone();
                    images.shuffle(rng);
                    for (&slot, &img) in positions.iter().zip(&images) {
                        p[slot as usize] = img;
                    }
                }
                Action::Permutation(p)
            }
            GroupKind::PairSwap { pairs } => {
                let mut p = identity_perm(pairs.len());
                for &(a, b) in &pair_list(pairs)? {
                    if rng.random::<bool>() {
                        p.swap(a as usize, b as usize);
                    }
                }
                Action::Permutation(p)
            }
        };
        Ok(GroupElement {
            kind: self.tag(),
            action,
        })
    }

    /// Stream every element exactly once, identity first.
    ///
    /// Refuses with [`Error::CapExceeded`] when the group has more than
    /// `cap` elements.
    pub fn enumerate(&self, cap: usize) -> Result<Enumerator> {
        let m = self.element_count()?;
        if m > BigUint::from(cap) {
            return Err(Error::CapExceeded { m, cap });
        }
        let state = match self {
            GroupKind::SignChange { n } => EnumState::Signs {
                next: 0,
                total: 1u64 << *n,
                len: *n,
            },
            GroupKind::ClusterSignChange { q } => EnumState::Signs {
                next: 0,
                total: 1u64 << *q,
                len: *q,
            },
            GroupKind::FullPermutation { n } => EnumState::Perms {
                current: Some(identity_perm(*n)),
            },
            GroupKind::StratifiedPermutation { strata } => {
                let blocks: Vec<Vec<u32>> = stratum_positions(strata).into_values().collect();
                let locals = blocks.iter().map(|b| identity_perm(b.len())).collect();
                EnumState::Stratified {
                    blocks,
                    locals,
                    n: strata.len(),
                    done: false,
                }
            }
            GroupKind::PairSwap { pairs } => {
                let list = pair_list(pairs)?;
                EnumState::PairSwaps {
                    n: pairs.len(),
                    next: 0,
                    total: 1u64 << list.len(),
                    pairs: list,
                }
            }
        };
        Ok(Enumerator {
            tag: self.tag(),
            state,
        })
    }
}

/// Compose two elements payload-wise: `apply(compose(g, h), x) ==
/// apply(g, apply(h, x))`.
pub fn compose(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    let action = match (&g.action, &h.action) {
        (Action::Signs(a), Action::Signs(b)) if a.len() == b.len() => Action::Signs(a.xor(b)),
        (Action::Permutation(a), Action::Permutation(b)) if a.len() == b.len() => {
            Action::Permutation(a.iter().map(|&i| b[i as usize]).collect())
        }
        _ => {
            return Err(Error::structure(
                "cannot compose elements of different shapes",
            ))
        }
    };
    Ok(GroupElement {
        kind: g.kind,
        action,
    })
}

/// Apply a group element to a sample, returning the transformed copy.
pub fn apply<S: Scalar>(g: &GroupElement, x: &Sample<S>) -> Result<Sample<S>> {
    let mut out = x.clone();
    apply_into(g, x, &mut out)?;
    Ok(out)
}

/// Apply `g` to `src`, writing the transformed target into `dst`.
///
/// `dst` must be a clone of `src` (same layout); only the action target is
/// rewritten, so a scratch sample can be reused across many applications.
pub fn apply_into<S: Scalar>(g: &GroupElement, src: &Sample<S>, dst: &mut Sample<S>) -> Result<()> {
    match (&g.action, src, dst) {
        (Action::Signs(signs), Sample::Values(v), Sample::Values(out)) => {
            check_len(signs.len(), v.len())?;
            for i in 0..v.len() {
                out[i] = if signs.flip_at(i) { -v[i] } else { v[i] };
            }
            Ok(())
        }
        (Action::Signs(signs), Sample::Clusters(rows), Sample::Clusters(out)) => {
            check_len(signs.len(), rows.len())?;
            for i in 0..rows.len() {
                if signs.flip_at(i) {
                    for (o, &r) in out[i].iter_mut().zip(&rows[i]) {
                        *o = -r;
                    }
                } else {
                    out[i].copy_from_slice(&rows[i]);
                }
            }
            Ok(())
        }
        (Action::Permutation(p), Sample::Values(v), Sample::Values(out)) => {
            check_len(p.len(), v.len())?;
            for (o, &j) in out.iter_mut().zip(p) {
                *o = v[j as usize];
            }
            Ok(())
        }
        (
            Action::Permutation(p),
            Sample::MultiGroup { values, .. },
            Sample::MultiGroup { values: out, .. },
        ) => {
            check_len(p.len(), values.len())?;
            for (o, &j) in out.iter_mut().zip(p) {
                *o = values[j as usize];
            }
            Ok(())
        }
        (Action::Permutation(p), Sample::Paired { y, .. }, Sample::Paired { y: out, .. }) => {
            check_len(p.len(), y.len())?;
            for (o, &j) in out.iter_mut().zip(p) {
                *o = y[j as usize];
            }
            Ok(())
        }
        (
            Action::Permutation(p),
            Sample::VectorGroup { rows, .. },
            Sample::VectorGroup { rows: out, .. },
        ) => {
            check_len(p.len(), rows.len())?;
            for (o, &j) in out.iter_mut().zip(p) {
                o.copy_from_slice(&rows[j as usize]);
            }
            Ok(())
        }
        (Action::Permutation(p), Sample::Bits(b), Sample::Bits(out)) => {
            check_len(p.len(), b.len())?;
            for (o, &j) in out.iter_mut().zip(p) {
                *o = b[j as usize];
            }
            Ok(())
        }
        (Action::Permutation(p), Sample::Experiment(e), Sample::Experiment(out)) => {
            check_len(p.len(), e.treatments.len())?;
            for (o, &j) in out.treatments.iter_mut().zip(p) {
                *o = e.treatments[j as usize];
            }
            Ok(())
        }
        _ => Err(Error::structure(
            "group action does not match the sample layout",
        )),
    }
}

fn check_len(payload: usize, target: usize) -> Result<()> {
    if payload != target {
        return Err(Error::structure(format!(
            "element payload length {payload} does not match sample length {target}"
        )));
    }
    Ok(())
}

fn identity_perm(n: usize) -> Vec<u32> {
    (0..n as u32).collect()
}

fn factorial(n: usize) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Positions of each stratum, keyed by label (deterministic order).
fn stratum_positions(strata: &[usize]) -> BTreeMap<usize, Vec<u32>> {
    let mut map: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (i, &label) in strata.iter().enumerate() {
        map.entry(label).or_default().push(i as u32);
    }
    map
}

/// Disjoint index pairs ordered by their first member.
fn pair_list(pairs: &[usize]) -> Result<Vec<(u32, u32)>> {
    let mut map: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (i, &label) in pairs.iter().enumerate() {
        map.entry(label).or_default().push(i as u32);
    }
    let mut out = Vec::with_capacity(map.len());
    for (label, members) in map {
        if members.len() != 2 {
            return Err(Error::structure(format!(
                "pair label {label} has {} members, expected exactly 2",
                members.len()
            )));
        }
        out.push((members[0], members[1]));
    }
    out.sort_by_key(|&(a, _)| a);
    Ok(out)
}

/// Lazy stream over all elements of a group, identity first.
pub struct Enumerator {
    tag: GroupTag,
    state: EnumState,
}

enum EnumState {
    Signs {
        next: u64,
        total: u64,
        len: usize,
    },
    Perms {
        current: Option<Vec<u32>>,
    },
    Stratified {
        blocks: Vec<Vec<u32>>,
        locals: Vec<Vec<u32>>,
        n: usize,
        done: bool,
    },
    PairSwaps {
        pairs: Vec<(u32, u32)>,
        n: usize,
        next: u64,
        total: u64,
    },
}

impl Iterator for Enumerator {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let action = match &mut self.state {
            EnumState::Signs { next, total, len } => {
                if *next >= *total {
                    return None;
                }
                let sv = SignVec::from_bits(*next, *len);
                *next += 1;
                Action::Signs(sv)
            }
            EnumState::Perms { current } => {
                let p = current.take()?;
                let emitted = p.clone();
                *current = next_permutation(p);
                Action::Permutation(emitted)
            }
            EnumState::Stratified {
                blocks,
                locals,
                n,
                done,
            } => {
                if *done {
                    return None;
                }
                let mut p = identity_perm(*n);
                for (block, local) in blocks.iter().zip(locals.iter()) {
                    for (slot_idx, &img_idx) in local.iter().enumerate() {
                        p[block[slot_idx] as usize] = block[img_idx as usize];
                    }
                }
                // Odometer: advance the first stratum, carrying on wrap.
                let mut carried = true;
                for (local, block) in locals.iter_mut().zip(blocks.iter()) {
                    match next_permutation(std::mem::take(local)) {
                        Some(next) => {
                            *local = next;
                            carried = false;
                            break;
                        }
                        None => *local = identity_perm(block.len()),
                    }
                }
                if carried {
                    *done = true;
                }
                Action::Permutation(p)
            }
            EnumState::PairSwaps {
                pairs,
                n,
                next,
                total,
            } => {
                if *next >= *total {
                    return None;
                }
                let mut p = identity_perm(*n);
                for (j, &(a, b)) in pairs.iter().enumerate() {
                    if (*next >> j) & 1 == 1 {
                        p.swap(a as usize, b as usize);
                    }
                }
                *next += 1;
                Action::Permutation(p)
            }
        };
        Some(GroupElement {
            kind: self.tag,
            action,
        })
    }
}

/// Next permutation in lexicographic order, or `None` after the last.
fn next_permutation(mut p: Vec<u32>) -> Option<Vec<u32>> {
    if p.len() < 2 {
        return None;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    Some(p)
}
