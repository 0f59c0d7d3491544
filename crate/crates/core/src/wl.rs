//! k-dimensional Weisfeiler–Leman refinement of k-tuple colourings.
//!
//! Round 0 colours a tuple by its atomic type. A round maps `t` to
//! `(c(t), {{ (atp(t, w), c(t[w/1]), …, c(t[w/k])) : w ∈ V }})`, which
//! matches the k+1 variable counting logic round by round. Signatures are
//! mapped to dense ids in sorted order, jointly over all graphs refined
//! together, so ids are comparable across graphs and runs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{ElemId, Graph};

/// Largest supported dimension.
pub const MAX_WL_DIM: usize = 3;
/// Largest number of k-tuples per graph.
pub const MAX_TUPLES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coloring {
    pub k: usize,
    pub round: usize,
    /// Colour of every k-tuple, tuples indexed little-endian in base `n`.
    pub colors: Vec<u32>,
    /// Number of colour classes after each round, starting with round 0.
    pub history: Vec<usize>,
}

impl Coloring {
    pub fn num_classes(&self) -> usize {
        *self.history.last().unwrap_or(&0)
    }

    /// Class sizes, sorted descending.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut counts = std::collections::BTreeMap::new();
        for &c in &self.colors {
            *counts.entry(c).or_insert(0usize) += 1;
        }
        let mut sizes: Vec<usize> = counts.into_values().collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn color_of(&self, n: usize, tuple: &[ElemId]) -> u32 {
        self.colors[tuple_index(n, tuple)]
    }
}

fn tuple_index(n: usize, t: &[ElemId]) -> usize {
    t.iter().rev().fold(0, |acc, &e| acc * n + e as usize)
}

fn tuple_count(n: usize, k: usize) -> Result<usize> {
    if !(1..=MAX_WL_DIM).contains(&k) {
        return Err(Error::UnsupportedDimension(k));
    }
    n.checked_pow(k as u32).filter(|&c| c <= MAX_TUPLES).ok_or_else(|| Error::SizeExceeded(format!("{n}^{k} tuples")))
}

fn decode(n: usize, k: usize, mut idx: usize, out: &mut [ElemId]) {
    for slot in out.iter_mut().take(k) {
        *slot = (idx % n) as ElemId;
        idx /= n;
    }
}

/// Equality and adjacency pattern of a tuple, as a bit mask over ordered pairs `i < j`.
fn atomic_type(g: &Graph, t: &[ElemId]) -> u64 {
    let mut bits = 0u64;
    let mut pos = 0;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if t[i] == t[j] {
                bits |= 1 << pos;
            }
            if g.adjacent(t[i], t[j]) {
                bits |= 1 << (pos + 1);
            }
            pos += 2;
        }
    }
    bits
}

/// Dense ids by sorted signature, shared across all inputs.
fn canonicalize<S: Ord + Clone>(sigs: &[Vec<S>]) -> Vec<Vec<u32>> {
    let mut all: Vec<&S> = sigs.iter().flatten().collect();
    all.sort();
    all.dedup();
    sigs.iter().map(|v| v.iter().map(|s| all.binary_search(&s).expect("present") as u32).collect()).collect()
}

fn initial(graphs: &[&Graph], k: usize) -> Result<Vec<Vec<u32>>> {
    let mut sigs = Vec::with_capacity(graphs.len());
    for g in graphs {
        let count = tuple_count(g.n(), k)?;
        let mut t = vec![0; k];
        sigs.push(
            (0..count)
                .map(|idx| {
                    decode(g.n(), k, idx, &mut t);
                    atomic_type(g, &t)
                })
                .collect::<Vec<_>>(),
        );
    }
    Ok(canonicalize(&sigs))
}

type Signature = (u32, Vec<(u64, Vec<u32>)>);

fn refine(graphs: &[&Graph], k: usize, colors: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let sigs: Vec<Vec<Signature>> = graphs
        .iter()
        .zip(colors)
        .map(|(g, col)| {
            let n = g.n();
            let mut t = vec![0; k];
            let mut ext = vec![0; k + 1];
            (0..col.len())
                .map(|idx| {
                    decode(n, k, idx, &mut t);
                    let mut multiset: Vec<(u64, Vec<u32>)> = (0..n as ElemId)
                        .map(|w| {
                            ext[..k].copy_from_slice(&t);
                            ext[k] = w;
                            let subs = (0..k)
                                .map(|i| {
                                    let old = t[i];
                                    t[i] = w;
                                    let c = col[tuple_index(n, &t)];
                                    t[i] = old;
                                    c
                                })
                                .collect();
                            (atomic_type(g, &ext), subs)
                        })
                        .collect();
                    multiset.sort_unstable();
                    (col[idx], multiset)
                })
                .collect()
        })
        .collect();
    canonicalize(&sigs)
}

fn class_count(colors: &[Vec<u32>]) -> usize {
    let mut all: Vec<u32> = colors.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

pub fn initial_coloring(g: &Graph, k: usize) -> Result<Coloring> {
    let colors = initial(&[g], k)?.pop().expect("one graph");
    let classes = class_count(std::slice::from_ref(&colors));
    Ok(Coloring { k, round: 0, colors, history: vec![classes] })
}

/// Refines until a round creates no new class. Returns the stable colouring
/// and the number of rounds executed, the confirming round included.
pub fn refine_to_stable(g: &Graph, k: usize) -> Result<(Coloring, usize)> {
    let mut c = initial_coloring(g, k)?;
    loop {
        let next = refine(&[g], k, std::slice::from_ref(&c.colors)).pop().expect("one graph");
        let classes = class_count(std::slice::from_ref(&next));
        c.round += 1;
        c.colors = next;
        c.history.push(classes);
        if classes == c.history[c.history.len() - 2] {
            let rounds = c.round;
            return Ok((c, rounds));
        }
    }
}

fn histograms_differ(colors: &[Vec<u32>]) -> bool {
    let hist = |v: &Vec<u32>| {
        let mut h = v.clone();
        h.sort_unstable();
        h
    };
    hist(&colors[0]) != hist(&colors[1])
}

/// The least round `r ≤ max_rounds` after which some colour has different
/// multiplicities in `g` and `h`.
pub fn distinguish(g: &Graph, h: &Graph, k: usize, max_rounds: usize) -> Result<Option<usize>> {
    Ok(distinguish_report(g, h, k, max_rounds)?.rounds)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistinguishReport {
    pub distinguished: bool,
    pub rounds: Option<usize>,
    /// Class sizes of the joint colouring restricted to each graph, per round.
    pub class_sizes_per_round: Vec<[Vec<usize>; 2]>,
}

pub fn distinguish_report(g: &Graph, h: &Graph, k: usize, max_rounds: usize) -> Result<DistinguishReport> {
    if g.n() != h.n() {
        return Err(Error::SizeMismatch(g.n(), h.n()));
    }
    let graphs = [g, h];
    let mut colors = initial(&graphs, k)?;
    let sizes = |colors: &[Vec<u32>]| -> [Vec<usize>; 2] {
        let one = |v: &Vec<u32>| Coloring { k, round: 0, colors: v.clone(), history: Vec::new() }.class_sizes();
        [one(&colors[0]), one(&colors[1])]
    };
    let mut per_round = vec![sizes(&colors)];
    let mut classes = class_count(&colors);
    for r in 0..=max_rounds {
        if histograms_differ(&colors) {
            return Ok(DistinguishReport { distinguished: true, rounds: Some(r), class_sizes_per_round: per_round });
        }
        if r == max_rounds {
            break;
        }
        let next = refine(&graphs, k, &colors);
        let next_classes = class_count(&next);
        colors = next;
        per_round.push(sizes(&colors));
        if next_classes == classes {
            // stable jointly: equal histograms stay equal
            break;
        }
        classes = next_classes;
    }
    Ok(DistinguishReport { distinguished: false, rounds: None, class_sizes_per_round: per_round })
}
