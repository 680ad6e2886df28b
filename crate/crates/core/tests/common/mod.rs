#![allow(dead_code)]

use std::path::PathBuf;

use covred::{CoveringDecisionSystem, CoveringIndexSet, CoveringMutation, MutationFile, SystemFile};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn system_file(name: &str) -> SystemFile {
    serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

pub fn system(name: &str) -> CoveringDecisionSystem {
    system_file(name).into_system().unwrap()
}

pub fn mutation(system: &CoveringDecisionSystem, name: &str) -> CoveringMutation {
    let file: MutationFile = serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
    CoveringMutation::from_file(system, file).unwrap()
}

pub fn cset(m: usize, v: &[usize]) -> CoveringIndexSet {
    CoveringIndexSet::from_iter_checked(m, v.iter().copied())
}

pub fn lists(sets: &[CoveringIndexSet]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = sets.iter().map(CoveringIndexSet::to_vec).collect();
    out.sort();
    out
}

/// Plain-list view of a system used by the brute-force oracle.
#[derive(Clone, Debug)]
pub struct Plain {
    pub n: usize,
    pub coverings: Vec<Vec<Vec<usize>>>,
    pub decision: Vec<Vec<usize>>,
}

impl Plain {
    pub fn of(system: &CoveringDecisionSystem) -> Self {
        let f = system.to_file();
        Plain { n: f.n, coverings: f.coverings, decision: f.decision }
    }

    fn class_of(&self, x: usize) -> &Vec<usize> {
        self.decision.iter().find(|c| c.contains(&x)).unwrap()
    }

    fn admissible(&self, block: &[usize]) -> bool {
        let class = self.class_of(block[0]);
        block.iter().all(|y| class.contains(y))
    }

    /// Objects `x` with some block of a covering in `subset` such that
    /// `x ∈ K ⊆ D(x)`.
    pub fn pos(&self, subset: &[usize]) -> Vec<bool> {
        let mut out = vec![false; self.n];
        for &i in subset {
            for b in &self.coverings[i] {
                if self.admissible(b) {
                    for &x in b {
                        out[x] = true;
                    }
                }
            }
        }
        out
    }

    pub fn related(&self, x: usize) -> Vec<usize> {
        (0..self.coverings.len())
            .filter(|&i| self.coverings[i].iter().any(|b| b.contains(&x) && self.admissible(b)))
            .collect()
    }

    /// Every subset of coverings that preserves POS and loses it when any
    /// single member is dropped, by enumeration of all `2^m` masks.
    pub fn reducts(&self) -> Vec<Vec<usize>> {
        let m = self.coverings.len();
        let members = |mask: usize| (0..m).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>();
        let full = self.pos(&(0..m).collect::<Vec<_>>());
        let mut out = Vec::new();
        for mask in 0..(1usize << m) {
            let p = members(mask);
            if self.pos(&p) != full {
                continue;
            }
            let minimal = p.iter().all(|&i| self.pos(&members(mask & !(1 << i))) != full);
            if minimal {
                out.push(p);
            }
        }
        out.sort();
        out
    }
}

fn random_subset(rng: &mut ChaCha8Rng, of: &[usize]) -> Vec<usize> {
    loop {
        let s: Vec<usize> = of.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn cover_missing(rng: &mut ChaCha8Rng, n: usize, blocks: &mut Vec<Vec<usize>>) {
    for x in 0..n {
        if !blocks.iter().any(|b| b.contains(&x)) {
            if !blocks.is_empty() && rng.gen_bool(0.5) {
                let i = rng.gen_range(0..blocks.len());
                blocks[i].push(x);
                blocks[i].sort();
            } else {
                blocks.push(vec![x]);
            }
        }
    }
}

/// Random system with `n ≤ max_n` objects and `m ≤ max_m` coverings.
pub fn random_plain(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Plain {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let all: Vec<usize> = (0..n).collect();
    let coverings = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=n.max(2));
            let mut blocks: Vec<Vec<usize>> = (0..k).map(|_| random_subset(rng, &all)).collect();
            cover_missing(rng, n, &mut blocks);
            blocks
        })
        .collect();
    let k = rng.gen_range(1..=n.min(4));
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    let mut decision: Vec<Vec<usize>> = Vec::new();
    for c in 0..k {
        let class: Vec<usize> = (0..n).filter(|&x| labels[x] == c).collect();
        if !class.is_empty() {
            decision.push(class);
        }
    }
    Plain { n, coverings, decision }
}

pub fn build(p: &Plain) -> CoveringDecisionSystem {
    covred::build_system(p.n, &p.coverings, &p.decision).unwrap()
}

/// Refinement where each chosen block is partitioned into pieces.
pub fn split_refinement(rng: &mut ChaCha8Rng, blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for b in blocks {
        if b.len() < 2 || rng.gen_bool(0.4) {
            out.push(b.clone());
            continue;
        }
        let parts = rng.gen_range(2..=b.len().min(3));
        let mut shuffled = b.clone();
        shuffled.shuffle(rng);
        let mut pieces = vec![Vec::new(); parts];
        for (i, x) in shuffled.into_iter().enumerate() {
            let slot = if i < parts { i } else { rng.gen_range(0..parts) };
            pieces[slot].push(x);
        }
        for mut p in pieces {
            p.sort();
            out.push(p);
        }
    }
    out
}

/// Any refinement: random nonempty subsets of old blocks, patched to cover.
pub fn general_refinement(rng: &mut ChaCha8Rng, n: usize, blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for b in blocks {
        for _ in 0..rng.gen_range(1..=3) {
            out.push(random_subset(rng, b));
        }
    }
    for x in 0..n {
        if !out.iter().any(|b| b.contains(&x)) {
            out.push(vec![x]);
        }
    }
    out
}

/// Coarsening that merges groups of old blocks.
pub fn merge_coarsening(rng: &mut ChaCha8Rng, blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let groups = rng.gen_range(1..=blocks.len());
    let mut merged = vec![Vec::new(); groups];
    for (i, b) in blocks.iter().enumerate() {
        let g = if i < groups { i } else { rng.gen_range(0..groups) };
        merged[g].extend(b.iter().copied());
    }
    for g in merged.iter_mut() {
        g.sort();
        g.dedup();
    }
    merged
}

/// Any coarsening: old blocks grown by random objects, plus arbitrary extra blocks.
pub fn general_coarsening(rng: &mut ChaCha8Rng, n: usize, blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..n).collect();
    let mut out: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            let mut g = b.clone();
            if rng.gen_bool(0.5) {
                g.extend(random_subset(rng, &all));
            }
            g.sort();
            g.dedup();
            g
        })
        .collect();
    for _ in 0..rng.gen_range(0..=1) {
        out.push(random_subset(rng, &all));
    }
    out
}
