//! Buchberger's algorithm for submodules of a free module `ℚ[x]^n`, with
//! each element carrying a tracked tail in `ℚ[x]^k`.
//!
//! Elements live in `ℚ[x]^n ⊕ ℚ[x]^k`: the head block holds the vector
//! field, the tail block records how it was built from the input
//! generators. Terms are ordered by block first (head above tail), then
//! term-over-position within a block: graded reverse lexicographic on the
//! monomial, ties broken so that lower position indices are larger.
//!
//! In [`Mode::Tracked`] only head terms take part in the ordering. Tails are
//! carried along as certificates, and elements whose head vanishes are
//! dropped. In [`Mode::Eliminate`] every term is active, and the reduced
//! basis restricted to elements with a tail leading term generates the
//! syzygy module of the inputs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly};

pub const HEAD: u8 = 1;
pub const TAIL: u8 = 0;

/// Work caps for one Gröbner computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroebnerOptions {
    /// Largest permitted total degree of an S-pair lcm.
    pub degree_cap: u32,
    /// Largest permitted number of elementary reduction steps.
    pub max_steps: u64,
}

impl Default for GroebnerOptions {
    fn default() -> Self {
        GroebnerOptions {
            degree_cap: 20,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Tracked,
    Eliminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Key {
    pub block: u8,
    pub mono: Monomial,
    pub pos: usize,
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.block
            .cmp(&other.block)
            .then_with(|| self.mono.cmp(&other.mono))
            .then_with(|| other.pos.cmp(&self.pos))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Key {
    fn divides(&self, other: &Key) -> bool {
        self.block == other.block && self.pos == other.pos && self.mono.divides(&other.mono)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Elem {
    terms: BTreeMap<Key, BigRational>,
}

impl Elem {
    /// Packs a head vector and a tail vector into one element.
    pub fn from_parts(head: &[Poly], tail: &[Poly]) -> Elem {
        let mut terms = BTreeMap::new();
        for (block, parts) in [(HEAD, head), (TAIL, tail)] {
            for (pos, p) in parts.iter().enumerate() {
                for (m, c) in p.terms() {
                    terms.insert(
                        Key {
                            block,
                            mono: m.clone(),
                            pos,
                        },
                        c.clone(),
                    );
                }
            }
        }
        Elem { terms }
    }

    /// Unpacks into `(head, tail)` with the given ranks.
    pub fn to_parts(&self, nvars: usize, head_rank: usize, tail_rank: usize) -> (Vec<Poly>, Vec<Poly>) {
        let mut head = vec![Poly::zero(nvars); head_rank];
        let mut tail = vec![Poly::zero(nvars); tail_rank];
        for (k, c) in &self.terms {
            let slot = if k.block == HEAD {
                &mut head[k.pos]
            } else {
                &mut tail[k.pos]
            };
            slot.add_term(k.mono.clone(), c.clone());
        }
        (head, tail)
    }

    fn lead(&self, mode: Mode) -> Option<(&Key, &BigRational)> {
        let (k, c) = self.terms.last_key_value()?;
        (mode == Mode::Eliminate || k.block == HEAD).then_some((k, c))
    }

    fn is_active_zero(&self, mode: Mode) -> bool {
        self.lead(mode).is_none()
    }

    fn add_scaled_shift(&mut self, other: &Elem, mono: &Monomial, c: &BigRational) {
        for (k, a) in &other.terms {
            let key = Key {
                block: k.block,
                mono: k.mono.mul(mono),
                pos: k.pos,
            };
            let v = a * c;
            match self.terms.entry(key) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(v);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    *e.get_mut() += v;
                    if e.get().is_zero() {
                        e.remove();
                    }
                }
            }
        }
    }

    fn make_monic(&mut self, mode: Mode) {
        if let Some((_, lc)) = self.lead(mode) {
            if !lc.is_one() {
                let inv = BigRational::one() / lc;
                for v in self.terms.values_mut() {
                    *v *= &inv;
                }
            }
        }
    }
}

struct Engine<'a> {
    mode: Mode,
    opts: &'a GroebnerOptions,
    steps: u64,
}

impl Engine<'_> {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.opts.max_steps {
            return Err(Error::Budget(format!(
                "more than {} reduction steps",
                self.opts.max_steps
            )));
        }
        Ok(())
    }

    /// Full reduction of every active term of `f` against `basis`.
    fn reduce(&mut self, mut f: Elem, basis: &[Elem], skip: Option<usize>) -> Result<Elem> {
        let mut bound: Option<Key> = None;
        loop {
            let next = match &bound {
                None => f.terms.last_key_value(),
                Some(b) => f.terms.range(..b.clone()).next_back(),
            }
            .map(|(k, c)| (k.clone(), c.clone()));
            let Some((key, coeff)) = next else { break };
            if self.mode == Mode::Tracked && key.block != HEAD {
                break;
            }
            let divisor = basis.iter().enumerate().find_map(|(i, g)| {
                if Some(i) == skip {
                    return None;
                }
                let (lk, lc) = g.lead(self.mode)?;
                lk.divides(&key).then(|| (g, lk.mono.quotient_of(&key.mono).unwrap(), lc))
            });
            match divisor {
                Some((g, m, lc)) => {
                    self.tick()?;
                    f.add_scaled_shift(g, &m, &(-(coeff / lc)));
                }
                None => bound = Some(key),
            }
        }
        Ok(f)
    }

    fn s_element(&self, a: &Elem, b: &Elem) -> Elem {
        let (ka, ca) = a.lead(self.mode).unwrap();
        let (kb, cb) = b.lead(self.mode).unwrap();
        let l = ka.mono.lcm(&kb.mono);
        let ma = ka.mono.quotient_of(&l).unwrap();
        let mb = kb.mono.quotient_of(&l).unwrap();
        let mut s = Elem {
            terms: BTreeMap::new(),
        };
        s.add_scaled_shift(a, &ma, &(BigRational::one() / ca));
        s.add_scaled_shift(b, &mb, &(-(BigRational::one() / cb)));
        s
    }

    fn pair_lcm(&self, basis: &[Elem], i: usize, j: usize) -> Option<Key> {
        let (ka, _) = basis[i].lead(self.mode)?;
        let (kb, _) = basis[j].lead(self.mode)?;
        (ka.block == kb.block && ka.pos == kb.pos).then(|| Key {
            block: ka.block,
            mono: ka.mono.lcm(&kb.mono),
            pos: ka.pos,
        })
    }

    fn run(&mut self, inputs: Vec<Elem>) -> Result<Vec<Elem>> {
        let mut basis: Vec<Elem> = Vec::new();
        for f in inputs {
            let mut r = self.reduce(f, &basis, None)?;
            if r.is_active_zero(self.mode) {
                continue;
            }
            r.make_monic(self.mode);
            basis.push(r);
        }

        // Pending pairs keyed by (lcm, i, j) so the smallest lcm is processed
        // first, with index order as the deterministic tie-break.
        let mut pending: BTreeSet<(Key, usize, usize)> = BTreeSet::new();
        let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
        for j in 0..basis.len() {
            for i in 0..j {
                if let Some(l) = self.pair_lcm(&basis, i, j) {
                    pending.insert((l, i, j));
                } else {
                    done.insert((i, j));
                }
            }
        }

        while let Some((lcm, i, j)) = pending.pop_first() {
            done.insert((i, j));
            if lcm.mono.degree() > self.opts.degree_cap {
                return Err(Error::Budget(format!(
                    "S-pair degree {} exceeds cap {}",
                    lcm.mono.degree(),
                    self.opts.degree_cap
                )));
            }
            // Chain criterion: some third element's leading term divides
            // the lcm and both companion pairs are already handled.
            let chain = (0..basis.len()).any(|l| {
                l != i
                    && l != j
                    && basis[l]
                        .lead(self.mode)
                        .is_some_and(|(lk, _)| lk.divides(&lcm))
                    && done.contains(&(i.min(l), i.max(l)))
                    && done.contains(&(j.min(l), j.max(l)))
            });
            if chain {
                continue;
            }
            let s = self.s_element(&basis[i], &basis[j]);
            let mut r = self.reduce(s, &basis, None)?;
            if r.is_active_zero(self.mode) {
                continue;
            }
            r.make_monic(self.mode);
            let new = basis.len();
            basis.push(r);
            for i in 0..new {
                if let Some(l) = self.pair_lcm(&basis, i, new) {
                    pending.insert((l, i, new));
                } else {
                    done.insert((i, new));
                }
            }
        }

        self.interreduce(basis)
    }

    fn interreduce(&mut self, basis: Vec<Elem>) -> Result<Vec<Elem>> {
        // Drop elements whose leading term is divisible by another's. Among
        // equal leading terms keep the first.
        let leads: Vec<Key> = basis
            .iter()
            .map(|g| g.lead(self.mode).unwrap().0.clone())
            .collect();
        let keep: Vec<usize> = (0..basis.len())
            .filter(|&i| {
                !(0..basis.len()).any(|j| {
                    j != i && leads[j].divides(&leads[i]) && (leads[j] != leads[i] || j < i)
                })
            })
            .collect();
        let mut minimal: Vec<Elem> = keep.into_iter().map(|i| basis[i].clone()).collect();
        for i in 0..minimal.len() {
            let f = minimal[i].clone();
            let mut r = self.reduce(f, &minimal, Some(i))?;
            r.make_monic(self.mode);
            minimal[i] = r;
        }
        minimal.sort_by(|a, b| b.lead(self.mode).unwrap().0.cmp(a.lead(self.mode).unwrap().0));
        Ok(minimal)
    }
}

/// Computes a reduced Gröbner basis of the span of `inputs`.
pub fn groebner(inputs: Vec<Elem>, mode: Mode, opts: &GroebnerOptions) -> Result<Vec<Elem>> {
    Engine {
        mode,
        opts,
        steps: 0,
    }
    .run(inputs)
}

/// Reduces `f` against a basis computed in the same mode.
pub fn reduce(f: Elem, basis: &[Elem], mode: Mode, opts: &GroebnerOptions) -> Result<Elem> {
    Engine {
        mode,
        opts,
        steps: 0,
    }
    .reduce(f, basis, None)
}

/// Leading key of an element under `mode`, if it has active terms.
pub fn leading_key(e: &Elem, mode: Mode) -> Option<&Key> {
    e.lead(mode).map(|(k, _)| k)
}

pub fn has_head(e: &Elem) -> bool {
    e.terms.keys().any(|k| k.block == HEAD)
}
