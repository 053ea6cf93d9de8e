//! Sprague-Grundy classes for classical octal games on rows.
//!
//! A row's class is the minimum excludant of the classes it reaches in one
//! move, and a set of rows has the XOR of its rows' classes. [`kernel_classes`]
//! rebuilds the same numbering by peeling kernels off the transition graph
//! and is kept as an independent check of the mex route.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{BitXor, BitXorAssign};
use std::sync::RwLock;

use thiserror::Error;

use crate::rules::RuleSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrundyError {
    #[error("rule set {0} is quantum; row classes need a classical code")]
    NotClassical(RuleSet),
    #[error("situation {0} has class 0: no winning move")]
    NoWinningMove(Situation),
    #[error("situation space exceeds capacity {0}")]
    CapacityExceeded(usize),
}

/// Class index `n` of `C_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nimber(pub u32);

impl Nimber {
    pub const ZERO: Nimber = Nimber(0);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl BitXor for Nimber {
    type Output = Nimber;
    fn bitxor(self, rhs: Nimber) -> Nimber {
        Nimber(self.0 ^ rhs.0)
    }
}

impl BitXorAssign for Nimber {
    fn bitxor_assign(&mut self, rhs: Nimber) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for Nimber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A multiset of rows. Zero-length rows carry nothing and are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Situation(Vec<usize>);

impl Situation {
    pub fn new(rows: impl IntoIterator<Item = usize>) -> Self {
        let mut rows: Vec<usize> = rows.into_iter().filter(|&r| r > 0).collect();
        rows.sort_unstable();
        Situation(rows)
    }

    pub fn empty() -> Self {
        Situation(Vec::new())
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.0.binary_search(&row).is_ok()
    }

    /// Replaces one copy of `row` by the rows of `replacement`.
    pub fn replace(&self, row: usize, replacement: &Situation) -> Situation {
        let mut rows = self.0.clone();
        let i = rows
            .iter()
            .position(|&r| r == row)
            .expect("row belongs to the situation");
        rows.remove(i);
        Situation::new(rows.into_iter().chain(replacement.0.iter().copied()))
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

/// Every situation reachable from a single row of length `n` in one move.
pub fn row_transitions(n: usize, rules: &RuleSet) -> BTreeSet<Situation> {
    let mut out = BTreeSet::new();
    for (i, flags) in rules.blocks() {
        if flags.whole && n == i {
            out.insert(Situation::empty());
        }
        if flags.border && n > i {
            out.insert(Situation::new([n - i]));
        }
        if flags.central && n > i + 1 {
            let rest = n - i;
            for k in 1..=rest / 2 {
                out.insert(Situation::new([k, rest - k]));
            }
        }
    }
    out
}

fn mex(seen: &[bool]) -> u32 {
    seen.iter().position(|&s| !s).unwrap_or(seen.len()) as u32
}

/// Memoized row classes for one classical rule set.
///
/// The table grows on demand and is shared behind a lock, so concurrent
/// callers see the same values as a sequential run.
#[derive(Debug)]
pub struct GrundySolver {
    rules: RuleSet,
    table: RwLock<Vec<Nimber>>,
}

impl GrundySolver {
    pub fn new(rules: RuleSet) -> Result<Self, GrundyError> {
        if rules.is_quantum() {
            return Err(GrundyError::NotClassical(rules));
        }
        Ok(Self {
            rules,
            table: RwLock::new(vec![Nimber::ZERO]),
        })
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// `c(n)`.
    pub fn row_class(&self, n: usize) -> Nimber {
        if let Some(&v) = self.table.read().expect("grundy table lock").get(n) {
            return v;
        }
        let mut table = self.table.write().expect("grundy table lock");
        while table.len() <= n {
            let next = self.next_class(&table);
            table.push(next);
        }
        table[n]
    }

    /// Classes `c(0..=n)`.
    pub fn classes(&self, n: usize) -> Vec<Nimber> {
        self.row_class(n);
        self.table.read().expect("grundy table lock")[..=n].to_vec()
    }

    fn next_class(&self, table: &[Nimber]) -> Nimber {
        let n = table.len();
        let mut seen = vec![false; 2 * n + 2];
        let mut mark = |v: Nimber| {
            let v = v.0 as usize;
            if v >= seen.len() {
                seen.resize(v + 1, false);
            }
            seen[v] = true;
        };
        for (i, flags) in self.rules.blocks() {
            if flags.whole && n == i {
                mark(Nimber::ZERO);
            }
            if flags.border && n > i {
                mark(table[n - i]);
            }
            if flags.central && n > i + 1 {
                let rest = n - i;
                for k in 1..=rest / 2 {
                    mark(table[k] ^ table[rest - k]);
                }
            }
        }
        Nimber(mex(&seen))
    }

    pub fn situation_class(&self, situation: &Situation) -> Nimber {
        situation
            .rows()
            .iter()
            .fold(Nimber::ZERO, |acc, &r| acc ^ self.row_class(r))
    }

    /// A move to a class-0 situation: the row to play in and what it becomes.
    ///
    /// Takes the leading one-bit of the situation's class, picks the first
    /// row whose class has that bit, and moves that row to `c ^ s`, which is
    /// smaller than `c` and therefore reachable.
    pub fn winning_transition(
        &self,
        situation: &Situation,
    ) -> Result<(usize, Situation), GrundyError> {
        let total = self.situation_class(situation);
        if total.is_zero() {
            return Err(GrundyError::NoWinningMove(situation.clone()));
        }
        let lead = 31 - total.0.leading_zeros();
        let row = *situation
            .rows()
            .iter()
            .find(|&&r| self.row_class(r).0 >> lead & 1 == 1)
            .expect("some row carries the leading bit");
        let target = self.row_class(row) ^ total;
        let replacement = row_transitions(row, &self.rules)
            .into_iter()
            .find(|t| self.situation_class(t) == target)
            .expect("every smaller class is reachable from a row");
        Ok((row, replacement))
    }

    /// `c(i) = c(i - period)` for every `i` in `start..=horizon` (indices
    /// below `period` have no partner and are skipped).
    pub fn verify_period(&self, period: usize, start: usize, horizon: usize) -> bool {
        if period == 0 || horizon < start {
            return false;
        }
        let values = self.classes(horizon);
        (start.max(period)..=horizon).all(|i| values[i] == values[i - period])
    }

    /// Classes up to `n` with the shortest eventual period certified by the
    /// computed range.
    ///
    /// A candidate `(period p, start s)`, with `s` the least index from which
    /// `c(i) = c(i - p)` holds through `n`, is accepted when
    /// `n ≥ 2s + t` where `t` is the largest block size of the code. That is
    /// the window after which the periodicity of an octal game with finitely
    /// many digits propagates by induction.
    pub fn table(&self, n: usize) -> GrundyTable {
        let values = self.classes(n);
        let t = self.rules.max_block();
        let mut period = None;
        for p in 1..=n {
            let mut s = n + 1;
            while s > p && values[s - 1] == values[s - 1 - p] {
                s -= 1;
            }
            let s = s.max(p);
            if n >= 2 * s + t {
                period = Some(Period {
                    start: s,
                    length: p,
                });
                break;
            }
        }
        let exceptional = match period {
            Some(Period { start, length }) => (0..start)
                .filter(|&i| {
                    let k = (start - i).div_ceil(length);
                    values[i] != values[i + k * length]
                })
                .collect(),
            None => Vec::new(),
        };
        GrundyTable {
            rules: self.rules.clone(),
            values,
            exceptional,
            period,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Period {
    pub start: usize,
    pub length: usize,
}

/// Row classes `c(0..=N)` with their detected eventual period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrundyTable {
    pub rules: RuleSet,
    pub values: Vec<Nimber>,
    /// Lengths below the period start whose class differs from the periodic
    /// value, ascending.
    pub exceptional: Vec<usize>,
    pub period: Option<Period>,
}

impl GrundyTable {
    /// `n<TAB>class` lines.
    pub fn to_tsv(&self) -> String {
        self.values
            .iter()
            .enumerate()
            .map(|(n, c)| format!("{n}\t{c}\n"))
            .collect()
    }

    /// `period=34 start=87 exceptions=0,1,…`, or `period=none`.
    pub fn period_report(&self) -> String {
        match self.period {
            Some(p) => {
                let ex: Vec<String> = self.exceptional.iter().map(usize::to_string).collect();
                format!(
                    "period={} start={} exceptions={}",
                    p.length,
                    p.start,
                    ex.join(",")
                )
            }
            None => "period=none".to_string(),
        }
    }

    /// Row lengths grouped by class.
    pub fn partition(&self) -> BTreeMap<Nimber, Vec<usize>> {
        let mut out: BTreeMap<Nimber, Vec<usize>> = BTreeMap::new();
        for (n, &c) in self.values.iter().enumerate() {
            out.entry(c).or_default().push(n);
        }
        out
    }
}

/// The transition graph over every situation of total length at most
/// `max_total`, numbered by iterated kernel peeling.
#[derive(Clone, Debug)]
pub struct KernelClasses {
    situations: Vec<Situation>,
    index: HashMap<Situation, usize>,
    successors: Vec<Vec<usize>>,
    classes: Vec<Nimber>,
}

impl KernelClasses {
    pub fn len(&self) -> usize {
        self.situations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.situations.is_empty()
    }

    pub fn get(&self, situation: &Situation) -> Option<Nimber> {
        self.index.get(situation).map(|&i| self.classes[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Situation, Nimber)> {
        self.situations.iter().zip(self.classes.iter().copied())
    }

    pub fn successors(&self, situation: &Situation) -> Vec<&Situation> {
        self.index
            .get(situation)
            .map(|&i| {
                self.successors[i]
                    .iter()
                    .map(|&j| &self.situations[j])
                    .collect()
            })
            .unwrap_or_default()
    }

    /// All situations peeled off as kernel `k`.
    pub fn class_members(&self, k: Nimber) -> Vec<&Situation> {
        self.iter()
            .filter(|(_, c)| *c == k)
            .map(|(s, _)| s)
            .collect()
    }

    pub fn to_map(&self) -> BTreeMap<Situation, Nimber> {
        self.iter().map(|(s, c)| (s.clone(), c)).collect()
    }
}

/// Every multiset of positive rows with total at most `max_total`, by
/// increasing total.
pub fn enumerate_situations(max_total: usize) -> Vec<Situation> {
    fn parts(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Situation>) {
        if remaining == 0 {
            out.push(Situation::new(prefix.iter().copied()));
            return;
        }
        for p in (1..=max_part.min(remaining)).rev() {
            prefix.push(p);
            parts(remaining - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=max_total {
        parts(total, total, &mut Vec::new(), &mut out);
    }
    out
}

/// Kernel numbering of the transition graph.
///
/// `C_0` is the unique kernel (stable and dominating) of the acyclic graph;
/// `C_1` is the kernel of what remains after removing `C_0`, and so on.
pub fn kernel_classes(
    max_total: usize,
    rules: &RuleSet,
    capacity: usize,
) -> Result<KernelClasses, GrundyError> {
    if rules.is_quantum() {
        return Err(GrundyError::NotClassical(rules.clone()));
    }
    let situations = enumerate_situations(max_total);
    if situations.len() > capacity {
        return Err(GrundyError::CapacityExceeded(capacity));
    }
    let index: HashMap<Situation, usize> = situations
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let mut row_moves: HashMap<usize, BTreeSet<Situation>> = HashMap::new();
    let successors: Vec<Vec<usize>> = situations
        .iter()
        .map(|s| {
            let mut next = BTreeSet::new();
            let mut distinct = s.rows().to_vec();
            distinct.dedup();
            for row in distinct {
                let moves = row_moves
                    .entry(row)
                    .or_insert_with(|| row_transitions(row, rules));
                for t in moves.iter() {
                    next.insert(index[&s.replace(row, t)]);
                }
            }
            next.into_iter().collect()
        })
        .collect();

    // Situations are listed by increasing total and every move strictly
    // lowers the total, so one forward pass decides each kernel.
    let mut classes: Vec<Option<Nimber>> = vec![None; situations.len()];
    let mut remaining = situations.len();
    let mut k = 0;
    while remaining > 0 {
        let mut in_kernel = vec![false; situations.len()];
        for v in 0..situations.len() {
            if classes[v].is_some() {
                continue;
            }
            in_kernel[v] = !successors[v]
                .iter()
                .any(|&w| classes[w].is_none() && in_kernel[w]);
        }
        for v in 0..situations.len() {
            if in_kernel[v] {
                classes[v] = Some(Nimber(k));
                remaining -= 1;
            }
        }
        k += 1;
    }
    Ok(KernelClasses {
        situations,
        index,
        successors,
        classes: classes
            .into_iter()
            .map(|c| c.expect("all peeled"))
            .collect(),
    })
}
