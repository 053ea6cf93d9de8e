//! Probabilistic analysis of quantum octal games.
//!
//! A position is summarized by a [`Couple`]: the parity of the number of grey
//! squares played if every grey measurement came out `0` (the lucky game), and
//! whether the white squares alone form a winning white-game position. Each
//! couple brackets the losing probability of the player to move. The exact
//! value comes from [`ExactSolver`], an expectimax over moves and measurement
//! outcomes.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::RwLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::bits::{BitSource, SeededBits};
use crate::board::{block_survival, Board, Color, Move, Segment};
use crate::dyadic::Dyadic;
use crate::grundy::{GrundySolver, Nimber, Situation};
use crate::rules::{RuleError, RuleSet};

/// Memo entries allowed before the exact solver gives up.
pub const DEFAULT_CAPACITY: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("rule set {0} does not satisfy the framing condition (b0(q1) = b1(q1) = 1, even digits zero)")]
    ConditionUnsupported(RuleSet),
    #[error("segment {0} contains a Black square")]
    ContainsBlack(String),
    #[error("board {0} contains a DarkGray square")]
    UnsupportedColor(String),
    #[error("exact solver exceeded its capacity of {0} positions")]
    CapacityExceeded(usize),
    #[error("board {0} has no legal move")]
    Terminal(String),
}

/// White-game outcome of the white squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WhiteOutcome {
    Win,
    Loss,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Couple {
    /// Lucky-game grey parity, 0 or 1.
    pub parity: u8,
    pub white: WhiteOutcome,
}

impl Couple {
    pub const fn new(parity: u8, white: WhiteOutcome) -> Self {
        Self { parity, white }
    }
}

impl fmt::Display for Couple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = match self.white {
            WhiteOutcome::Win => 'W',
            WhiteOutcome::Loss => 'L',
        };
        write!(f, "({},{w})", self.parity)
    }
}

/// A small nonnegative fraction used for bracket endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: i128,
    pub den: i128,
}

impl Fraction {
    pub const fn new(num: i128, den: i128) -> Self {
        Self { num, den }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bracket {
    pub lo: Fraction,
    pub hi: Fraction,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Bracket {
    pub fn contains(&self, p: Dyadic) -> bool {
        use std::cmp::Ordering::*;
        let lo_ok = match p.cmp_fraction(self.lo.num, self.lo.den) {
            Greater => true,
            Equal => self.lo_closed,
            Less => false,
        };
        let hi_ok = match p.cmp_fraction(self.hi.num, self.hi.den) {
            Less => true,
            Equal => self.hi_closed,
            Greater => false,
        };
        lo_ok && hi_ok
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{},{}{close}", self.lo, self.hi)
    }
}

/// Losing-probability interval of the player to move in a position with
/// couple `c`.
pub fn probability_bracket(c: Couple) -> Bracket {
    const ZERO: Fraction = Fraction::new(0, 1);
    const THIRD: Fraction = Fraction::new(1, 3);
    const HALF: Fraction = Fraction::new(1, 2);
    const TWO_THIRDS: Fraction = Fraction::new(2, 3);
    const ONE: Fraction = Fraction::new(1, 1);
    let (lo, hi, lo_closed, hi_closed) = match (c.parity == 0, c.white) {
        (true, WhiteOutcome::Win) => (ZERO, THIRD, true, false),
        (false, WhiteOutcome::Win) => (THIRD, HALF, false, true),
        (true, WhiteOutcome::Loss) => (TWO_THIRDS, ONE, false, true),
        (false, WhiteOutcome::Loss) => (HALF, TWO_THIRDS, true, false),
    };
    Bracket {
        lo,
        hi,
        lo_closed,
        hi_closed,
    }
}

/// Losing probability of the first player when only `n` isolated grey
/// squares remain: `u_0 = 1`, `u_{n+1} = 1/2 + (1 - u_n)/2`.
pub fn alternate_grey_losing_probability(n: usize) -> Dyadic {
    (0..n).fold(Dyadic::ONE, |u, _| Dyadic::HALF + u.one_minus().half())
}

fn q07() -> RuleSet {
    RuleSet::new(true, vec![7]).expect("valid code")
}

/// Grey counts over every lucky play line of `seg` under `Q0.7`.
pub fn lucky_grey_counts(seg: &Segment) -> Result<BTreeSet<usize>, AnalysisError> {
    lucky_grey_counts_with(seg, &q07())
}

/// Grey counts over every lucky play line of `seg`: grey measurements always
/// read `0`, blocks holding a Black square are never taken, and a line ends
/// when no other block is legal.
pub fn lucky_grey_counts_with(
    seg: &Segment,
    rules: &RuleSet,
) -> Result<BTreeSet<usize>, AnalysisError> {
    if seg.contains_black() {
        return Err(AnalysisError::ContainsBlack(seg.text()));
    }
    let mut memo = HashMap::new();
    Ok(lucky_counts(&seg.colors, rules, &mut memo))
}

fn lucky_counts(
    colors: &[Color],
    rules: &RuleSet,
    memo: &mut HashMap<Vec<Color>, BTreeSet<usize>>,
) -> BTreeSet<usize> {
    let rev: Vec<Color> = colors.iter().rev().copied().collect();
    let key = colors.to_vec().min(rev);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let board = Board::from_cells(key.iter().copied().map(Some).collect());
    let mut out = BTreeSet::new();
    for mv in board.legal_moves(rules) {
        let block: Vec<Color> = mv
            .positions()
            .map(|p| board.get(p).expect("live"))
            .collect();
        if block.contains(&Color::Black) {
            continue;
        }
        let greys = block.iter().filter(|c| c.is_grey()).count();
        let mut sums = BTreeSet::from([greys]);
        for sub in board.after_survival(mv).segments() {
            let counts = lucky_counts(&sub.colors, rules, memo);
            sums = sums
                .iter()
                .flat_map(|a| counts.iter().map(move |b| a + b))
                .collect();
        }
        out.extend(sums);
    }
    if out.is_empty() {
        out.insert(0);
    }
    memo.insert(key, out.clone());
    out
}

/// `(whites + 1) mod 2`, the common parity of the segment's lucky grey counts.
pub fn segment_parity(seg: &Segment) -> Result<u8, AnalysisError> {
    if seg.contains_black() {
        return Err(AnalysisError::ContainsBlack(seg.text()));
    }
    Ok(((seg.whites() + 1) % 2) as u8)
}

/// Lengths of the maximal runs of White squares.
pub fn white_runs(board: &Board) -> Situation {
    let mut runs = Vec::new();
    let mut current = 0;
    for cell in board.cells() {
        if *cell == Some(Color::White) {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    runs.push(current);
    Situation::new(runs)
}

/// Board positions reachable from an all-White chain of `n` squares through
/// surviving moves, deduplicated by normal form (see [`Board::canonical`]).
pub fn reachable_boards(n: usize, rules: &RuleSet) -> Vec<Board> {
    let start = Board::new_chain(n).expect("n >= 1").canonical();
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut stack = vec![start];
    while let Some(board) = stack.pop() {
        if !seen.insert(board.clone()) {
            continue;
        }
        for mv in board.legal_moves(rules) {
            let block: Vec<Color> = mv
                .positions()
                .map(|p| board.get(p).expect("live"))
                .collect();
            if block_survival(&block).is_zero() {
                continue;
            }
            let next = board.after_survival(mv).canonical();
            if !seen.contains(&next) {
                stack.push(next);
            }
        }
        order.push(board);
    }
    order
}

/// Expectimax over moves and measurement outcomes, memoized on normal forms.
///
/// The value of a position is the probability that the player to move loses
/// under optimal play by both sides.
#[derive(Debug)]
pub struct ExactSolver {
    rules: RuleSet,
    capacity: usize,
    memo: RwLock<HashMap<Board, Dyadic>>,
}

impl ExactSolver {
    pub fn new(rules: RuleSet) -> Self {
        Self::with_capacity(rules, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(rules: RuleSet, capacity: usize) -> Self {
        Self {
            rules,
            capacity,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    pub fn loss_probability(&self, board: &Board) -> Result<Dyadic, AnalysisError> {
        self.value(&board.canonical())
    }

    /// Losing probability of the mover after committing to `mv`.
    pub fn move_loss_probability(&self, board: &Board, mv: Move) -> Result<Dyadic, AnalysisError> {
        let block: Vec<Color> = mv
            .positions()
            .map(|p| board.get(p).expect("move covers live squares"))
            .collect();
        let survive = block_survival(&block);
        if survive.is_zero() {
            return Ok(Dyadic::ONE);
        }
        let next = self.value(&board.after_survival(mv).canonical())?;
        Ok(survive.one_minus() + survive * next.one_minus())
    }

    /// Every legal move achieving the optimal value, lowest first.
    pub fn optimal_moves(&self, board: &Board) -> Result<Vec<Move>, AnalysisError> {
        let moves = board.legal_moves(&self.rules);
        if moves.is_empty() {
            return Err(AnalysisError::Terminal(board.to_string()));
        }
        let mut best: Option<Dyadic> = None;
        let mut out = Vec::new();
        for mv in moves {
            let v = self.move_loss_probability(board, mv)?;
            match best {
                Some(b) if v > b => {}
                Some(b) if v == b => out.push(mv),
                _ => {
                    best = Some(v);
                    out = vec![mv];
                }
            }
        }
        Ok(out)
    }

    fn value(&self, key: &Board) -> Result<Dyadic, AnalysisError> {
        if let Some(&v) = self.memo.read().expect("memo lock").get(key) {
            return Ok(v);
        }
        let mut best = Dyadic::ONE;
        for mv in key.legal_moves(&self.rules) {
            best = best.min(self.move_loss_probability(key, mv)?);
            if best.is_zero() {
                break;
            }
        }
        let mut memo = self.memo.write().expect("memo lock");
        if memo.len() >= self.capacity && !memo.contains_key(key) {
            return Err(AnalysisError::CapacityExceeded(self.capacity));
        }
        memo.insert(key.clone(), best);
        Ok(best)
    }
}

/// One reachable position that falls outside its couple's bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramingViolation {
    pub chain: usize,
    pub board: Board,
    pub couple: Couple,
    pub value: Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FramingLine {
    pub chain: usize,
    pub states: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FramingReport {
    pub lines: Vec<FramingLine>,
    pub violations: Vec<FramingViolation>,
}

impl FramingReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn total_states(&self) -> usize {
        self.lines.iter().map(|l| l.states).sum()
    }
}

impl fmt::Display for FramingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(
                f,
                "n={} states={} violations={}",
                l.chain, l.states, l.violations
            )?;
        }
        Ok(())
    }
}

/// Quantum rule set together with its white game and exact solver.
#[derive(Debug)]
pub struct Analyzer {
    rules: RuleSet,
    white: GrundySolver,
    exact: ExactSolver,
}

impl Analyzer {
    pub fn new(rules: RuleSet) -> Result<Self, AnalysisError> {
        Self::with_capacity(rules, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(rules: RuleSet, capacity: usize) -> Result<Self, AnalysisError> {
        let white = GrundySolver::new(rules.associated_white_game()?)
            .expect("associated white games are classical");
        Ok(Self {
            exact: ExactSolver::with_capacity(rules.clone(), capacity),
            rules,
            white,
        })
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn white_game(&self) -> &GrundySolver {
        &self.white
    }

    pub fn exact(&self) -> &ExactSolver {
        &self.exact
    }

    pub fn framing_holds(&self) -> bool {
        self.rules
            .satisfies_framing_condition()
            .expect("analyzer rules are quantum")
    }

    /// White-game class of the white squares.
    pub fn white_class(&self, board: &Board) -> Nimber {
        self.white.situation_class(&white_runs(board))
    }

    /// The couple of `board`, without checking the rule condition under which
    /// it brackets the losing probability.
    pub fn couple(&self, board: &Board) -> Result<Couple, AnalysisError> {
        if board.count(Color::DarkGray) > 0 {
            return Err(AnalysisError::UnsupportedColor(board.to_string()));
        }
        let mut parity = 0;
        for seg in board.segments() {
            if seg.is_black_only() {
                continue;
            }
            parity ^= segment_parity(&seg)?;
        }
        let white = if self.white_class(board).is_zero() {
            WhiteOutcome::Loss
        } else {
            WhiteOutcome::Win
        };
        Ok(Couple::new(parity, white))
    }

    pub fn classify(&self, board: &Board) -> Result<Couple, AnalysisError> {
        if !self.framing_holds() {
            return Err(AnalysisError::ConditionUnsupported(self.rules.clone()));
        }
        self.couple(board)
    }

    pub fn exact_loss_probability(&self, board: &Board) -> Result<Dyadic, AnalysisError> {
        self.exact.loss_probability(board)
    }

    pub fn optimal_moves(&self, board: &Board) -> Result<Vec<Move>, AnalysisError> {
        self.exact.optimal_moves(board)
    }

    /// Checks every reachable position of chains `1..=max_n` against its
    /// couple's bracket.
    pub fn verify_framing(&self, max_n: usize) -> Result<FramingReport, AnalysisError> {
        if !self.framing_holds() {
            return Err(AnalysisError::ConditionUnsupported(self.rules.clone()));
        }
        let mut report = FramingReport::default();
        for n in 1..=max_n {
            let boards = reachable_boards(n, &self.rules);
            let mut violations = 0;
            for board in &boards {
                let couple = self.couple(board)?;
                let value = self.exact_loss_probability(board)?;
                if !probability_bracket(couple).contains(value) {
                    violations += 1;
                    report.violations.push(FramingViolation {
                        chain: n,
                        board: board.clone(),
                        couple,
                        value,
                    });
                }
            }
            report.lines.push(FramingLine {
                chain: n,
                states: boards.len(),
                violations,
            });
        }
        Ok(report)
    }
}

pub fn classify(board: &Board, rules: &RuleSet) -> Result<Couple, AnalysisError> {
    Analyzer::new(rules.clone())?.classify(board)
}

pub fn exact_loss_probability(board: &Board, rules: &RuleSet) -> Result<Dyadic, AnalysisError> {
    ExactSolver::new(rules.clone()).loss_probability(board)
}

pub fn optimal_moves(board: &Board, rules: &RuleSet) -> Result<Vec<Move>, AnalysisError> {
    ExactSolver::new(rules.clone()).optimal_moves(board)
}

pub fn verify_framing(rules: &RuleSet, max_n: usize) -> Result<FramingReport, AnalysisError> {
    Analyzer::new(rules.clone())?.verify_framing(max_n)
}

/// Chooses a move for the player to move. Must return a legal move whenever
/// one exists.
pub trait Policy: Sync {
    fn name(&self) -> &str;
    fn choose(&self, board: &Board, rules: &RuleSet) -> Option<Move>;
}

/// Always plays the lowest legal move.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstMove;

impl Policy for FirstMove {
    fn name(&self) -> &str {
        "first"
    }

    fn choose(&self, board: &Board, rules: &RuleSet) -> Option<Move> {
        board.legal_moves(rules).into_iter().next()
    }
}

/// Plays one game to the end; returns the index (0 or 1) of the loser.
pub fn play_out(
    board: &Board,
    rules: &RuleSet,
    policies: [&dyn Policy; 2],
    mut bits: impl BitSource,
) -> usize {
    let mut board = board.clone();
    let mut mover = 0;
    loop {
        let Some(mv) = policies[mover].choose(&board, rules) else {
            return mover;
        };
        let (next, result) = board.apply_move(rules, mv, &mut bits).unwrap_or_else(|e| {
            panic!(
                "policy {} chose an illegal move: {e}",
                policies[mover].name()
            )
        });
        if !result.survived {
            return mover;
        }
        board = next;
        mover = 1 - mover;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloOutcome {
    pub trials: u64,
    /// Games lost by the first player.
    pub losses: u64,
    pub frequency: f64,
}

/// Plays `trials` games from `board`, `first` moving first. Trial `i` reads
/// its measurements from `SeededBits::for_trial(seed, i)`, so the result does
/// not depend on how trials are scheduled across threads.
pub fn monte_carlo(
    board: &Board,
    rules: &RuleSet,
    first: &dyn Policy,
    second: &dyn Policy,
    trials: u64,
    seed: u64,
) -> MonteCarloOutcome {
    assert!(trials >= 1, "at least one trial");
    let losses = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            play_out(
                board,
                rules,
                [first, second],
                SeededBits::for_trial(seed, i),
            ) == 0
        })
        .count() as u64;
    MonteCarloOutcome {
        trials,
        losses,
        frequency: losses as f64 / trials as f64,
    }
}
