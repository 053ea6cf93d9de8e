//! Chain boards and move dynamics.
//!
//! Text format: one character per original position, `W` White, `g`
//! LightGray, `B` Black, `d` DarkGray, `.` removed. Moves are written as
//! `4` or `4-6` (1-based, inclusive).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::BitSource;
use crate::dyadic::Dyadic;
use crate::rules::RuleSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoardError {
    #[error("a chain needs at least one square")]
    ZeroLength,
    #[error("invalid board character {0:?}")]
    BadCell(char),
    #[error("invalid move {0:?}")]
    BadMove(String),
    #[error("illegal move {mv} on board {board}")]
    IllegalMove { board: String, mv: String },
}

/// Qubit state of a live square: the number of `√NOT` applications mod 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    /// `|0⟩`
    White,
    /// `√NOT|0⟩`
    LightGray,
    /// `|1⟩`
    Black,
    /// `√NOT|1⟩`
    DarkGray,
}

impl Color {
    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn from_level(level: u8) -> Color {
        match level % 4 {
            0 => Color::White,
            1 => Color::LightGray,
            2 => Color::Black,
            _ => Color::DarkGray,
        }
    }

    /// One more `√NOT`.
    pub fn cycle(self) -> Color {
        Color::from_level(self.level() + 1)
    }

    pub fn is_grey(self) -> bool {
        matches!(self, Color::LightGray | Color::DarkGray)
    }

    /// Probability that measuring this square observes `|1⟩`.
    pub fn loss_probability(self) -> Dyadic {
        match self {
            Color::White => Dyadic::ZERO,
            Color::Black => Dyadic::ONE,
            Color::LightGray | Color::DarkGray => Dyadic::HALF,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Color::White => 'W',
            Color::LightGray => 'g',
            Color::Black => 'B',
            Color::DarkGray => 'd',
        }
    }

    pub fn from_char(c: char) -> Option<Color> {
        match c {
            'W' => Some(Color::White),
            'g' => Some(Color::LightGray),
            'B' => Some(Color::Black),
            'd' => Some(Color::DarkGray),
            _ => None,
        }
    }
}

/// A contiguous run of live squares, maximal within its board.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    /// 1-based position of the first square.
    pub start: usize,
    pub colors: Vec<Color>,
}

impl Segment {
    pub fn new(start: usize, colors: Vec<Color>) -> Self {
        Self { start, colors }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn end(&self) -> usize {
        self.start + self.colors.len() - 1
    }

    pub fn whites(&self) -> usize {
        self.count(Color::White)
    }

    pub fn count(&self, color: Color) -> usize {
        self.colors.iter().filter(|&&c| c == color).count()
    }

    pub fn contains_black(&self) -> bool {
        self.colors.contains(&Color::Black)
    }

    pub fn is_black_only(&self) -> bool {
        self.colors.iter().all(|&c| c == Color::Black)
    }

    pub fn text(&self) -> String {
        self.colors.iter().map(|c| c.to_char()).collect()
    }

    /// The segment as a standalone board.
    pub fn to_board(&self) -> Board {
        Board {
            cells: self.colors.iter().copied().map(Some).collect(),
        }
    }
}

impl FromStr for Segment {
    type Err = BoardError;

    /// Parses a run of live squares starting at position 1.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let colors = s
            .chars()
            .map(|c| Color::from_char(c).ok_or(BoardError::BadCell(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Segment::new(1, colors))
    }
}

/// A block of adjacent positions `start..start+len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    start: usize,
    len: usize,
}

impl Move {
    pub fn new(start: usize, len: usize) -> Self {
        assert!(start >= 1 && len >= 1, "moves are nonempty and 1-based");
        Self { start, len }
    }

    pub fn single(position: usize) -> Self {
        Self::new(position, 1)
    }

    /// Builds a move from an explicit position list, which must be
    /// consecutive.
    pub fn from_positions(positions: &[usize]) -> Result<Self, BoardError> {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let bad = || BoardError::BadMove(format!("{positions:?}"));
        let &first = sorted.first().ok_or_else(bad)?;
        if first == 0 || sorted.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(bad());
        }
        Ok(Self::new(first, sorted.len()))
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.start + self.len - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end()
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 1 {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}-{}", self.start, self.end())
        }
    }
}

impl FromStr for Move {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BoardError::BadMove(s.to_string());
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let (a, b) = match s.split_once('-') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let a = parse(s)?;
                (a, a)
            }
        };
        if a == 0 || b < a {
            return Err(bad());
        }
        Ok(Move::new(a, b - a + 1))
    }
}

/// Outcome of measuring a block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MoveResult {
    pub survived: bool,
    /// `(position, observed bit)` in measurement order, up to the first `1`.
    pub measured: Vec<(usize, bool)>,
    pub loss_position: Option<usize>,
}

/// A chain of squares, each removed (`None`) or live.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Board {
    cells: Vec<Option<Color>>,
}

impl Board {
    /// An all-White chain of `n` squares.
    pub fn new_chain(n: usize) -> Result<Board, BoardError> {
        if n == 0 {
            return Err(BoardError::ZeroLength);
        }
        Ok(Board {
            cells: vec![Some(Color::White); n],
        })
    }

    pub fn from_cells(cells: Vec<Option<Color>>) -> Board {
        Board { cells }
    }

    pub fn parse(text: &str) -> Result<Board, BoardError> {
        text.parse()
    }

    /// Number of original positions, removed ones included.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// True when no square is live.
    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Option::is_none)
    }

    pub fn cells(&self) -> &[Option<Color>] {
        &self.cells
    }

    /// Square at 1-based `position`; `None` if removed or out of range.
    pub fn get(&self, position: usize) -> Option<Color> {
        position
            .checked_sub(1)
            .and_then(|i| self.cells.get(i).copied().flatten())
    }

    pub fn live_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn count(&self, color: Color) -> usize {
        self.cells.iter().filter(|&&c| c == Some(color)).count()
    }

    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut current: Option<Segment> = None;
        for (i, cell) in self.cells.iter().enumerate() {
            match (cell, current.as_mut()) {
                (Some(c), Some(seg)) => seg.colors.push(*c),
                (Some(c), None) => current = Some(Segment::new(i + 1, vec![*c])),
                (None, _) => out.extend(current.take()),
            }
        }
        out.extend(current);
        out
    }

    /// The segment containing `position`, if live.
    pub fn segment_at(&self, position: usize) -> Option<Segment> {
        self.segments()
            .into_iter()
            .find(|s| s.start <= position && position <= s.end())
    }

    /// Every block allowed by `rules`, ordered by start then length.
    ///
    /// Whether a block is whole, border or central is decided by the White and
    /// Black squares left on either side; grey squares do not count as a
    /// remainder. Counting greys breaks the couple brackets for codes such as
    /// Q0.3 (`WWWWW` would be (0,W) with loss probability 3/4).
    pub fn legal_moves(&self, rules: &RuleSet) -> Vec<Move> {
        let mut moves = Vec::new();
        for seg in self.segments() {
            let n = seg.len();
            for (size, flags) in rules.blocks() {
                if size > n {
                    continue;
                }
                for offset in 0..=n - size {
                    let left = non_grey(&seg.colors[..offset]);
                    let right = non_grey(&seg.colors[offset + size..]);
                    let allowed = match (left > 0, right > 0) {
                        (false, false) => flags.whole,
                        (true, true) => flags.central,
                        _ => flags.border,
                    };
                    if allowed {
                        moves.push(Move::new(seg.start + offset, size));
                    }
                }
            }
        }
        moves.sort();
        moves
    }

    pub fn is_legal(&self, rules: &RuleSet, mv: Move) -> bool {
        self.legal_moves(rules).contains(&mv)
    }

    /// No legal move: the player to move loses.
    pub fn is_terminal_loss(&self, rules: &RuleSet) -> bool {
        self.legal_moves(rules).is_empty()
    }

    fn check_legal(&self, rules: &RuleSet, mv: Move) -> Result<(), BoardError> {
        if self.is_legal(rules, mv) {
            Ok(())
        } else {
            Err(BoardError::IllegalMove {
                board: self.to_string(),
                mv: mv.to_string(),
            })
        }
    }

    /// Block colors; the move must cover live squares only.
    fn block(&self, mv: Move) -> Vec<Color> {
        mv.positions()
            .map(|p| self.get(p).expect("block covers live squares"))
            .collect()
    }

    /// Probability that every square of the block measures `0`.
    pub fn survival_probability(&self, rules: &RuleSet, mv: Move) -> Result<Dyadic, BoardError> {
        self.check_legal(rules, mv)?;
        Ok(block_survival(&self.block(mv)))
    }

    /// Board after the block survives measurement: the block is removed and
    /// the live squares just outside each end are cycled once.
    ///
    /// The move must cover live squares of one segment.
    pub fn after_survival(&self, mv: Move) -> Board {
        let mut cells = self.cells.clone();
        for p in mv.positions() {
            debug_assert!(cells[p - 1].is_some(), "block covers live squares");
            cells[p - 1] = None;
        }
        let neighbours = [mv.start().checked_sub(1), Some(mv.end() + 1)];
        for p in neighbours.into_iter().flatten() {
            if let Some(Some(c)) = p.checked_sub(1).and_then(|i| cells.get_mut(i)) {
                *c = c.cycle();
            }
        }
        Board { cells }
    }

    /// Measures the block left to right and applies the move.
    ///
    /// White squares read `0` and Black squares read `1` without touching the
    /// source; each grey square reads one bit. Measurement stops at the first
    /// `1`, in which case the board is returned unchanged.
    pub fn apply_move(
        &self,
        rules: &RuleSet,
        mv: Move,
        mut bits: impl BitSource,
    ) -> Result<(Board, MoveResult), BoardError> {
        self.check_legal(rules, mv)?;
        let mut measured = Vec::with_capacity(mv.len());
        for p in mv.positions() {
            let bit = match self.get(p).expect("legal moves cover live squares") {
                Color::White => false,
                Color::Black => true,
                Color::LightGray | Color::DarkGray => bits.next_bit(),
            };
            measured.push((p, bit));
            if bit {
                let result = MoveResult {
                    survived: false,
                    measured,
                    loss_position: Some(p),
                };
                return Ok((self.clone(), result));
            }
        }
        let result = MoveResult {
            survived: true,
            measured,
            loss_position: None,
        };
        Ok((self.after_survival(mv), result))
    }

    pub fn reversed(&self) -> Board {
        let mut cells = self.cells.clone();
        cells.reverse();
        Board { cells }
    }

    /// Same board with every all-Black segment removed.
    pub fn without_black_segments(&self) -> Board {
        let mut cells = self.cells.clone();
        for seg in self.segments().iter().filter(|s| s.is_black_only()) {
            for p in seg.start..=seg.end() {
                cells[p - 1] = None;
            }
        }
        Board { cells }
    }

    /// Position-free normal form: segments, each replaced by the smaller of
    /// itself and its reversal, sorted and separated by single removed squares.
    ///
    /// Two boards with the same normal form are the same game.
    pub fn canonical(&self) -> Board {
        let mut segs: Vec<Vec<Color>> = self
            .segments()
            .into_iter()
            .map(|s| {
                let rev: Vec<Color> = s.colors.iter().rev().copied().collect();
                s.colors.min(rev)
            })
            .collect();
        segs.sort();
        let mut cells = Vec::new();
        for (i, seg) in segs.into_iter().enumerate() {
            if i > 0 {
                cells.push(None);
            }
            cells.extend(seg.into_iter().map(Some));
        }
        Board { cells }
    }
}

fn non_grey(cells: &[Color]) -> usize {
    cells.iter().filter(|c| !c.is_grey()).count()
}

pub(crate) fn block_survival(block: &[Color]) -> Dyadic {
    if block.contains(&Color::Black) {
        return Dyadic::ZERO;
    }
    let greys = block.iter().filter(|c| c.is_grey()).count() as u32;
    Dyadic::pow_half(greys)
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cell in &self.cells {
            let c = cell.map_or('.', Color::to_char);
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Board {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cells = s
            .chars()
            .map(|c| match c {
                '.' => Ok(None),
                _ => Color::from_char(c).map(Some).ok_or(BoardError::BadCell(c)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Board { cells })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{FixedBits, SeededBits};
    use proptest::prelude::*;

    fn b(s: &str) -> Board {
        s.parse().unwrap()
    }

    fn q(code: &str) -> RuleSet {
        code.parse().unwrap()
    }

    #[test]
    fn new_chain_is_white() {
        assert_eq!(Board::new_chain(1).unwrap().to_string(), "W");
        assert_eq!(Board::new_chain(3).unwrap().to_string(), "WWW");
        assert_eq!(Board::new_chain(5).unwrap().to_string(), "WWWWW");
        assert_eq!(Board::new_chain(0), Err(BoardError::ZeroLength));
    }

    #[test]
    fn color_cycle() {
        assert_eq!(Color::White.cycle(), Color::LightGray);
        assert_eq!(Color::LightGray.cycle(), Color::Black);
        assert_eq!(Color::Black.cycle(), Color::DarkGray);
        assert_eq!(Color::DarkGray.cycle(), Color::White);
        assert_eq!(Color::White.loss_probability(), Dyadic::ZERO);
        assert_eq!(Color::Black.loss_probability(), Dyadic::ONE);
        assert_eq!(Color::DarkGray.loss_probability(), Dyadic::HALF);
    }

    #[test]
    fn segments_are_maximal_runs() {
        let segs = b("g.gW").segments();
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].start, segs[0].text()), (1, "g".to_string()));
        assert_eq!((segs[1].start, segs[1].text()), (3, "gW".to_string()));
        assert_eq!(
            b("WWW").segments(),
            vec![Segment::new(1, vec![Color::White; 3])]
        );
        assert!(b("...").segments().is_empty());
        assert!(b("").segments().is_empty());
    }

    #[test]
    fn legal_moves_follow_digits() {
        let singles = |v: &[usize]| v.iter().map(|&p| Move::single(p)).collect::<Vec<_>>();
        assert_eq!(b("WWW").legal_moves(&q("Q0.7")), singles(&[1, 2, 3]));
        assert_eq!(b("WWW").legal_moves(&q("Q0.3")), singles(&[1, 3]));
        assert_eq!(b("W.W").legal_moves(&q("Q0.3")), singles(&[1, 3]));
        assert_eq!(b("W.W").legal_moves(&q("Q0.2")), vec![]);
        assert_eq!(
            b("WWWW").legal_moves(&q("Q0.07")),
            vec![Move::new(1, 2), Move::new(2, 2), Move::new(3, 2)]
        );
        assert_eq!(b("WBW").legal_moves(&q("Q0.4")), singles(&[2]));
        assert_eq!(b("gWg").legal_moves(&q("Q0.4")), vec![]);
        assert_eq!(b("gWg").legal_moves(&q("Q0.1")), singles(&[2]));
        assert_eq!(b("gg").legal_moves(&q("Q0.1")), singles(&[1, 2]));
        assert_eq!(b("gWWWg").legal_moves(&q("Q0.4")), singles(&[3]));
        assert!(b("..").legal_moves(&q("Q0.7")).is_empty());
    }

    #[test]
    fn survival_probabilities() {
        let r = q("Q0.7");
        assert_eq!(
            b("W").survival_probability(&r, Move::single(1)).unwrap(),
            Dyadic::ONE
        );
        assert_eq!(
            b("g").survival_probability(&r, Move::single(1)).unwrap(),
            Dyadic::HALF
        );
        assert_eq!(
            b("B").survival_probability(&r, Move::single(1)).unwrap(),
            Dyadic::ZERO
        );
        let r2 = q("Q0.07");
        assert_eq!(
            b("gg").survival_probability(&r2, Move::new(1, 2)).unwrap(),
            Dyadic::new(1, 2)
        );
        assert!(matches!(
            b("g.").survival_probability(&r, Move::single(2)),
            Err(BoardError::IllegalMove { .. })
        ));
    }

    #[test]
    fn two_greys_survive_with_sequential_bits() {
        // Enumerate all bit pairs: only 00 survives.
        let r = q("Q0.07");
        let board = b("gg");
        let mut survivors = 0;
        for bits in [[false, false], [false, true], [true, false], [true, true]] {
            let mut src = FixedBits::new(bits.to_vec());
            let (_, res) = board.apply_move(&r, Move::new(1, 2), &mut src).unwrap();
            survivors += res.survived as u32;
        }
        assert_eq!(Dyadic::new(survivors as i128, 2), Dyadic::new(1, 2));
    }

    #[test]
    fn apply_move_examples() {
        let r = q("Q0.7");
        let (next, res) = b("WWW")
            .apply_move(&r, Move::single(2), FixedBits::empty())
            .unwrap();
        assert_eq!(next.to_string(), "g.g");
        assert!(res.survived);
        assert_eq!(res.measured, vec![(2, false)]);

        let (next, res) = b("gW")
            .apply_move(&r, Move::single(2), FixedBits::empty())
            .unwrap();
        assert_eq!(next.to_string(), "B.");
        assert!(res.survived);

        let (next, res) = b("g")
            .apply_move(&r, Move::single(1), FixedBits::new(vec![true]))
            .unwrap();
        assert!(!res.survived);
        assert_eq!(res.loss_position, Some(1));
        assert_eq!(next.to_string(), "g");

        let (next, res) = b("g")
            .apply_move(&r, Move::single(1), FixedBits::new(vec![false]))
            .unwrap();
        assert!(res.survived);
        assert_eq!(next.to_string(), ".");

        let (_, res) = b("B")
            .apply_move(&r, Move::single(1), FixedBits::empty())
            .unwrap();
        assert!(!res.survived);
        assert_eq!(res.measured, vec![(1, true)]);
    }

    #[test]
    fn illegal_moves_rejected() {
        let r = q("Q0.7");
        assert!(b("W.W")
            .apply_move(&r, Move::single(2), FixedBits::empty())
            .is_err());
        assert!(b("W")
            .apply_move(&r, Move::single(4), FixedBits::empty())
            .is_err());
        assert!(b("WW")
            .apply_move(&r, Move::new(1, 2), FixedBits::empty())
            .is_err());
    }

    #[test]
    fn measurement_stops_at_first_one() {
        let r = q("Q0.007");
        let board = b("gWg");
        let mut src = FixedBits::new(vec![true, false]);
        let (next, res) = board.apply_move(&r, Move::new(1, 3), &mut src).unwrap();
        assert_eq!(src.consumed(), 1);
        assert_eq!(res.measured, vec![(1, true)]);
        assert_eq!(next, board);

        let mut src = FixedBits::new(vec![false, true]);
        let (_, res) = board.apply_move(&r, Move::new(1, 3), &mut src).unwrap();
        assert_eq!(src.consumed(), 2);
        assert_eq!(res.loss_position, Some(3));
    }

    #[test]
    fn terminality() {
        let r = q("Q0.7");
        assert!(b("").is_terminal_loss(&r));
        assert!(b("...").is_terminal_loss(&r));
        assert!(!b("B").is_terminal_loss(&r));
        assert!(!b("W").is_terminal_loss(&r));
        assert!(b("W").is_terminal_loss(&q("Q0.2")));
    }

    #[test]
    fn move_text() {
        assert_eq!(Move::single(2).to_string(), "2");
        assert_eq!(Move::new(4, 3).to_string(), "4-6");
        assert_eq!("4-6".parse::<Move>().unwrap(), Move::new(4, 3));
        assert_eq!("7".parse::<Move>().unwrap(), Move::single(7));
        assert!("0".parse::<Move>().is_err());
        assert!("6-4".parse::<Move>().is_err());
        assert_eq!(Move::from_positions(&[5, 4, 6]).unwrap(), Move::new(4, 3));
        assert!(Move::from_positions(&[1, 3]).is_err());
        assert!(Move::from_positions(&[]).is_err());
    }

    #[test]
    fn canonical_form_ignores_order_and_orientation() {
        assert_eq!(b("Wg..gWW.B").canonical().to_string(), "WWg.Wg.B");
        assert_eq!(b("gW.B").canonical().to_string(), "Wg.B");
        assert_eq!(b("Wg").canonical(), b("gW").canonical());
        assert_eq!(b("...").canonical().to_string(), "");
        assert_eq!(b("W.gW").canonical(), b("Wg..W").canonical());
    }

    #[test]
    fn black_segments_are_dropped() {
        assert_eq!(b("B.gW.B").without_black_segments().to_string(), "..gW..");
    }

    fn all_reachable(n: usize, rules: &RuleSet) -> Vec<Board> {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![Board::new_chain(n).unwrap()];
        while let Some(board) = stack.pop() {
            if !seen.insert(board.clone()) {
                continue;
            }
            for mv in board.legal_moves(rules) {
                stack.push(board.after_survival(mv));
            }
        }
        seen.into_iter().collect()
    }

    #[test]
    fn reachable_boards_have_isolated_blacks_and_no_dark_gray() {
        let r = q("Q0.7");
        for n in 1..=8 {
            for board in all_reachable(n, &r) {
                assert_eq!(board.count(Color::DarkGray), 0, "{board}");
                for seg in board.segments() {
                    if seg.contains_black() {
                        assert_eq!(seg.text(), "B", "{board}");
                    }
                    // greys sit at segment borders
                    for (i, c) in seg.colors.iter().enumerate() {
                        if *c == Color::LightGray {
                            assert!(i == 0 || i + 1 == seg.len(), "{board}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn empirical_survival_matches_probability() {
        let r = q("Q0.7");
        let mut checked = std::collections::HashSet::new();
        let mut src = SeededBits::new(2024);
        for n in 1..=6 {
            for board in all_reachable(n, &r) {
                for mv in board.legal_moves(&r) {
                    let block: String = mv
                        .positions()
                        .map(|p| board.get(p).unwrap().to_char())
                        .collect();
                    if !checked.insert(block) {
                        continue;
                    }
                    let p = board.survival_probability(&r, mv).unwrap().to_f64();
                    let trials = 100_000;
                    let survived = (0..trials)
                        .filter(|_| board.apply_move(&r, mv, &mut src).unwrap().1.survived)
                        .count();
                    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
                    let diff = (survived as f64 - trials as f64 * p).abs();
                    assert!(diff <= 3.0 * sigma, "{board} {mv}: {survived} vs p={p}");
                }
            }
        }
        assert!(checked.len() >= 3);
    }

    fn board_strategy() -> impl Strategy<Value = Board> {
        proptest::collection::vec(
            prop_oneof![
                Just(None),
                Just(Some(Color::White)),
                Just(Some(Color::LightGray)),
                Just(Some(Color::Black)),
                Just(Some(Color::DarkGray)),
            ],
            0..12,
        )
        .prop_map(Board::from_cells)
    }

    proptest! {
        #[test]
        fn text_round_trip(board in board_strategy()) {
            prop_assert_eq!(board.to_string().parse::<Board>().unwrap(), board);
        }

        #[test]
        fn segments_reconstruct_the_board(board in board_strategy(), pick in 0usize..64, bits in proptest::collection::vec(any::<bool>(), 8)) {
            let r = q("Q0.777");
            let moves = board.legal_moves(&r);
            let next = if moves.is_empty() {
                board.clone()
            } else {
                board.apply_move(&r, moves[pick % moves.len()], FixedBits::new(bits.clone())).unwrap().0
            };
            let mut rebuilt = vec![None; next.len()];
            for seg in next.segments() {
                prop_assert!(!seg.is_empty());
                for (i, c) in seg.colors.iter().enumerate() {
                    rebuilt[seg.start - 1 + i] = Some(*c);
                }
                prop_assert!(seg.start == 1 || next.get(seg.start - 1).is_none());
                prop_assert!(next.get(seg.end() + 1).is_none());
            }
            prop_assert_eq!(Board::from_cells(rebuilt), next);
        }

        #[test]
        fn replay_consumes_bits_deterministically(board in board_strategy(), pick in 0usize..64, bits in proptest::collection::vec(any::<bool>(), 8)) {
            let r = q("Q0.777");
            let moves = board.legal_moves(&r);
            prop_assume!(!moves.is_empty());
            let mv = moves[pick % moves.len()];
            let mut a = FixedBits::new(bits.clone());
            let mut b2 = FixedBits::new(bits.clone());
            let first = board.apply_move(&r, mv, &mut a).unwrap();
            let second = board.apply_move(&r, mv, &mut b2).unwrap();
            prop_assert_eq!(&first, &second);
            let greys: Vec<usize> = mv.positions().filter(|&p| board.get(p).unwrap().is_grey()).collect();
            let expected = first.1.measured.iter().filter(|(p, _)| greys.contains(p)).count();
            prop_assert_eq!(a.consumed(), expected);
        }
    }
}
