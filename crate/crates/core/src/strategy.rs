//! The playing engine.
//!
//! With a winning white-game position the engine plays a white-game winning
//! move on the white squares, never measuring a grey, so that the opponent
//! ends up forced onto the first grey square. Otherwise it picks a grey move
//! by the couple of the resulting position. When the exact solver fits in its
//! capacity the engine plays an exactly optimal move instead.

use std::fmt;

use thiserror::Error;

use crate::analysis::{
    probability_bracket, white_runs, AnalysisError, Analyzer, Bracket, Couple, Policy, WhiteOutcome,
};
use crate::board::{Board, Color, Move};
use crate::dyadic::Dyadic;
use crate::grundy::Nimber;
use crate::rules::RuleSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("board {0} has no legal move")]
    Terminal(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rationale {
    WhiteWin,
    GreyForced,
    Exact,
}

impl fmt::Display for Rationale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rationale::WhiteWin => "WHITE_WIN",
            Rationale::GreyForced => "GREY_FORCED",
            Rationale::Exact => "EXACT",
        })
    }
}

/// Suggested move with the quantities behind it.
///
/// `couple` and `bracket` are present only for rule sets satisfying the
/// framing condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hint {
    pub mv: Move,
    pub couple: Option<Couple>,
    pub bracket: Option<Bracket>,
    pub white_class: Nimber,
    pub exact_value: Option<Dyadic>,
    pub rationale: Rationale,
}

/// Preference rank of the position left to the opponent; lower is better.
fn couple_rank(c: Couple) -> u8 {
    match (c.parity, c.white) {
        (1, WhiteOutcome::Win) => 0,
        (1, WhiteOutcome::Loss) => 1,
        (0, WhiteOutcome::Loss) => 2,
        _ => 3,
    }
}

#[derive(Debug)]
pub struct Engine {
    analyzer: Analyzer,
}

impl Engine {
    pub fn new(rules: RuleSet) -> Result<Self, StrategyError> {
        Ok(Self {
            analyzer: Analyzer::new(rules)?,
        })
    }

    pub fn with_capacity(rules: RuleSet, capacity: usize) -> Result<Self, StrategyError> {
        Ok(Self {
            analyzer: Analyzer::with_capacity(rules, capacity)?,
        })
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn rules(&self) -> &RuleSet {
        self.analyzer.rules()
    }

    pub fn engine_move(&self, board: &Board, level: Level) -> Result<Move, StrategyError> {
        match level {
            Level::Exact => self.exact_move(board),
            Level::Heuristic => self.heuristic_move(board).map(|(mv, _)| mv),
        }
    }

    /// Exact play when the solver fits, heuristic play otherwise.
    pub fn best_move(&self, board: &Board) -> Result<(Move, Rationale), StrategyError> {
        match self.exact_move(board) {
            Ok(mv) => Ok((mv, Rationale::Exact)),
            Err(StrategyError::Analysis(AnalysisError::CapacityExceeded(_))) => {
                self.heuristic_move(board)
            }
            Err(e) => Err(e),
        }
    }

    fn exact_move(&self, board: &Board) -> Result<Move, StrategyError> {
        self.analyzer
            .optimal_moves(board)
            .map_err(|e| match e {
                AnalysisError::Terminal(b) => StrategyError::Terminal(b),
                e => e.into(),
            })?
            .first()
            .copied()
            .ok_or_else(|| StrategyError::Terminal(board.to_string()))
    }

    /// The heuristic move and which rule produced it.
    pub fn heuristic_move(&self, board: &Board) -> Result<(Move, Rationale), StrategyError> {
        let rules = self.rules();
        let moves = board.legal_moves(rules);
        if moves.is_empty() {
            return Err(StrategyError::Terminal(board.to_string()));
        }
        let block = |mv: &Move| -> Vec<Color> {
            mv.positions()
                .map(|p| board.get(p).expect("live"))
                .collect()
        };

        let white = self.analyzer.white_game();
        let runs = white_runs(board);
        if !white.situation_class(&runs).is_zero() {
            let (row, replacement) = white
                .winning_transition(&runs)
                .expect("nonzero class has a winning transition");
            let target = runs.replace(row, &replacement);
            let white_moves: Vec<Move> = moves
                .iter()
                .copied()
                .filter(|mv| block(mv).iter().all(|&c| c == Color::White))
                .collect();
            let realized = white_moves
                .iter()
                .find(|&&mv| white_runs(&board.after_survival(mv)) == target)
                .or_else(|| {
                    white_moves.iter().find(|&&mv| {
                        self.analyzer
                            .white_class(&board.after_survival(mv))
                            .is_zero()
                    })
                });
            if let Some(&mv) = realized {
                return Ok((mv, Rationale::WhiteWin));
            }
        }

        let safe: Vec<Move> = moves
            .iter()
            .copied()
            .filter(|mv| !block(mv).contains(&Color::Black))
            .collect();
        let grey: Vec<Move> = safe
            .iter()
            .copied()
            .filter(|mv| block(mv).iter().any(|c| c.is_grey()))
            .collect();
        let candidates = if !grey.is_empty() {
            grey
        } else if !safe.is_empty() {
            safe
        } else {
            return Ok((moves[0], Rationale::GreyForced));
        };
        let best = candidates
            .into_iter()
            .min_by_key(|&mv| {
                let rank = self
                    .analyzer
                    .couple(&board.after_survival(mv))
                    .map_or(4, couple_rank);
                (rank, mv)
            })
            .expect("nonempty candidates");
        Ok((best, Rationale::GreyForced))
    }

    pub fn hint(&self, board: &Board) -> Result<Hint, StrategyError> {
        let (mv, rationale) = self.best_move(board)?;
        let exact_value = match rationale {
            Rationale::Exact => Some(self.analyzer.exact_loss_probability(board)?),
            _ => None,
        };
        let couple = if self.analyzer.framing_holds() {
            Some(self.analyzer.couple(board)?)
        } else {
            None
        };
        Ok(Hint {
            mv,
            couple,
            bracket: couple.map(probability_bracket),
            white_class: self.analyzer.white_class(board),
            exact_value,
            rationale,
        })
    }
}

/// The engine as a Monte Carlo policy. `Exact` falls back to the heuristic
/// when the solver runs out of capacity.
#[derive(Clone, Copy, Debug)]
pub struct EnginePolicy<'a> {
    pub engine: &'a Engine,
    pub level: Level,
}

impl Policy for EnginePolicy<'_> {
    fn name(&self) -> &str {
        match self.level {
            Level::Exact => "exact",
            Level::Heuristic => "heuristic",
        }
    }

    fn choose(&self, board: &Board, _rules: &RuleSet) -> Option<Move> {
        let pick = match self.level {
            Level::Exact => self.engine.best_move(board),
            Level::Heuristic => self.engine.heuristic_move(board),
        };
        pick.ok().map(|(mv, _)| mv)
    }
}
