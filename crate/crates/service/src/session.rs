use std::fmt;

use qnim::{Board, Move, MoveResult, RuleSet, SeededBits};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Player {
    Human,
    Engine,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Human => Player::Engine,
            Player::Engine => Player::Human,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Human => "HUMAN",
            Player::Engine => "ENGINE",
        })
    }
}

impl std::str::FromStr for Player {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "HUMAN" => Ok(Player::Human),
            "ENGINE" => Ok(Player::Engine),
            _ => Err(ServiceError::BadRequest(format!("unknown player {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Ongoing,
    WonBy(Player),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ongoing => f.write_str("ONGOING"),
            Status::WonBy(p) => write!(f, "WON_BY({p})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Turn {
    pub player: Player,
    pub mv: Move,
    pub result: MoveResult,
    /// Board after the move.
    pub board: Board,
}

/// One game. Measurements come from the session's own seeded stream, read
/// in order across the whole game, so the history replays exactly.
#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub rules: RuleSet,
    pub initial: Board,
    pub board: Board,
    pub first: Player,
    pub to_move: Player,
    pub history: Vec<Turn>,
    pub status: Status,
    pub seed: u64,
    bits: SeededBits,
}

impl Session {
    pub fn new(
        id: String,
        length: usize,
        rules: RuleSet,
        first: Player,
        seed: u64,
    ) -> Result<Self, ServiceError> {
        if length == 0 {
            return Err(ServiceError::BadLength(length));
        }
        let board = Board::new_chain(length).map_err(|_| ServiceError::BadLength(length))?;
        Self::with_board(id, board, rules, first, seed)
    }

    /// A session starting from an arbitrary position.
    pub fn with_board(
        id: String,
        board: Board,
        rules: RuleSet,
        first: Player,
        seed: u64,
    ) -> Result<Self, ServiceError> {
        if !rules.is_quantum() {
            return Err(ServiceError::Parse(format!(
                "{rules} is a classical code and cannot be played"
            )));
        }
        let status = if board.legal_moves(&rules).is_empty() {
            Status::WonBy(first.other())
        } else {
            Status::Ongoing
        };
        Ok(Self {
            id,
            rules,
            initial: board.clone(),
            board,
            first,
            to_move: first,
            history: Vec::new(),
            status,
            seed,
            bits: SeededBits::new(seed),
        })
    }

    pub fn is_over(&self) -> bool {
        self.status != Status::Ongoing
    }

    /// Plays `mv` for `player`.
    pub fn play(&mut self, player: Player, mv: Move) -> Result<&Turn, ServiceError> {
        if let Status::WonBy(_) = self.status {
            return Err(ServiceError::GameOver(self.id.clone()));
        }
        if player != self.to_move {
            return Err(ServiceError::NotYourTurn(player));
        }
        let (board, result) = self
            .board
            .apply_move(&self.rules, mv, &mut self.bits)
            .map_err(|e| ServiceError::IllegalMove(e.to_string()))?;
        if !result.survived {
            self.status = Status::WonBy(player.other());
        } else if board.legal_moves(&self.rules).is_empty() {
            self.status = Status::WonBy(player);
        } else {
            self.to_move = player.other();
        }
        self.board = board.clone();
        self.history.push(Turn {
            player,
            mv,
            result,
            board,
        });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Replays a move list from the initial position with the same seed.
    pub fn replay<'a>(
        id: String,
        initial: Board,
        rules: RuleSet,
        first: Player,
        seed: u64,
        moves: impl IntoIterator<Item = &'a (Player, Move)>,
    ) -> Result<Self, ServiceError> {
        let mut s = Self::with_board(id, initial, rules, first, seed)?;
        for &(player, mv) in moves {
            s.play(player, mv)?;
        }
        Ok(s)
    }
}
