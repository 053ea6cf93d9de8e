//! Solver, analyzer and playing engine for quantum octal games on chains.
//!
//! The game `Q0.7` is played on a chain of squares. A square is a qubit in one
//! of four product states drawn as colors (White, LightGray, Black, DarkGray).
//! Choosing a square measures it; observing `|1⟩` loses, otherwise the square
//! is removed and `√NOT` is applied to its neighbours. A player with no legal
//! move loses. The general family `Q0.q1q2…` lets a player take blocks of
//! adjacent squares, with the block shapes allowed by octal digits.
//!
//! Modules, bottom-up:
//!
//! * [`bits`]: measurement bit sources, including the seeded stream used for
//!   reproducible games.
//! * [`dyadic`]: exact `m/2^k` probabilities.
//! * [`board`]: chain state and the measure/remove/`√NOT` dynamics.
//! * [`rules`]: octal rule codes and the quantum → white game association.
//! * [`grundy`]: Sprague-Grundy classes of classical octal games.
//! * [`analysis`]: lucky-player parity, couples, probability brackets, the
//!   exact expectimax solver and Monte Carlo estimation.
//! * [`strategy`]: the playing engine and hints.

pub mod analysis;
pub mod bits;
pub mod board;
pub mod dyadic;
pub mod grundy;
pub mod rules;
pub mod strategy;

pub use analysis::{Bracket, Couple, WhiteOutcome};
pub use bits::{BitSource, FixedBits, SeededBits};
pub use board::{Board, Color, Move, MoveResult, Segment};
pub use dyadic::Dyadic;
pub use grundy::{GrundySolver, GrundyTable, Nimber, Situation};
pub use rules::{DigitFlags, RuleSet};
pub use strategy::{Engine, Hint, Level};
