use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use qnim::analysis::{AnalysisError, DEFAULT_CAPACITY};
use qnim::strategy::{Hint, StrategyError};
use qnim::{Board, Dyadic, Engine, GrundySolver, Move, RuleSet};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::{Player, Session, Turn};

/// Largest `n` accepted for Grundy tables.
pub const MAX_TABLE: usize = 100_000;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
enum Event {
    Created {
        id: String,
        rules: String,
        board: String,
        first: Player,
        seed: u64,
    },
    Move {
        id: String,
        player: Player,
        #[serde(rename = "move")]
        mv: String,
        board: String,
    },
}

fn parse_rules(code: &str) -> Result<RuleSet, ServiceError> {
    code.parse()
        .map_err(|e: qnim::rules::RuleError| ServiceError::Parse(e.to_string()))
}

fn strategy_error(e: StrategyError) -> ServiceError {
    match e {
        StrategyError::Terminal(b) => {
            ServiceError::IllegalMove(format!("board {b} has no legal move"))
        }
        StrategyError::Analysis(a) => analysis_error(a),
    }
}

fn analysis_error(e: AnalysisError) -> ServiceError {
    match e {
        AnalysisError::Rule(r) => ServiceError::Parse(r.to_string()),
        e => ServiceError::Unsupported(e.to_string()),
    }
}

/// In-memory sessions with an optional append-only log.
#[derive(Debug)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    engines: Mutex<HashMap<RuleSet, Arc<Engine>>>,
    capacity: usize,
    log: Option<Mutex<File>>,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            sessions: RwLock::default(),
            engines: Mutex::default(),
            capacity,
            log: None,
        }
    }

    /// Opens `path`, replays every session recorded there and appends new
    /// events to it.
    pub fn with_log(path: &Path, capacity: usize) -> Result<Self, ServiceError> {
        let log_err = |e: std::io::Error| ServiceError::Log(e.to_string());
        let mut store = Self::new(capacity);
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(log_err)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(log_err)?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: Event = serde_json::from_str(&line)
                    .map_err(|e| ServiceError::Log(format!("line {}: {e}", i + 1)))?;
                store.replay_event(event).map_err(|e| match e {
                    ServiceError::Log(m) => ServiceError::Log(format!("line {}: {m}", i + 1)),
                    e => ServiceError::Log(format!("line {}: {e}", i + 1)),
                })?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(log_err)?;
        store.log = Some(Mutex::new(file));
        Ok(store)
    }

    fn replay_event(&mut self, event: Event) -> Result<(), ServiceError> {
        let sessions = self.sessions.get_mut().expect("sessions lock");
        match event {
            Event::Created {
                id,
                rules,
                board,
                first,
                seed,
            } => {
                let board: Board = board
                    .parse()
                    .map_err(|e| ServiceError::Log(format!("{e}")))?;
                let s = Session::with_board(id.clone(), board, parse_rules(&rules)?, first, seed)?;
                sessions.insert(id, Arc::new(Mutex::new(s)));
            }
            Event::Move {
                id,
                player,
                mv,
                board,
            } => {
                let session = sessions
                    .get(&id)
                    .ok_or_else(|| ServiceError::UnknownSession(id.clone()))?;
                let mut s = session.lock().expect("session lock");
                let mv: Move = mv.parse().map_err(|e| ServiceError::Log(format!("{e}")))?;
                s.play(player, mv)?;
                if s.board.to_string() != board {
                    return Err(ServiceError::Log(format!(
                        "replay of {id} gave {} instead of {board}",
                        s.board
                    )));
                }
            }
        }
        Ok(())
    }

    fn append(&self, event: &Event) -> Result<(), ServiceError> {
        let Some(log) = &self.log else {
            return Ok(());
        };
        let mut line = serde_json::to_string(event).expect("events serialize");
        line.push('\n');
        let mut file = log.lock().expect("log lock");
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| ServiceError::Log(e.to_string()))
    }

    /// The shared engine for `rules`, built on first use.
    pub fn engine(&self, rules: &RuleSet) -> Result<Arc<Engine>, ServiceError> {
        let mut engines = self.engines.lock().expect("engines lock");
        if let Some(e) = engines.get(rules) {
            return Ok(Arc::clone(e));
        }
        let engine =
            Arc::new(Engine::with_capacity(rules.clone(), self.capacity).map_err(strategy_error)?);
        engines.insert(rules.clone(), Arc::clone(&engine));
        Ok(engine)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn create_session(
        &self,
        length: usize,
        rules: &str,
        first: Player,
        seed: Option<u64>,
    ) -> Result<Session, ServiceError> {
        let rules = parse_rules(rules)?;
        let seed = seed.unwrap_or_else(rand::random);
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::new(id.clone(), length, rules, first, seed)?;
        self.append(&Event::Created {
            id: id.clone(),
            rules: session.rules.to_string(),
            board: session.board.to_string(),
            first,
            seed,
        })?;
        self.sessions
            .write()
            .expect("sessions lock")
            .insert(id, Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    /// A consistent snapshot of the session.
    pub fn get(&self, id: &str) -> Result<Session, ServiceError> {
        Ok(self.session(id)?.lock().expect("session lock").clone())
    }

    fn play_locked(&self, s: &mut Session, player: Player, mv: Move) -> Result<Turn, ServiceError> {
        let turn = s.play(player, mv)?.clone();
        self.append(&Event::Move {
            id: s.id.clone(),
            player,
            mv: mv.to_string(),
            board: turn.board.to_string(),
        })?;
        Ok(turn)
    }

    pub fn submit_move(
        &self,
        id: &str,
        player: Player,
        mv: Move,
    ) -> Result<(Turn, Session), ServiceError> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session lock");
        let turn = self.play_locked(&mut s, player, mv)?;
        Ok((turn, s.clone()))
    }

    pub fn engine_turn(&self, id: &str) -> Result<(Turn, Session), ServiceError> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session lock");
        if s.is_over() {
            return Err(ServiceError::GameOver(id.to_string()));
        }
        if s.to_move != Player::Engine {
            return Err(ServiceError::NotYourTurn(Player::Engine));
        }
        let engine = self.engine(&s.rules)?;
        let (mv, _) = engine.best_move(&s.board).map_err(strategy_error)?;
        let turn = self.play_locked(&mut s, Player::Engine, mv)?;
        Ok((turn, s.clone()))
    }

    pub fn hint(&self, id: &str) -> Result<Hint, ServiceError> {
        let s = self.get(id)?;
        if s.is_over() {
            return Err(ServiceError::GameOver(id.to_string()));
        }
        self.engine(&s.rules)?
            .hint(&s.board)
            .map_err(strategy_error)
    }

    /// Exact losing probability of the player to move.
    pub fn value(&self, board: &str, rules: &str) -> Result<Dyadic, ServiceError> {
        let rules = parse_rules(rules)?;
        let board: Board = board
            .parse()
            .map_err(|e| ServiceError::Parse(format!("{e}")))?;
        self.engine(&rules)?
            .analyzer()
            .exact_loss_probability(&board)
            .map_err(analysis_error)
    }

    /// Grundy table of a classical code as TSV.
    pub fn grundy_tsv(&self, rules: &str, n: usize) -> Result<String, ServiceError> {
        if n > MAX_TABLE {
            return Err(ServiceError::BadRequest(format!(
                "n must be at most {MAX_TABLE}"
            )));
        }
        let rules = parse_rules(rules)?;
        let solver = GrundySolver::new(rules).map_err(|e| ServiceError::Parse(e.to_string()))?;
        Ok(solver.table(n).to_tsv())
    }
}
