//! Game sessions over HTTP: create a chain, play against the engine, ask for
//! hints and exact values.

pub mod error;
pub mod http;
pub mod session;
pub mod store;

pub use error::ServiceError;
pub use http::{router, serve};
pub use session::{Player, Session, Status, Turn};
pub use store::SessionStore;
