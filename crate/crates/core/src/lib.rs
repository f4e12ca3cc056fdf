pub mod cache;
pub mod clause;
pub mod encode;
pub mod engine;
pub mod error;
pub mod generate;
pub mod oracle;
pub mod session;
pub mod stream;
pub mod harness;
