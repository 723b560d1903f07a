//! Chemical graphs, formal reactions, and the disconnection-rule term calculus.

pub mod graph;
pub mod normalize;
pub mod oracle;
pub mod reaction;
pub mod rules;
pub mod semantics;
pub mod term;
pub mod text;
