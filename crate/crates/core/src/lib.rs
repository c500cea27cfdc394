pub mod cli;
pub mod flow;
pub mod horseshoe;
pub mod melnikov;
pub mod model;
pub mod ode;
pub mod point;
pub mod quad;
pub mod roots;
pub mod timemap;

pub use point::PhasePoint;
