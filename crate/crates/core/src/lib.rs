//! Network-aware peer-to-peer energy trading among smart-home prosumers.
//!
//! Prosumers schedule solar, battery and HVAC use and trade energy with each
//! other; a distribution operator enforces trade balance and linearized
//! feeder constraints. The coupled problem is solved either centrally
//! ([`oracle`]) or by an asynchronous ADMM loop ([`coordinator`]) where each
//! prosumer only reveals its trade and net-load vectors.

pub mod coordinator;
pub mod error;
pub mod experiment;
pub mod formulation;
pub mod model;
pub mod network;
pub mod oracle;
pub mod prosumer;
pub mod scenario;

pub use error::{ConstraintFamily, CoreError, ModelError};
pub use model::{ProsumerParams, ScheduleDecision, ThermalForm, TimeGrid, ViolationReport};
pub use network::{NetworkModel, NetworkState};
pub use scenario::Scenario;
