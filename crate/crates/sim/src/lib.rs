//! Desk-scale simulated field study: scripted agents play the game through
//! the HTTP API, questionnaire answers are synthesized around the play, and
//! the synthetic recognizer is calibrated to observed field rates.

pub mod calibrate;
pub mod client;
pub mod run;
pub mod scenario;
pub mod sri;
pub mod world;

pub use calibrate::{calibrate, measure, CalibrationError, CalibrationTargets, Rates};
pub use run::{drive, run_scenario, write_outputs, SimError, SimOutput, Tally};
pub use scenario::{Scenario, ScenarioError, SriParams};
