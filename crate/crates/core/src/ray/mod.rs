//! qL ray tracing: kinematics, paraxial spreading and amplitudes.

pub mod amplitude;
pub mod hamiltonian;
pub mod integrate;
pub mod interface;
pub mod io;
pub mod state;
pub mod trace;

pub use amplitude::{amplitude, Amplitude, REFERENCE_TIME_US};
pub use hamiltonian::{Derivatives, Hamiltonian, V2};
pub use integrate::{derivatives, eikonal_residual, initial_state, step, takeoff_direction, Scheme, StepConfig, DEFAULT_DT_US};
pub use state::{EventKind, Ray, RayEvent, RayState, TerminalStatus};
pub use trace::{trace, trace_from, TraceOptions};

#[cfg(test)]
mod tests;
