//! Phasor-domain simulation of a two-source three-phase transmission line.
//!
//! The line of interest connects two 240 kV, 60 Hz sources through a
//! three-phase line of configurable length, with a small constant-impedance
//! load at the receiving bus. Faults are modelled as resistive branches at a
//! configurable distance from bus 1 and the network is solved before and
//! after the fault in the phasor domain; time-domain waveforms are then
//! stitched from both solutions at a configurable inception angle
//! (quasi-steady-state switching).

mod grid;
mod io;
mod mna;
mod params;
mod sequence;
mod solver;
mod waveform;

pub use grid::{generate_grid, GridSpec};
pub use io::{
    read_waveforms_bin, read_waveforms_csv, write_waveforms_bin, write_waveforms_csv,
};
pub use mna::ComplexMna;
pub use params::{
    FaultSpec, LineParams, SourceParams, LOAD_ACTIVE_KW, LOAD_REACTIVE_KVAR, SAMPLE_RATE_HZ,
    SUPPORTED_LENGTHS_KM, SYSTEM_FREQ_HZ,
};
pub use sequence::{phase_to_sequence, sequence_to_phase, shunt_admittance, PhaseImpedanceMatrix};
pub use solver::{solve_network, PhasorSolution};
pub use waveform::{synthesize_waveforms, NoiseSpec, WaveformRecord};
