//! Feature extraction: waveforms to normalized 7×7 main-harmonic frames.
//!
//! Each sample frame holds 7 consecutive 30-sample windows (stride 1,
//! starting at the fault inception index) by 7 features: the 60 Hz
//! main-harmonic amplitudes of the three phase voltages, three phase
//! currents, and the zero-sequence current.

mod classcode;
mod frame;
mod harmonic;
mod io;
mod scaler;
mod split;

pub use classcode::{ClassCode, CLASS_CODES, CLASS_COUNT};
pub use frame::{assemble_frame, FeatureVector, Sample, Window, FRAME_DIM, WINDOW_LEN};
pub use harmonic::{main_harmonic, zero_sequence};
pub use io::{read_dataset_csv, read_scaler, write_dataset_csv, write_scaler};
pub use scaler::{fit_scaler, Scaler};
pub use split::split_dataset;
