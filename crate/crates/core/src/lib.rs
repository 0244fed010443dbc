//! Sequence kernels with discrete masses and the RKHS tools built on them.
//!
//! Sequences are finite strings over an [`Alphabet`](seq::Alphabet), padded
//! on the right by an implicit stop symbol when compared position by position.
//! Kernels implement [`SequenceKernel`](kernel::SequenceKernel) and are shared
//! behind the cheap-to-clone [`Kernel`](kernel::Kernel) handle.

pub mod alignment;
pub mod config;
pub mod embedding;
pub mod error;
pub mod kernel;
pub mod optimize;
pub mod positional;
pub mod rkhs;
pub mod seq;
pub mod spectrum;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use kernel::{Kernel, KernelInfo, MassStatus, SequenceKernel};
pub use seq::{Alphabet, Letter, Sequence};
