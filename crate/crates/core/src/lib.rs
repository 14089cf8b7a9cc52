//! Real-time decoding toolkit for quantum LDPC codes.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every algorithm:
//!
//! * [`problem`]: the decoding model `(H, A, p)`, small-code generators, fault
//!   sampling and the logical-failure judgement.
//! * [`gf2`]: bit-packed matrices over GF(2), Gauss–Jordan and lifted
//!   Gauss–Jordan elimination, and the three linear-system problems built on
//!   them.
//! * [`systolic`]: a cycle-accurate simulator of the forward/backward systolic
//!   elimination arrays and the staggered `H(a, b)` systolic line.
//! * [`bp`]: MinSum belief propagation, memory BP legs and Relay chaining.
//! * [`osd`]: filtered ordered-statistics decoding with its hardware stage
//!   model, plus standard OSD-0.
//! * [`cluster`]: the bitmap cluster (generalized Union–Find) decoder.
//! * [`realtime`]: latency-tail conditions, slowdown bound and a backlog
//!   simulator.
//! * [`cost`]: closed-form FPGA resource estimates.
//!
//! File formats, the Monte Carlo harness and the CLI live in the `rtdec`
//! crate.

#![no_std]

extern crate alloc;

pub mod bits;
pub mod bp;
pub mod cluster;
pub mod cost;
pub mod gf2;
pub mod osd;
pub mod outcome;
pub mod problem;
pub mod realtime;
pub mod systolic;

pub use bits::BitVec;
pub use gf2::Gf2Matrix;
pub use outcome::{DecodeOutcome, DecodeStatus, FailureKind, StageCycles};
pub use problem::{DecodingProblem, FaultSet, Syndrome};
