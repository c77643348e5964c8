//! Capacity bounds for complex Gaussian MIMO relay channels.
//!
//! The crate computes upper and lower bounds on the capacity of the
//! three-node Gaussian relay network — cutset upper bound, decode–forward,
//! partial decode–forward (coherent and noncoherent), compress–forward, and
//! direct transmission, plus half-duplex (sender/receiver frequency division)
//! variants — and checks the additive and multiplicative gap guarantees that
//! relate them.
//!
//! Layering, bottom to top:
//!
//! * [`kernels`] — validated Hermitian/PSD matrix types and the numeric
//!   primitives (`log₂ det(I + G K Gᴴ)`, Schur-complement conditional
//!   covariance, PSD projection, trace retraction).
//! * [`channel`] — channel-model types, seeded reproducible random channels,
//!   JSON (de)serialization, and the half-duplex embeddings.
//! * [`bounds`] — closed-form evaluators mapping a channel and input
//!   covariance to the two cut terms of each bound family.
//! * [`optimizer`] — the max–min covariance search (projected supergradient
//!   ascent inside a golden-section dual scan) turning evaluators into
//!   certified rate bounds.
//! * [`gaps`] — theoretical gap ceilings, Monte Carlo gap experiments, and
//!   the coherent-vs-noncoherent separation curve.

pub mod bounds;
pub mod channel;
pub mod gaps;
pub mod kernels;
pub mod optimizer;
