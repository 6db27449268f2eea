//! Link-identified routing for polar LEO constellations.
//!
//! Satellites in a polar grid keep links to four fixed neighbors, so an
//! end-to-end path can be named by the set of unidirectional inter-satellite
//! link identifiers it uses. This crate implements that idea end to end:
//!
//! * [`bloom`] — the in-packet Bloom filter that carries the identifier set,
//!   with its false-positive model;
//! * [`constellation`] — grid topology, link identifiers, orbital geometry;
//! * [`analytics`] — closed-form forwarding-overhead model and the
//!   overhead-minimizing filter length;
//! * [`encoding`] — segment-encoding policies and the dynamic program that
//!   picks the optimal one;
//! * [`forwarding`] — packet formats, per-hop membership forwarding, and the
//!   explicit-list baseline;
//! * [`linkstate`] — link-failure management: announcement flooding,
//!   on-demand rerouting, and on-demand detouring;
//! * [`multicast`] — tree construction for one-to-many delivery, plus the
//!   node-identified counterexample;
//! * [`sim`] — a deterministic discrete-event simulator tying it together;
//! * [`scenario`] — the plain-text experiment configuration format.

pub mod analytics;
pub mod bloom;
pub mod constellation;
pub mod encoding;
pub mod forwarding;
pub mod linkstate;
pub mod multicast;
pub mod rng;
pub mod scenario;
pub mod sim;

pub use bloom::{BloomFilter, LinkId};
pub use constellation::{Constellation, SatId};
