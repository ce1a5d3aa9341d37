//! Constructive simplicial-volume machinery on hyperbolic surfaces.
//!
//! The crate covers straight simplices and their Lipschitz certificates,
//! straightening with an explicit prism homotopy, cross products of chains,
//! the volume pairing, exact ℓ¹ minimization of fundamental cycles, Monte
//! Carlo smearing between surfaces, and the multiplicity bound for combined
//! covers.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod chain;
pub mod cover;
pub mod error;
pub mod expr;
pub mod geom;
pub mod lp;
pub mod points;
pub mod product;
pub mod quotient;
pub mod report;
pub mod scalar;
pub mod smear;
pub mod straighten;
pub mod suite;
pub mod volume;

pub use affine::{PairMap, PrismMap, SimplexMap, Q};
pub use chain::{Chain, Homotopy, SupportSet};
pub use cover::{CoverInstance, CoverReport};
pub use error::{Error, Result};
pub use expr::{Differential, LipCertificate, LipMethod, SimplexExpr};
pub use geom::{dist, exp_map, frame_isometry, log_map, BaryPoint, HIsometry, HPoint, ProductPoint};
pub use lp::{LpSolution, TriangulatedSurface};
pub use points::{CoverPoint, Deck, FactorPoint, QPoint};
pub use product::{Cochain, CrossCochain};
pub use quotient::{build_net, genus_surface, Net, Quotient};
pub use report::{Config, Report};
pub use scalar::{Dual, Scalar};
pub use smear::{EmpiricalSmear, HaarSampler, SmearReport};
pub use volume::PairingMode;
