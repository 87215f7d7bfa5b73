//! k-center clustering by farthest-first traversal, run either on a full
//! dataset or on a δ-cover of it.
//!
//! Running farthest-first on a δ-cover `Q` of `P` with `|Q| >= k` gives
//! `cost(FF(Q), P) <= 2·OPT + δ`. This crate provides the pieces to build
//! covers, run the traversal, and check that bound (and the classical
//! `2·OPT` one) exactly on small instances:
//!
//! - [`metric`]: point sets, distances, `d(p, C)` and `cost(C, S)`
//! - [`farthest_first`]: the traversal with explicit seeding and tie-breaks
//! - [`cover`]: uncovered-first cover construction and verification
//! - [`oracle`]: exhaustive exact k-center and bound checks
//! - [`fixtures`]: small hand-built instances with known radii
//! - [`ingest`]: CSV / binary I/O, z-transform, synthetic mixtures
//! - [`harness`], [`report`]: timed pipeline runs and JSON reports
//!
//! ```
//! use kcenter::{build_cover, cost, farthest_first, PointSet, ScanOrder, SeedPolicy};
//!
//! let ps = PointSet::line(&[0.0, 2.0, 3.0, 4.0]).unwrap();
//! let cover = build_cover(&ps, 1.0, ScanOrder::Natural).unwrap();
//! assert_eq!(cover.cover.indices(), &[0, 1, 3]);
//!
//! let trace = farthest_first(&cover.cover, 2, SeedPolicy::FirstIndex, &ps).unwrap();
//! let on_p = cost(&trace.centers(&ps), &ps.full(), &ps).unwrap();
//! assert!(on_p.radius <= 2.0 * 1.0 + 1.0);
//! ```

pub mod cover;
pub mod error;
pub mod farthest_first;
pub mod fixtures;
pub mod harness;
pub mod ingest;
pub mod metric;
pub mod oracle;
pub mod report;
mod scan;

pub use cover::{build_cover, verify_cover, CoverCheck, CoverResult, ScanOrder};
pub use error::{Error, Result};
pub use farthest_first::{farthest_first, FFTrace, SeedPolicy};
pub use fixtures::{fixture, Fixture};
pub use metric::{cost, dist_to_set, distance, CostReport, IndexSubset, MetricKind, PointSet};
pub use oracle::{opt_kcenter, BoundReport, OptResult};
pub use report::RunReport;
