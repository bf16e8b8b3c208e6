//! Clustering for inter-group separation.
//!
//! Two separation criteria are supported: the minimum spacing between any two
//! groups (`Min-Sp`) and the total weight of the minimum spanning tree over the
//! groups' spacing graph (`MST-Sp`). Single-linkage maximizes both without a
//! size constraint; [`constrained::algo_min_sp`] and
//! [`constrained::constrained_max_mst`] handle a minimum group size.
//!
//! ```
//! use spacing_clust::{dataset::DistanceModel, linkage, spacing};
//!
//! let model = DistanceModel::from_points(vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
//! let seq = linkage::single_linkage(&model);
//! let labels = seq.cut(2).unwrap();
//! let graph = spacing::spacing_graph(&model, &labels).unwrap();
//! assert_eq!(graph.min_sp(), 9.0);
//! ```

pub mod baseline;
pub mod constrained;
pub mod dataset;
pub mod error;
pub mod linkage;
pub mod oracle;
pub mod scheduling;
pub mod spacing;

pub use error::{Error, Result};
