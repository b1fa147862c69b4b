//! Batch-stream sources: synthetic joint-Gaussian view pairs with known canonical
//! structure, delimited-text ingestion, a column-split two-view adapter, online
//! mean-centering and a binary matrix cache.
//!
//! Every source is an iterator of `Result<ViewPairBatch<T>>` that yields batches in
//! row order.

mod batch;
mod center;
mod delimited;
mod matcache;
mod split;
mod synthetic;

pub use batch::{collect_views, ViewPairBatch};
pub use center::{center_two_pass, CenterOnline};
pub use delimited::{load_delimited, load_delimited_pair, write_delimited, DelimitedPairStream, DelimitedRows};
pub use matcache::{read_matrix_cache, write_matrix_cache, MATRIX_CACHE_MAGIC};
pub use split::{split_views, SplitViews};
pub use synthetic::{gen_synthetic, SyntheticGaussianSpec, SyntheticStream};

/// Boxed batch source, the common currency between sources and consumers.
pub type BatchSource<T> = Box<dyn Iterator<Item = crate::Result<ViewPairBatch<T>>> + Send>;
