//! Structures behind the comparison views: 2-D embeddings of algorithms,
//! the shared reference-fitted projection, the kNN generation graph with its
//! layout and clustering, and solution-set sampling with density grids.

pub mod embedding;
pub mod graph;
pub mod hdbscan;
pub mod layout;
pub mod lof;
pub mod pca;
pub mod view;

pub use embedding::{embed_algorithms, Embedding2D, EmbeddingMethod};
pub use graph::{build_generation_graph, GenerationGraph, GraphParams};
pub use hdbscan::{hdbscan, HdbscanParams};
pub use layout::{kamada_kawai, stress, KkLayout};
pub use lof::lof;
pub use pca::{project_reference_pca, Projection};
pub use view::{sample_solution_view, SolutionViewConfig, SolutionViewModel};
