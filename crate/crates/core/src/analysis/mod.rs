//! Clustering of hate embeddings, purity scoring and interpretability.

mod cluster;
mod interpret;
mod purity;

pub use cluster::{
    agglomerative_cluster, clusters_to_lines, cosine_distance, parse_cluster_lines,
    ClusterAssignment, Linkage, TIE_EPS,
};
pub use interpret::{
    agreement, explain, extract_hate_embeddings, hate_embeddings, perturb_importance, spearman,
    top_words, Agreement, AttentionReport, HateEmbedding, Importances,
};
pub use purity::{purity, purity_report, PurityReport, PurityVariant};
