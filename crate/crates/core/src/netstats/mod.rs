//! User profiles, overlap graphs with Louvain communities, regression,
//! correlation and clustering.

mod cluster;
mod graph;
mod ols;
mod profiles;

pub use cluster::{adjusted_rand_index, kmeans, pca, pearson, KMeans, Pca};
pub use graph::{jaccard, louvain, modularity, overlap_graph, Graph, Partition};
pub use ols::{ols, Coefficient, OlsResult};
pub use profiles::{assign_deciles, build_profiles, community_users, decile_assign, write_profiles_csv, UserProfile};
