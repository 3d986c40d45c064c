//! NDCG of a few label orderings, with and without a cutoff.

use juggler_mab::reward::{ndcg, NdcgConfig};

fn main() {
    let full = NdcgConfig::default();
    let top3 = NdcgConfig {
        cutoff: Some(3),
        ..NdcgConfig::default()
    };
    for labels in [
        vec![5, 1, 0, 0],
        vec![0, 1, 5, 0],
        vec![0, 0, 1, 5],
        vec![0, 0, 0, 0],
    ] {
        println!(
            "{labels:?}: ndcg {:.4}, ndcg@3 {:.4}",
            ndcg(&labels, &full),
            ndcg(&labels, &top3)
        );
    }
}
