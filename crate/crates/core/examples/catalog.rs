//! Browse the built-in metric catalog by perspective, cluster and keyword.
//!
//! cargo run -p datavalor --example catalog -- [keyword]

use datavalor::catalog::{BscPerspective, MetricCatalog, MetricFilter};

fn main() {
    let catalog = MetricCatalog::default_catalog();
    println!("catalog {} with {} metrics", catalog.version, catalog.metrics.len());

    for p in BscPerspective::ALL {
        let metrics = catalog.find(&MetricFilter::default().perspective(p));
        let ids: Vec<_> = metrics.iter().map(|m| m.id.as_str()).collect();
        println!("{p:?}: {}", ids.join(", "));
    }

    let keyword = std::env::args().nth(1).unwrap_or_else(|| "cost".into());
    println!("\nmatching {keyword:?}:");
    for m in catalog.find(&MetricFilter::default().keyword(&keyword)) {
        println!(
            "  {:<18} {:<12} {:?}, {:?} correlation, {}",
            m.id, m.cluster, m.normalization_kind, m.correlation, m.unit
        );
    }
}
