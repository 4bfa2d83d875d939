// Component, k-core, clustering, density and virality metrics of a small
// directed graph.
//
// cargo run --example graph_metrics

use diffnet::features::graph_features;
use diffnet::graphops::*;

pub fn run_example() -> diffnet::Result<()> {
    // a 3-cycle with a tail, plus a separate pair
    let (graph, labels) = DirectedGraph::from_labeled_edges([("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("x", "y")]);
    let sccs = strongly_connected_components(&graph);
    let wccs = weakly_connected_components(&graph);
    println!("nodes {:?}", labels);
    println!("{} SCCs, {} WCCs", sccs.len(), wccs.len());
    let largest = wccs.iter().max_by_key(|c| c.len()).unwrap();
    println!("diameter {}", diameter_undirected(&graph, largest)?);
    println!("structural virality {:.4}", structural_virality(&graph, largest)?);
    println!("main k-core {}", main_kcore_number(&graph));
    println!("clustering {:.4}", average_clustering(&graph));
    println!("density {:.4}", density(&graph));
    println!("{:?}", graph_features(&graph).to_array());
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
