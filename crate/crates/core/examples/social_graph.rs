//! Preferential-attachment graph, centrality rankings and spectral communities.

use proactive_cache::seed::{self, Stream};
use proactive_cache::socialnet::{self, Centrality};

fn main() -> proactive_cache::Result<()> {
    let g = socialnet::generate_preferential_attachment(32, 2, &mut seed::stream(5, Stream::Graph))?;
    println!("{} users, {} edges", g.user_count(), g.edge_count());

    for metric in [Centrality::Degree, Centrality::Closeness, Centrality::Betweenness, Centrality::Eigenvector] {
        let scores = socialnet::centrality(&g, metric)?;
        println!("{metric:>12}: top-3 {:?}", socialnet::top_k_influential(&scores, 3)?);
    }

    let eig = socialnet::centrality(&g, Centrality::Eigenvector)?;
    println!("leading eigenvalue {:.4}", eig.leading_eigenvalue.unwrap());
    let communities = socialnet::form_communities(&g, &eig, 3, &mut seed::stream(5, Stream::Communities))?;
    for c in 0..communities.community_count() {
        println!(
            "community {c}: influencer {:2}, members {:?}",
            communities.influencer_of[c],
            communities.members(c)
        );
    }
    Ok(())
}
