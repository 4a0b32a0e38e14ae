//! Graph-complexity statistics with size/depth/reentrancy bucketing.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::graph::{AmrGraph, InvalidGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SizeBucket {
    #[serde(rename = "1-10")]
    UpTo10,
    #[serde(rename = "11-20")]
    UpTo20,
    #[serde(rename = ">20")]
    Over20,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DepthBucket {
    /// Depths 0 through 3; a single-node graph lands here.
    #[serde(rename = "1-3")]
    UpTo3,
    #[serde(rename = "4-6")]
    UpTo6,
    #[serde(rename = ">6")]
    Over6,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ReentrancyBucket {
    #[serde(rename = "0")]
    None,
    #[serde(rename = "1-3")]
    UpTo3,
    #[serde(rename = ">3")]
    Over3,
}

impl SizeBucket {
    pub const ALL: [SizeBucket; 3] = [SizeBucket::UpTo10, SizeBucket::UpTo20, SizeBucket::Over20];

    pub fn of(size: usize) -> Self {
        match size {
            0..=10 => SizeBucket::UpTo10,
            11..=20 => SizeBucket::UpTo20,
            _ => SizeBucket::Over20,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SizeBucket::UpTo10 => "1-10",
            SizeBucket::UpTo20 => "11-20",
            SizeBucket::Over20 => ">20",
        }
    }
}

impl DepthBucket {
    pub const ALL: [DepthBucket; 3] = [DepthBucket::UpTo3, DepthBucket::UpTo6, DepthBucket::Over6];

    pub fn of(depth: usize) -> Self {
        match depth {
            0..=3 => DepthBucket::UpTo3,
            4..=6 => DepthBucket::UpTo6,
            _ => DepthBucket::Over6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DepthBucket::UpTo3 => "1-3",
            DepthBucket::UpTo6 => "4-6",
            DepthBucket::Over6 => ">6",
        }
    }
}

impl ReentrancyBucket {
    pub const ALL: [ReentrancyBucket; 3] =
        [ReentrancyBucket::None, ReentrancyBucket::UpTo3, ReentrancyBucket::Over3];

    pub fn of(reentrancies: usize) -> Self {
        match reentrancies {
            0 => ReentrancyBucket::None,
            1..=3 => ReentrancyBucket::UpTo3,
            _ => ReentrancyBucket::Over3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ReentrancyBucket::None => "0",
            ReentrancyBucket::UpTo3 => "1-3",
            ReentrancyBucket::Over3 => ">3",
        }
    }
}

macro_rules! display_label {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    )*};
}
display_label!(SizeBucket, DepthBucket, ReentrancyBucket);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub size: usize,
    pub depth: usize,
    pub reentrancies: usize,
    pub size_bucket: SizeBucket,
    pub depth_bucket: DepthBucket,
    pub reent_bucket: ReentrancyBucket,
}

/// Node count, depth (largest shortest-path distance from the root) and the
/// number of nodes with more than one incoming edge. Attributes are not nodes
/// and do not count.
pub fn compute_stats(graph: &AmrGraph) -> Result<GraphStats, InvalidGraph> {
    graph.check()?;
    let n = graph.node_count();
    let root = graph.position(graph.root().as_str()).expect("validated");
    let out = graph.out_edges();

    let mut dist = vec![usize::MAX; n];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &e in &out[u] {
            let v = graph.position(graph.edges()[e].target.as_str()).unwrap();
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let depth = dist.into_iter().max().unwrap_or(0);
    let reentrancies = graph.in_degrees().into_iter().filter(|&d| d > 1).count();

    Ok(GraphStats {
        size: n,
        depth,
        reentrancies,
        size_bucket: SizeBucket::of(n),
        depth_bucket: DepthBucket::of(depth),
        reent_bucket: ReentrancyBucket::of(reentrancies),
    })
}

/// Per-bucket graph counts over a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BucketSummary {
    pub size: [usize; 3],
    pub depth: [usize; 3],
    pub reentrancies: [usize; 3],
}

impl BucketSummary {
    pub fn add(&mut self, stats: &GraphStats) {
        self.size[stats.size_bucket as usize] += 1;
        self.depth[stats.depth_bucket as usize] += 1;
        self.reentrancies[stats.reent_bucket as usize] += 1;
    }

    pub fn total(&self) -> usize {
        self.size.iter().sum()
    }
}

impl fmt::Display for BucketSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, labels: [&str; 3], counts: &[usize; 3]| {
            write!(f, "{}", name)?;
            for (l, c) in labels.iter().zip(counts) {
                write!(f, "\t{} ({})", l, c)?;
            }
            writeln!(f)
        };
        row(f, "Graph Size", SizeBucket::ALL.map(SizeBucket::label), &self.size)?;
        row(f, "Graph Depth", DepthBucket::ALL.map(DepthBucket::label), &self.depth)?;
        row(f, "Reentrancies", ReentrancyBucket::ALL.map(ReentrancyBucket::label), &self.reentrancies)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_stats() {
        let s = compute_stats(&AmrGraph::single("z0", "boy")).unwrap();
        assert_eq!((s.size, s.depth, s.reentrancies), (1, 0, 0));
        assert_eq!(s.depth_bucket, DepthBucket::UpTo3);
    }

    #[test]
    fn reentrant_depth_uses_shortest_path() {
        // a -> b -> c, a -> c
        let mut g = AmrGraph::new("a");
        for id in ["a", "b", "c"] {
            g.add_node(id, "x").unwrap();
        }
        g.add_edge("a", ":r", "b");
        g.add_edge("b", ":r", "c");
        g.add_edge("a", ":s", "c");
        let s = compute_stats(&g).unwrap();
        assert_eq!(s.depth, 1);
        assert_eq!(s.reentrancies, 1);
    }

    #[test]
    fn invalid_graph_is_an_error() {
        let mut g = AmrGraph::new("a");
        g.add_node("a", "x").unwrap();
        g.add_node("b", "x").unwrap();
        assert!(compute_stats(&g).is_err());
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(SizeBucket::of(10), SizeBucket::UpTo10);
        assert_eq!(SizeBucket::of(11), SizeBucket::UpTo20);
        assert_eq!(SizeBucket::of(20), SizeBucket::UpTo20);
        assert_eq!(SizeBucket::of(21), SizeBucket::Over20);
        assert_eq!(DepthBucket::of(3), DepthBucket::UpTo3);
        assert_eq!(DepthBucket::of(4), DepthBucket::UpTo6);
        assert_eq!(DepthBucket::of(6), DepthBucket::UpTo6);
        assert_eq!(DepthBucket::of(7), DepthBucket::Over6);
        assert_eq!(ReentrancyBucket::of(0), ReentrancyBucket::None);
        assert_eq!(ReentrancyBucket::of(1), ReentrancyBucket::UpTo3);
        assert_eq!(ReentrancyBucket::of(3), ReentrancyBucket::UpTo3);
        assert_eq!(ReentrancyBucket::of(4), ReentrancyBucket::Over3);
    }
}
