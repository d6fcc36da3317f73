use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::PathError;
use crate::store::{LinkId, NodeId, Topology};

/// Loopless route between two ROADMs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Route {
    pub links: Vec<LinkId>,
    pub nodes: Vec<NodeId>,
    pub length_km: f64,
}

impl Route {
    /// Ordering used everywhere routes are ranked: length, then link ids.
    pub fn rank(&self, other: &Route) -> Ordering {
        self.length_km
            .total_cmp(&other.length_km)
            .then_with(|| self.links.cmp(&other.links))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RouteSet {
    pub routes: Vec<Route>,
    /// Fewer than `k` loopless routes exist.
    pub exhausted: bool,
}

struct Graph<'a> {
    topology: &'a Topology,
    /// node → (link id, neighbor, length) sorted by link id.
    adjacency: BTreeMap<&'a str, Vec<(&'a LinkId, &'a NodeId, f64)>>,
}

impl<'a> Graph<'a> {
    fn new(topology: &'a Topology) -> Self {
        let mut adjacency: BTreeMap<&str, Vec<(&LinkId, &NodeId, f64)>> = BTreeMap::new();
        for link in &topology.links {
            let len = link.length_km();
            adjacency.entry(link.a.as_str()).or_default().push((&link.id, &link.b, len));
            adjacency.entry(link.b.as_str()).or_default().push((&link.id, &link.a, len));
        }
        for edges in adjacency.values_mut() {
            edges.sort_by(|x, y| x.0.cmp(y.0));
        }
        Graph { topology, adjacency }
    }

    fn route_length(&self, links: &[LinkId]) -> f64 {
        links
            .iter()
            .map(|l| self.topology.link(l.as_str()).expect("route over known links").length_km())
            .fold(0.0, |acc, x| acc + x)
    }

    /// Dijkstra keyed on (length, link-id sequence), avoiding the given links
    /// and nodes.
    fn shortest(
        &self,
        src: &str,
        dst: &str,
        banned_links: &HashSet<&str>,
        banned_nodes: &HashSet<&str>,
    ) -> Option<(Vec<LinkId>, Vec<NodeId>)> {
        type Label = (f64, Vec<LinkId>, Vec<NodeId>);
        let better = |a: &Label, b: &Label| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)) == Ordering::Less;
        let mut best: BTreeMap<&str, Label> = BTreeMap::new();
        let mut done: HashSet<&str> = HashSet::new();
        best.insert(src, (0.0, Vec::new(), vec![NodeId::from(src)]));
        loop {
            let (node, label) = best
                .iter()
                .filter(|(n, _)| !done.contains(*n))
                .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then_with(|| a.1 .1.cmp(&b.1 .1)))
                .map(|(n, l)| (*n, l.clone()))?;
            if node == dst {
                return Some((label.1, label.2));
            }
            done.insert(node);
            for &(link, next, len) in self.adjacency.get(node).into_iter().flatten() {
                let next_s = next.as_str();
                if done.contains(next_s) || banned_links.contains(link.as_str()) || banned_nodes.contains(next_s) {
                    continue;
                }
                let mut links = label.1.clone();
                links.push(link.clone());
                let mut nodes = label.2.clone();
                nodes.push(next.clone());
                let cand = (label.0 + len, links, nodes);
                if best.get(next_s).is_none_or(|cur| better(&cand, cur)) {
                    best.insert(next_s, cand);
                }
            }
        }
    }
}

fn resolve<'t>(topology: &'t Topology, endpoint: &str) -> Result<&'t str, PathError> {
    topology
        .attachment(endpoint)
        .map(|(r, _)| r.id.as_str())
        .ok_or_else(|| PathError::UnknownNode(NodeId::from(endpoint)))
}

/// Up to `k` loopless routes by Yen's algorithm, ordered by length then by
/// link-id sequence. Endpoints may be ROADMs or transceiver sites.
pub fn k_shortest_routes(topology: &Topology, src: &str, dst: &str, k: usize) -> Result<RouteSet, PathError> {
    k_shortest_routes_avoiding(topology, src, dst, k, &HashSet::new())
}

/// As [`k_shortest_routes`], never using a link in `avoid`.
pub fn k_shortest_routes_avoiding(
    topology: &Topology,
    src: &str,
    dst: &str,
    k: usize,
    avoid: &HashSet<LinkId>,
) -> Result<RouteSet, PathError> {
    if k == 0 {
        return Err(PathError::InvalidRequest("k must be at least 1".into()));
    }
    let (s, d) = (resolve(topology, src)?, resolve(topology, dst)?);
    if s == d {
        return Err(PathError::InvalidRequest(format!("{src} and {dst} share ROADM {s}")));
    }
    let graph = Graph::new(topology);
    let avoid: HashSet<&str> = avoid.iter().map(LinkId::as_str).collect();
    let no_route = || PathError::NoRoute {
        src: NodeId::from(src),
        dst: NodeId::from(dst),
    };
    let (links, nodes) = graph.shortest(s, d, &avoid, &HashSet::new()).ok_or_else(no_route)?;
    let mut accepted = vec![Route {
        length_km: graph.route_length(&links),
        links,
        nodes,
    }];
    let mut candidates: Vec<Route> = Vec::new();
    while accepted.len() < k {
        let prev = accepted.last().expect("non-empty").clone();
        for i in 0..prev.links.len() {
            let spur = prev.nodes[i].as_str();
            let root_links = &prev.links[..i];
            let mut banned_links = avoid.clone();
            for r in &accepted {
                if r.links.len() > i && r.links[..i] == *root_links {
                    banned_links.insert(r.links[i].as_str());
                }
            }
            let banned_nodes: HashSet<&str> = prev.nodes[..i].iter().map(NodeId::as_str).collect();
            if let Some((spur_links, spur_nodes)) = graph.shortest(spur, d, &banned_links, &banned_nodes) {
                let mut links = root_links.to_vec();
                links.extend(spur_links);
                let mut nodes = prev.nodes[..i].to_vec();
                nodes.extend(spur_nodes);
                let route = Route {
                    length_km: graph.route_length(&links),
                    links,
                    nodes,
                };
                if !accepted.iter().chain(&candidates).any(|r| r.links == route.links) {
                    candidates.push(route);
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let best = (0..candidates.len())
            .min_by(|&a, &b| candidates[a].rank(&candidates[b]))
            .expect("non-empty");
        accepted.push(candidates.swap_remove(best));
    }
    Ok(RouteSet {
        exhausted: accepted.len() < k,
        routes: accepted,
    })
}
