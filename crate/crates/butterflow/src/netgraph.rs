//! Template networks and exact cut-set bounds.
//!
//! The four butterfly-style templates share one edge numbering: 1 and 2 feed
//! the first relay, 3 is the relay bottleneck, 4 and 5 are the direct source
//! edges, 6 and 7 leave the second relay. Co-located variants merge a pair of
//! those edges into one ("1+2" or "6+7") whose capacity is supplied as a
//! single value.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::Error;
use crate::rational::Rational;

/// A non-negative exact rational edge capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Capacity(Rational);

impl Capacity {
    pub fn new(value: Rational) -> Result<Self, Error> {
        if value < Rational::zero() {
            return Err(Error::InvalidConfig(format!("negative capacity {value}")));
        }
        Ok(Capacity(value))
    }

    pub fn zero() -> Self {
        Capacity(Rational::zero())
    }

    pub fn value(self) -> Rational {
        self.0
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Edge name within a template: a single index or a merged pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    Single(u8),
    Merged(u8, u8),
}

impl EdgeLabel {
    fn sort_key(self) -> (u8, u8) {
        match self {
            EdgeLabel::Single(i) => (i, 0),
            EdgeLabel::Merged(i, j) => (i, j),
        }
    }
}

impl Ord for EdgeLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for EdgeLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Single(i) => write!(f, "{i}"),
            EdgeLabel::Merged(i, j) => write!(f, "{i}+{j}"),
        }
    }
}

impl FromStr for EdgeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidConfig(format!("not an edge label: {s:?}"));
        match s.split_once('+') {
            None => Ok(EdgeLabel::Single(s.parse().map_err(|_| bad())?)),
            Some((i, j)) => Ok(EdgeLabel::Merged(
                i.parse().map_err(|_| bad())?,
                j.parse().map_err(|_| bad())?,
            )),
        }
    }
}

/// Which of the two unicast sessions an endpoint serves, or both at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndpointId {
    One,
    Two,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRole {
    Source(EndpointId),
    Sink(EndpointId),
    RelayIn,
    RelayOut,
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRole::Source(EndpointId::One) => write!(f, "S1"),
            NodeRole::Source(EndpointId::Two) => write!(f, "S2"),
            NodeRole::Source(EndpointId::Both) => write!(f, "S"),
            NodeRole::Sink(EndpointId::One) => write!(f, "D1"),
            NodeRole::Sink(EndpointId::Two) => write!(f, "D2"),
            NodeRole::Sink(EndpointId::Both) => write!(f, "D"),
            NodeRole::RelayIn => write!(f, "M1"),
            NodeRole::RelayOut => write!(f, "M2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub tail: NodeId,
    pub head: NodeId,
    pub label: EdgeLabel,
    pub capacity: Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Butterfly1,
    CoLocatedSources,
    CoLocatedSinks,
    Butterfly2,
}

pub const ALL_VARIANTS: [Variant; 4] = [
    Variant::Butterfly1,
    Variant::CoLocatedSources,
    Variant::CoLocatedSinks,
    Variant::Butterfly2,
];

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Butterfly1 => "butterfly1",
            Variant::CoLocatedSources => "colocated-sources",
            Variant::CoLocatedSinks => "colocated-sinks",
            Variant::Butterfly2 => "butterfly2",
        }
    }

    /// The exact edge label set this template requires.
    pub fn edge_labels(self) -> Vec<EdgeLabel> {
        use EdgeLabel::*;
        match self {
            Variant::Butterfly1 | Variant::Butterfly2 => {
                vec![Single(1), Single(2), Single(3), Single(4), Single(5), Single(6), Single(7)]
            }
            Variant::CoLocatedSources => {
                vec![Merged(1, 2), Single(3), Single(4), Single(5), Single(6), Single(7)]
            }
            Variant::CoLocatedSinks => {
                vec![Single(1), Single(2), Single(3), Single(4), Single(5), Merged(6, 7)]
            }
        }
    }

    pub fn has_merged_sources(self) -> bool {
        self == Variant::CoLocatedSources
    }

    pub fn has_merged_sinks(self) -> bool {
        self == Variant::CoLocatedSinks
    }

    /// Wiring table: (label, tail role, head role), in ascending label order,
    /// which is also a topological order for every template.
    pub(crate) fn wiring(self) -> Vec<(EdgeLabel, NodeRole, NodeRole)> {
        use EdgeLabel::{Merged, Single};
        use EndpointId::*;
        use NodeRole::*;
        match self {
            Variant::Butterfly1 => vec![
                (Single(1), Source(One), RelayIn),
                (Single(2), Source(Two), RelayIn),
                (Single(3), RelayIn, RelayOut),
                (Single(4), Source(One), Sink(Two)),
                (Single(5), Source(Two), Sink(One)),
                (Single(6), RelayOut, Sink(Two)),
                (Single(7), RelayOut, Sink(One)),
            ],
            Variant::CoLocatedSources => vec![
                (Merged(1, 2), Source(Both), RelayIn),
                (Single(3), RelayIn, RelayOut),
                (Single(4), Source(Both), Sink(Two)),
                (Single(5), Source(Both), Sink(One)),
                (Single(6), RelayOut, Sink(Two)),
                (Single(7), RelayOut, Sink(One)),
            ],
            Variant::CoLocatedSinks => vec![
                (Single(1), Source(One), RelayIn),
                (Single(2), Source(Two), RelayIn),
                (Single(3), RelayIn, RelayOut),
                (Single(4), Source(One), Sink(Both)),
                (Single(5), Source(Two), Sink(Both)),
                (Merged(6, 7), RelayOut, Sink(Both)),
            ],
            Variant::Butterfly2 => vec![
                (Single(1), Source(One), RelayIn),
                (Single(2), Source(Two), RelayIn),
                (Single(3), RelayIn, RelayOut),
                (Single(4), Source(One), Sink(One)),
                (Single(5), Source(Two), Sink(Two)),
                (Single(6), RelayOut, Sink(Two)),
                (Single(7), RelayOut, Sink(One)),
            ],
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ALL_VARIANTS
            .iter()
            .copied()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant: {s:?}")))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Validated capacity assignment for one template: exactly the variant's
/// label set, every capacity non-negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateCaps {
    variant: Variant,
    caps: BTreeMap<EdgeLabel, Capacity>,
}

impl TemplateCaps {
    pub fn new(variant: Variant, caps: BTreeMap<EdgeLabel, Capacity>) -> Result<Self, Error> {
        let expected = variant.edge_labels();
        for label in &expected {
            if !caps.contains_key(label) {
                return Err(Error::InvalidConfig(format!(
                    "variant {variant} is missing capacity for edge {label}"
                )));
            }
        }
        if caps.len() != expected.len() {
            let extra: Vec<String> = caps
                .keys()
                .filter(|l| !expected.contains(l))
                .map(|l| l.to_string())
                .collect();
            return Err(Error::InvalidConfig(format!(
                "variant {variant} does not have edges {}",
                extra.join(", ")
            )));
        }
        Ok(TemplateCaps { variant, caps })
    }

    /// All edges set to capacity 1 (merged edges to 2, the sum of their pair).
    pub fn unit(variant: Variant) -> Self {
        let caps = variant
            .edge_labels()
            .into_iter()
            .map(|label| {
                let v = match label {
                    EdgeLabel::Single(_) => Rational::from_integer(1),
                    EdgeLabel::Merged(..) => Rational::from_integer(2),
                };
                (label, Capacity(v))
            })
            .collect();
        TemplateCaps {
            variant,
            caps,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn get(&self, label: EdgeLabel) -> Rational {
        self.caps[&label].value()
    }

    pub fn single(&self, i: u8) -> Rational {
        self.get(EdgeLabel::Single(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeLabel, Capacity)> + '_ {
        self.caps.iter().map(|(&l, &c)| (l, c))
    }

    pub fn values(&self) -> impl Iterator<Item = Rational> + '_ {
        self.caps.values().map(|c| c.value())
    }
}

/// A directed network with role-tagged nodes. Template-built networks
/// remember their variant; hand-built ones do not, and only the generic
/// cut-set machinery applies to them.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<NodeRole>,
    edges: Vec<Edge>,
    template: Option<Variant>,
}

impl Network {
    pub fn from_template(caps: &TemplateCaps) -> Network {
        let wiring = caps.variant.wiring();
        let mut roles: Vec<NodeRole> = Vec::new();
        let node_id = |role: NodeRole, roles: &mut Vec<NodeRole>| -> NodeId {
            if let Some(pos) = roles.iter().position(|&r| r == role) {
                NodeId(pos)
            } else {
                roles.push(role);
                NodeId(roles.len() - 1)
            }
        };
        let mut edges = Vec::new();
        for (label, tail_role, head_role) in wiring {
            let tail = node_id(tail_role, &mut roles);
            let head = node_id(head_role, &mut roles);
            edges.push(Edge {
                tail,
                head,
                label,
                capacity: caps.caps[&label],
            });
        }
        Network {
            nodes: roles,
            edges,
            template: Some(caps.variant),
        }
    }

    /// Escape hatch for arbitrary DAGs; rejects networks with violations.
    pub fn custom(nodes: Vec<NodeRole>, edges: Vec<Edge>) -> Result<Network, Error> {
        let net = Network {
            nodes,
            edges,
            template: None,
        };
        let violations = net.validate();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::MalformedNetwork(violations.join("; ")))
        }
    }

    pub fn nodes(&self) -> &[NodeRole] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn template(&self) -> Option<Variant> {
        self.template
    }

    pub fn node_by_role(&self, role: NodeRole) -> Option<NodeId> {
        self.nodes.iter().position(|&r| r == role).map(NodeId)
    }

    /// Source nodes serving the session: the dedicated source or the merged one.
    pub fn sources_for(&self, endpoint: EndpointId) -> Vec<NodeId> {
        self.endpoint_nodes(endpoint, true)
    }

    pub fn sinks_for(&self, endpoint: EndpointId) -> Vec<NodeId> {
        self.endpoint_nodes(endpoint, false)
    }

    fn endpoint_nodes(&self, endpoint: EndpointId, source: bool) -> Vec<NodeId> {
        let want = |id: EndpointId| {
            endpoint == EndpointId::Both || id == EndpointId::Both || id == endpoint
        };
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, role)| match (source, role) {
                (true, NodeRole::Source(id)) => want(*id),
                (false, NodeRole::Sink(id)) => want(*id),
                _ => false,
            })
            .map(|(i, _)| NodeId(i))
            .collect()
    }

    /// Structural checks. Returns human-readable violations; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for edge in &self.edges {
            if edge.tail.0 >= self.nodes.len() || edge.head.0 >= self.nodes.len() {
                violations.push(format!("edge {} references a missing node", edge.label));
            }
            if edge.tail == edge.head {
                violations.push(format!("edge {} is a self-loop", edge.label));
            }
        }
        if !violations.is_empty() {
            return violations;
        }

        if self.topological_order().is_none() {
            violations.push("network contains a directed cycle".to_string());
        }

        for (i, role) in self.nodes.iter().enumerate() {
            if self.nodes.iter().skip(i + 1).any(|r| r == role) {
                violations.push(format!("duplicate node role {role}"));
            }
        }

        let merged_src = self.node_by_role(NodeRole::Source(EndpointId::Both)).is_some();
        let split_src = self.node_by_role(NodeRole::Source(EndpointId::One)).is_some()
            || self.node_by_role(NodeRole::Source(EndpointId::Two)).is_some();
        if merged_src && split_src {
            violations.push("both merged and per-session sources present".to_string());
        }
        if !merged_src && !split_src {
            violations.push("no source nodes".to_string());
        }
        let merged_sink = self.node_by_role(NodeRole::Sink(EndpointId::Both)).is_some();
        let split_sink = self.node_by_role(NodeRole::Sink(EndpointId::One)).is_some()
            || self.node_by_role(NodeRole::Sink(EndpointId::Two)).is_some();
        if merged_sink && split_sink {
            violations.push("both merged and per-session sinks present".to_string());
        }
        if !merged_sink && !split_sink {
            violations.push("no sink nodes".to_string());
        }

        for (i, role) in self.nodes.iter().enumerate() {
            let has_in = self.edges.iter().any(|e| e.head == NodeId(i));
            let is_source = matches!(role, NodeRole::Source(_));
            if !is_source && !has_in {
                violations.push(format!("non-source node {role} has no incoming edge"));
            }
        }

        violations
    }

    fn topological_order(&self) -> Option<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for e in &self.edges {
            indegree[e.head.0] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop() {
            order.push(NodeId(u));
            for e in &self.edges {
                if e.tail.0 == u {
                    indegree[e.head.0] -= 1;
                    if indegree[e.head.0] == 0 {
                        queue.push(e.head.0);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Builds one of the four templates from its capacity map.
pub fn build_template(
    variant: Variant,
    caps: &BTreeMap<EdgeLabel, Capacity>,
) -> Result<Network, Error> {
    let caps = TemplateCaps::new(variant, caps.clone())?;
    Ok(Network::from_template(&caps))
}

/// Exact minimum cut between disjoint node sets, via max-flow.
pub fn min_cut(net: &Network, from: &[NodeId], to: &[NodeId]) -> Result<Capacity, Error> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::MalformedNetwork(
            "min_cut endpoints must be nonempty".to_string(),
        ));
    }
    if from.iter().any(|f| to.contains(f)) {
        return Err(Error::MalformedNetwork(
            "min_cut endpoints must be disjoint".to_string(),
        ));
    }
    let n = net.nodes.len();
    // Virtual terminals make the multi-source/multi-sink case uniform.
    let source = n;
    let sink = n + 1;
    let mut flow = FlowGraph::new(n + 2);
    for e in &net.edges {
        flow.add_edge(e.tail.0, e.head.0, e.capacity.value());
    }
    let infinite: Rational = net
        .edges
        .iter()
        .map(|e| e.capacity.value())
        .sum::<Rational>()
        + Rational::from_integer(1);
    for &f in from {
        flow.add_edge(source, f.0, infinite);
    }
    for &t in to {
        flow.add_edge(t.0, sink, infinite);
    }
    Ok(Capacity(flow.max_flow(source, sink)))
}

struct FlowEdge {
    to: usize,
    rev: usize,
    cap: Rational,
}

struct FlowGraph {
    adj: Vec<Vec<FlowEdge>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph {
            adj: (0..n).map(|_| Vec::new()).collect(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: Rational) {
        let rev_from = self.adj[to].len();
        let rev_to = self.adj[from].len();
        self.adj[from].push(FlowEdge { to, rev: rev_from, cap });
        self.adj[to].push(FlowEdge {
            to: from,
            rev: rev_to,
            cap: Rational::zero(),
        });
    }

    /// Edmonds-Karp: shortest augmenting paths, so termination does not
    /// depend on the capacities being integral.
    fn max_flow(&mut self, s: usize, t: usize) -> Rational {
        let mut total = Rational::zero();
        loop {
            let n = self.adj.len();
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut queue = std::collections::VecDeque::from([s]);
            let mut seen = vec![false; n];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (i, e) in self.adj[u].iter().enumerate() {
                    if !seen[e.to] && e.cap > Rational::zero() {
                        seen[e.to] = true;
                        prev[e.to] = Some((u, i));
                        queue.push_back(e.to);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck: Option<Rational> = None;
            let mut v = t;
            while v != s {
                let (u, i) = prev[v].expect("path reconstructed from BFS");
                let cap = self.adj[u][i].cap;
                bottleneck = Some(bottleneck.map_or(cap, |b| b.min(cap)));
                v = u;
            }
            let aug = bottleneck.expect("t differs from s");
            let mut v = t;
            while v != s {
                let (u, i) = prev[v].expect("path reconstructed from BFS");
                self.adj[u][i].cap -= aug;
                let rev = self.adj[u][i].rev;
                self.adj[v][rev].cap += aug;
                v = u;
            }
            total += aug;
        }
    }
}

/// Which rate expression a cut-set bound constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateExpr {
    R1,
    R2,
    Sum,
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateExpr::R1 => write!(f, "R1"),
            RateExpr::R2 => write!(f, "R2"),
            RateExpr::Sum => write!(f, "R1 + R2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutBound {
    pub rate: RateExpr,
    pub bound: Capacity,
}

/// The three standard cut-set outer bounds: each session's rate against its
/// own min-cut and the sum rate against the joint min-cut.
pub fn cutset_bounds(net: &Network) -> Result<Vec<CutBound>, Error> {
    let pick = |ep: EndpointId, source: bool| -> Result<Vec<NodeId>, Error> {
        let nodes = if source {
            net.sources_for(ep)
        } else {
            net.sinks_for(ep)
        };
        if nodes.is_empty() {
            Err(Error::MalformedNetwork(format!(
                "no {} node serves session {:?}",
                if source { "source" } else { "sink" },
                ep
            )))
        } else {
            Ok(nodes)
        }
    };
    let bounds = vec![
        CutBound {
            rate: RateExpr::R1,
            bound: min_cut(net, &pick(EndpointId::One, true)?, &pick(EndpointId::One, false)?)?,
        },
        CutBound {
            rate: RateExpr::R2,
            bound: min_cut(net, &pick(EndpointId::Two, true)?, &pick(EndpointId::Two, false)?)?,
        },
        CutBound {
            rate: RateExpr::Sum,
            bound: min_cut(net, &pick(EndpointId::Both, true)?, &pick(EndpointId::Both, false)?)?,
        },
    ];
    Ok(bounds)
}

/// Butterfly1's sum-rate bound beyond the cut-set bounds: the bottleneck edge
/// plus the smaller direct edge, min(C3 + C4, C3 + C5).
pub fn gns_sum_bound(net: &Network) -> Result<Rational, Error> {
    if net.template != Some(Variant::Butterfly1) {
        return Err(Error::UnsupportedVariant {
            operation: "gns_sum_bound".to_string(),
            variant: net
                .template
                .map_or_else(|| "custom".to_string(), |v| v.to_string()),
        });
    }
    let cap = |i: u8| {
        net.edges
            .iter()
            .find(|e| e.label == EdgeLabel::Single(i))
            .expect("butterfly1 template has edges 1..=7")
            .capacity
            .value()
    };
    let c3 = cap(3);
    Ok((c3 + cap(4)).min(c3 + cap(5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) fn caps_from(variant: Variant, values: &[(&str, Rational)]) -> TemplateCaps {
        let map = values
            .iter()
            .map(|(label, v)| {
                (
                    label.parse::<EdgeLabel>().unwrap(),
                    Capacity::new(*v).unwrap(),
                )
            })
            .collect();
        TemplateCaps::new(variant, map).unwrap()
    }

    fn butterfly1_caps(values: [i128; 7]) -> TemplateCaps {
        let labels = ["1", "2", "3", "4", "5", "6", "7"];
        let pairs: Vec<(&str, Rational)> = labels
            .iter()
            .zip(values)
            .map(|(&l, v)| (l, Rational::from_integer(v)))
            .collect();
        caps_from(Variant::Butterfly1, &pairs)
    }

    #[test]
    fn templates_validate_cleanly() {
        for variant in ALL_VARIANTS {
            let net = Network::from_template(&TemplateCaps::unit(variant));
            assert!(net.validate().is_empty(), "{variant}: {:?}", net.validate());
            let expected_edges = variant.edge_labels().len();
            assert_eq!(net.edges().len(), expected_edges);
        }
    }

    #[test]
    fn colocated_sources_template_has_six_edges_and_merged_source() {
        let caps = caps_from(
            Variant::CoLocatedSources,
            &[
                ("1+2", rat(2, 1)),
                ("3", rat(1, 1)),
                ("4", rat(1, 1)),
                ("5", rat(1, 1)),
                ("6", rat(1, 1)),
                ("7", rat(1, 1)),
            ],
        );
        let net = Network::from_template(&caps);
        assert_eq!(net.edges().len(), 6);
        assert!(net.node_by_role(NodeRole::Source(EndpointId::Both)).is_some());
        assert!(net.node_by_role(NodeRole::Source(EndpointId::One)).is_none());
    }

    #[test]
    fn wrong_label_sets_are_rejected() {
        let mut map = BTreeMap::new();
        for label in Variant::Butterfly1.edge_labels() {
            map.insert(label, Capacity::new(rat(1, 1)).unwrap());
        }
        assert!(build_template(Variant::CoLocatedSources, &map).is_err());
        map.remove(&EdgeLabel::Single(7));
        assert!(build_template(Variant::Butterfly1, &map).is_err());
    }

    #[test]
    fn negative_capacity_is_rejected() {
        assert!(Capacity::new(rat(-1, 2)).is_err());
        assert_eq!(Capacity::new(rat(0, 1)).unwrap(), Capacity::zero());
    }

    #[test]
    fn cycle_and_role_violations_are_reported() {
        let nodes = vec![
            NodeRole::Source(EndpointId::One),
            NodeRole::RelayIn,
            NodeRole::RelayOut,
            NodeRole::Sink(EndpointId::One),
            NodeRole::Sink(EndpointId::Two),
            NodeRole::Source(EndpointId::Two),
        ];
        let edge = |tail: usize, head: usize, i: u8| Edge {
            tail: NodeId(tail),
            head: NodeId(head),
            label: EdgeLabel::Single(i),
            capacity: Capacity::new(rat(1, 1)).unwrap(),
        };
        // RelayIn -> RelayOut -> RelayIn is a cycle.
        let cyclic = Network {
            nodes: nodes.clone(),
            edges: vec![edge(0, 1, 1), edge(1, 2, 3), edge(2, 1, 9), edge(2, 3, 7), edge(5, 4, 5), edge(0, 4, 4), edge(5, 1, 2)],
            template: None,
        };
        assert!(cyclic
            .validate()
            .iter()
            .any(|v| v.contains("cycle")), "{:?}", cyclic.validate());

        // RelayOut never receives anything.
        let no_in = Network {
            nodes,
            edges: vec![edge(0, 3, 4), edge(5, 4, 5), edge(0, 1, 1), edge(5, 1, 2), edge(2, 3, 7)],
            template: None,
        };
        assert!(no_in
            .validate()
            .iter()
            .any(|v| v.contains("no incoming edge")));
    }

    #[test]
    fn min_cut_on_single_path_is_single_bottleneck() {
        let caps = butterfly1_caps([2, 1, 3, 1, 1, 2, 2]);
        let net = Network::from_template(&caps);
        let s1 = net.sources_for(EndpointId::One);
        let d1 = net.sinks_for(EndpointId::One);
        assert_eq!(min_cut(&net, &s1, &d1).unwrap().value(), rat(2, 1));
    }

    #[test]
    fn min_cut_adds_parallel_routes() {
        // Unit butterfly2: direct edge plus relay path.
        let net = Network::from_template(&TemplateCaps::unit(Variant::Butterfly2));
        let s1 = net.sources_for(EndpointId::One);
        let d1 = net.sinks_for(EndpointId::One);
        assert_eq!(min_cut(&net, &s1, &d1).unwrap().value(), rat(2, 1));
    }

    #[test]
    fn min_cut_rejects_bad_endpoint_sets() {
        let net = Network::from_template(&TemplateCaps::unit(Variant::Butterfly1));
        let s1 = net.sources_for(EndpointId::One);
        assert!(min_cut(&net, &s1, &s1).is_err());
        assert!(min_cut(&net, &[], &s1).is_err());
    }

    #[test]
    fn cutset_bounds_on_weighted_butterfly1() {
        let caps = butterfly1_caps([2, 1, 3, 1, 1, 2, 2]);
        let net = Network::from_template(&caps);
        let bounds = cutset_bounds(&net).unwrap();
        assert_eq!(bounds[0].rate, RateExpr::R1);
        assert_eq!(bounds[0].bound.value(), rat(2, 1));
        assert_eq!(bounds[1].bound.value(), rat(1, 1));
        // Joint cut: both direct edges plus the relay bottleneck.
        assert_eq!(bounds[2].bound.value(), rat(5, 1));
    }

    #[test]
    fn gns_bound_applies_to_butterfly1_only() {
        let caps = butterfly1_caps([2, 1, 3, 1, 1, 2, 2]);
        let net = Network::from_template(&caps);
        assert_eq!(gns_sum_bound(&net).unwrap(), rat(4, 1));

        let other = Network::from_template(&TemplateCaps::unit(Variant::Butterfly2));
        assert!(matches!(
            gns_sum_bound(&other),
            Err(Error::UnsupportedVariant { .. })
        ));
    }

    #[test]
    fn fractional_capacities_stay_exact() {
        let caps = caps_from(
            Variant::Butterfly1,
            &[
                ("1", rat(1, 3)),
                ("2", rat(1, 1)),
                ("3", rat(5, 7)),
                ("4", rat(1, 2)),
                ("5", rat(1, 2)),
                ("6", rat(1, 1)),
                ("7", rat(1, 1)),
            ],
        );
        let net = Network::from_template(&caps);
        let s1 = net.sources_for(EndpointId::One);
        let d1 = net.sinks_for(EndpointId::One);
        assert_eq!(min_cut(&net, &s1, &d1).unwrap().value(), rat(1, 3));
    }
}
