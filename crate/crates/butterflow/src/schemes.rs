//! Slot-level transmission plans for the template networks.
//!
//! A plan fixes a block of `n` channel uses (`n` clears every denominator in
//! the rates and capacities) and assigns each edge an ordered list of slots;
//! one slot carries one packet. Slot kinds:
//!
//! - plain message packets, forwarded as is;
//! - mixed packets, the field sum of the two sessions' packets with the same
//!   index (the butterfly trick at the first relay);
//! - key packets, i.i.d. uniform randomness owned by a source;
//! - ciphertexts, a message packet one-time-padded with a key packet.
//!
//! Non-secure plans route `min(rate, direct capacity)` packets over the
//! direct edges and the rest through the relay chain, mixing at the first
//! relay only for the split butterfly. Secure plans never expose a message
//! packet in the clear: relays see only keys (or mixes of them), and direct
//! edges carry ciphertexts.
//!
//! Slot order within an edge is canonical (plain before mixed before key
//! before ciphertext, session 1 before session 2, ascending index), so a plan
//! is a deterministic function of its inputs and traces are reproducible
//! byte for byte.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::Rng;

use crate::error::Error;
use crate::gfq::{uniform_packet, FieldSpec, Packet};
use crate::netgraph::{Capacity, EdgeLabel, EndpointId, NodeRole, TemplateCaps, Variant};
use crate::rational::{denominator_lcm, to_count, Rational};
use crate::regions::{achievable_region, RatePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Session {
    One,
    Two,
}

impl Session {
    pub fn index(self) -> usize {
        match self {
            Session::One => 0,
            Session::Two => 1,
        }
    }

    pub fn other(self) -> Session {
        match self {
            Session::One => Session::Two,
            Session::Two => Session::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotKind {
    MessagePlain(Session),
    MessageMixed,
    /// Key packet from the numbered key stream.
    Key(usize),
    Ciphertext(Session),
}

/// One packet-sized unit of edge traffic. For message-bearing kinds the index
/// points into the session's message packets; for keys it points into the
/// stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub kind: SlotKind,
    pub index: usize,
}

fn plain(session: Session, range: std::ops::Range<usize>) -> Vec<Slot> {
    range
        .map(|index| Slot {
            kind: SlotKind::MessagePlain(session),
            index,
        })
        .collect()
}

fn mixed(range: std::ops::Range<usize>) -> Vec<Slot> {
    range
        .map(|index| Slot {
            kind: SlotKind::MessageMixed,
            index,
        })
        .collect()
}

fn keys(stream: usize, indices: &[usize]) -> Vec<Slot> {
    indices
        .iter()
        .map(|&index| Slot {
            kind: SlotKind::Key(stream),
            index,
        })
        .collect()
}

fn ciphertext(session: Session, range: std::ops::Range<usize>) -> Vec<Slot> {
    range
        .map(|index| Slot {
            kind: SlotKind::Ciphertext(session),
            index,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePlan {
    pub label: EdgeLabel,
    pub capacity: Capacity,
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionPlan {
    pub variant: Variant,
    pub secure: bool,
    pub field: FieldSpec,
    /// Channel uses per block; every slot count below is per block.
    pub block_n: u64,
    pub rate: RatePair,
    /// Message packet counts, `n * R1` and `n * R2`.
    pub k1: usize,
    pub k2: usize,
    /// Cross-session pairs mixed at the first relay (split butterfly only).
    pub mixed_count: usize,
    /// Key packets per stream; empty when not secure.
    pub key_counts: Vec<usize>,
    /// Per session: message index -> key index within the session's stream.
    key_maps: [Vec<usize>; 2],
    /// Ascending label order.
    pub edges: Vec<EdgePlan>,
}

impl TransmissionPlan {
    pub fn k(&self, session: Session) -> usize {
        match session {
            Session::One => self.k1,
            Session::Two => self.k2,
        }
    }

    /// Which key stream pads the session's ciphertexts. The merged source
    /// owns a single stream; split sources own one each.
    pub fn key_stream(&self, session: Session) -> usize {
        if self.variant == Variant::CoLocatedSources {
            0
        } else {
            session.index()
        }
    }

    pub fn key_map(&self, session: Session) -> &[usize] {
        &self.key_maps[session.index()]
    }

    pub fn edge(&self, label: EdgeLabel) -> Option<&EdgePlan> {
        self.edges.iter().find(|e| e.label == label)
    }

    /// In-edges of the sink that must decode the session.
    pub fn sink_in_edges(&self, session: Session) -> Vec<EdgeLabel> {
        let sink_role = |s: Session| {
            if self.variant.has_merged_sinks() {
                NodeRole::Sink(EndpointId::Both)
            } else {
                NodeRole::Sink(match s {
                    Session::One => EndpointId::One,
                    Session::Two => EndpointId::Two,
                })
            }
        };
        let want = sink_role(session);
        self.variant
            .wiring()
            .into_iter()
            .filter(|(_, _, head)| *head == want)
            .map(|(label, _, _)| label)
            .collect()
    }

    /// Swaps the key indices of one session's stream under a permutation,
    /// relabeling key slots on edges consistently. Decodability and the audit
    /// verdict are invariant under this.
    pub fn relabel_keys(&self, session: Session, perm: &[usize]) -> Result<TransmissionPlan, Error> {
        if !self.secure {
            return Err(Error::Internal(
                "key relabeling applies to secure plans only".to_string(),
            ));
        }
        let stream = self.key_stream(session);
        let count = self.key_counts[stream];
        let mut seen = vec![false; count];
        for &i in perm {
            if i >= count || seen[i] {
                return Err(Error::Internal(format!(
                    "not a permutation of 0..{count}"
                )));
            }
            seen[i] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Internal(format!("not a permutation of 0..{count}")));
        }
        let mut plan = self.clone();
        for map in &mut plan.key_maps {
            for idx in map.iter_mut() {
                *idx = perm[*idx];
            }
        }
        // The merged-source stream is shared, so both sessions were updated
        // above; relabel the slots of this stream everywhere.
        for edge in &mut plan.edges {
            for slot in &mut edge.slots {
                if slot.kind == SlotKind::Key(stream) {
                    slot.index = perm[slot.index];
                }
            }
        }
        Ok(plan)
    }
}

/// Builds the transmission plan for a feasible rate pair.
///
/// Fails if the pair lies outside the achievable region (naming the violated
/// constraint) or if secrecy is requested on the split butterfly, where no
/// secure scheme exists at any positive rate.
pub fn plan(
    caps: &TemplateCaps,
    rate: RatePair,
    secure: bool,
    field: FieldSpec,
) -> Result<TransmissionPlan, Error> {
    let variant = caps.variant();
    if secure && variant == Variant::Butterfly1 {
        return Err(Error::SecureButterfly1);
    }
    let region = achievable_region(caps, secure);
    if let Some(violated) = region.first_violated(rate) {
        return Err(Error::InfeasibleRate {
            r1: rate.r1.to_string(),
            r2: rate.r2.to_string(),
            constraint: violated.to_string(),
        });
    }

    let n_int = denominator_lcm([rate.r1, rate.r2].into_iter().chain(caps.values()));
    let n = Rational::from_integer(n_int);
    let count = |r: Rational| to_count(n * r).map(|c| c as usize);
    let k1 = count(rate.r1)?;
    let k2 = count(rate.r2)?;
    let c = |i: u8| caps.single(i);

    let mut mixed_count = 0usize;
    let mut key_counts = Vec::new();
    let mut key_maps = [Vec::new(), Vec::new()];
    let labels: Vec<(EdgeLabel, Vec<Slot>)> = match (variant, secure) {
        (Variant::Butterfly1, false) => {
            // Mix index-aligned pairs at the first relay; both direct edges
            // reveal the mixed constituents to the opposite sink.
            let m = count(rate.r1.min(rate.r2).min(c(4)).min(c(5)))?;
            mixed_count = m;
            vec![
                (EdgeLabel::Single(1), plain(Session::One, 0..k1)),
                (EdgeLabel::Single(2), plain(Session::Two, 0..k2)),
                (
                    EdgeLabel::Single(3),
                    [plain(Session::One, m..k1), plain(Session::Two, m..k2), mixed(0..m)].concat(),
                ),
                (EdgeLabel::Single(4), plain(Session::One, 0..m)),
                (EdgeLabel::Single(5), plain(Session::Two, 0..m)),
                (
                    EdgeLabel::Single(6),
                    [plain(Session::Two, m..k2), mixed(0..m)].concat(),
                ),
                (
                    EdgeLabel::Single(7),
                    [plain(Session::One, m..k1), mixed(0..m)].concat(),
                ),
            ]
        }
        (Variant::CoLocatedSources, false) => {
            // Direct edges first, remainders through the relay chain.
            let a1 = count(rate.r1.min(c(5)))?;
            let a2 = count(rate.r2.min(c(4)))?;
            let through = [plain(Session::One, a1..k1), plain(Session::Two, a2..k2)].concat();
            vec![
                (EdgeLabel::Merged(1, 2), through.clone()),
                (EdgeLabel::Single(3), through),
                (EdgeLabel::Single(4), plain(Session::Two, 0..a2)),
                (EdgeLabel::Single(5), plain(Session::One, 0..a1)),
                (EdgeLabel::Single(6), plain(Session::Two, a2..k2)),
                (EdgeLabel::Single(7), plain(Session::One, a1..k1)),
            ]
        }
        (Variant::CoLocatedSinks, false) => {
            let b1 = count(rate.r1.min(c(4)))?;
            let b2 = count(rate.r2.min(c(5)))?;
            let through = [plain(Session::One, b1..k1), plain(Session::Two, b2..k2)].concat();
            vec![
                (EdgeLabel::Single(1), plain(Session::One, b1..k1)),
                (EdgeLabel::Single(2), plain(Session::Two, b2..k2)),
                (EdgeLabel::Single(3), through.clone()),
                (EdgeLabel::Single(4), plain(Session::One, 0..b1)),
                (EdgeLabel::Single(5), plain(Session::Two, 0..b2)),
                (EdgeLabel::Merged(6, 7), through),
            ]
        }
        (Variant::Butterfly2, false) => {
            let b1 = count(rate.r1.min(c(4)))?;
            let b2 = count(rate.r2.min(c(5)))?;
            vec![
                (EdgeLabel::Single(1), plain(Session::One, b1..k1)),
                (EdgeLabel::Single(2), plain(Session::Two, b2..k2)),
                (
                    EdgeLabel::Single(3),
                    [plain(Session::One, b1..k1), plain(Session::Two, b2..k2)].concat(),
                ),
                (EdgeLabel::Single(4), plain(Session::One, 0..b1)),
                (EdgeLabel::Single(5), plain(Session::Two, 0..b2)),
                (EdgeLabel::Single(6), plain(Session::Two, b2..k2)),
                (EdgeLabel::Single(7), plain(Session::One, b1..k1)),
            ]
        }
        (Variant::CoLocatedSources, true) => {
            // One key pool; each session pads with a prefix of it. Prefixes
            // overlap, which is safe because no edge carries both ciphertext
            // streams.
            let pool = k1.max(k2);
            key_counts = vec![pool];
            key_maps = [(0..k1).collect(), (0..k2).collect()];
            let pool_indices: Vec<usize> = (0..pool).collect();
            vec![
                (EdgeLabel::Merged(1, 2), keys(0, &pool_indices)),
                (EdgeLabel::Single(3), keys(0, &pool_indices)),
                (EdgeLabel::Single(4), ciphertext(Session::Two, 0..k2)),
                (EdgeLabel::Single(5), ciphertext(Session::One, 0..k1)),
                (EdgeLabel::Single(6), keys(0, &pool_indices[..k2])),
                (EdgeLabel::Single(7), keys(0, &pool_indices[..k1])),
            ]
        }
        (Variant::CoLocatedSinks, true) => {
            key_counts = vec![k1, k2];
            key_maps = [(0..k1).collect(), (0..k2).collect()];
            let k1_indices: Vec<usize> = (0..k1).collect();
            let k2_indices: Vec<usize> = (0..k2).collect();
            let both = [keys(0, &k1_indices), keys(1, &k2_indices)].concat();
            vec![
                (EdgeLabel::Single(1), keys(0, &k1_indices)),
                (EdgeLabel::Single(2), keys(1, &k2_indices)),
                (EdgeLabel::Single(3), both.clone()),
                (EdgeLabel::Single(4), ciphertext(Session::One, 0..k1)),
                (EdgeLabel::Single(5), ciphertext(Session::Two, 0..k2)),
                (EdgeLabel::Merged(6, 7), both),
            ]
        }
        (Variant::Butterfly2, true) => {
            key_counts = vec![k1, k2];
            key_maps = [(0..k1).collect(), (0..k2).collect()];
            let k1_indices: Vec<usize> = (0..k1).collect();
            let k2_indices: Vec<usize> = (0..k2).collect();
            vec![
                (EdgeLabel::Single(1), keys(0, &k1_indices)),
                (EdgeLabel::Single(2), keys(1, &k2_indices)),
                (
                    EdgeLabel::Single(3),
                    [keys(0, &k1_indices), keys(1, &k2_indices)].concat(),
                ),
                (EdgeLabel::Single(4), ciphertext(Session::One, 0..k1)),
                (EdgeLabel::Single(5), ciphertext(Session::Two, 0..k2)),
                (EdgeLabel::Single(6), keys(1, &k2_indices)),
                (EdgeLabel::Single(7), keys(0, &k1_indices)),
            ]
        }
        (Variant::Butterfly1, true) => unreachable!("rejected above"),
    };

    let edges: Vec<EdgePlan> = labels
        .into_iter()
        .map(|(label, slots)| EdgePlan {
            label,
            capacity: Capacity::new(caps.get(label)).expect("validated capacities"),
            slots,
        })
        .collect();

    for edge in &edges {
        let used = Rational::from_integer(edge.slots.len() as i128);
        let available = n * edge.capacity.value();
        if used > available {
            return Err(Error::Internal(format!(
                "edge {} carries {used} slots but n*C = {available}",
                edge.label
            )));
        }
    }

    Ok(TransmissionPlan {
        variant,
        secure,
        field,
        block_n: n_int as u64,
        rate,
        k1,
        k2,
        mixed_count,
        key_counts,
        key_maps,
        edges,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceInputs {
    pub w1: Vec<Packet>,
    pub w2: Vec<Packet>,
    /// Key packets per stream, as drawn or supplied.
    pub keys: Vec<Vec<Packet>>,
}

/// Every packet carried on every edge during one block, plus what the sinks
/// decoded from their in-edges alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub edges: Vec<(EdgeLabel, Vec<Packet>)>,
    pub decoded: (Vec<Packet>, Vec<Packet>),
    pub inputs: TraceInputs,
}

fn packet_len(plan: &TransmissionPlan, w1: &[Packet], w2: &[Packet]) -> Result<usize, Error> {
    let mut len = None;
    for p in w1.iter().chain(w2) {
        if p.field() != plan.field {
            return Err(Error::FieldMismatch(format!(
                "message packet over GF({}), plan over GF({})",
                p.field().q(),
                plan.field.q()
            )));
        }
        match len {
            None => len = Some(p.len()),
            Some(l) if l != p.len() => {
                return Err(Error::FieldMismatch(
                    "message packets must share one length".to_string(),
                ))
            }
            _ => {}
        }
    }
    Ok(len.unwrap_or(1))
}

/// Runs the plan, drawing key packets from the generator.
pub fn execute<R: Rng + ?Sized>(
    plan: &TransmissionPlan,
    w1: &[Packet],
    w2: &[Packet],
    rng: &mut R,
) -> Result<Trace, Error> {
    let len = packet_len(plan, w1, w2)?;
    let keys: Vec<Vec<Packet>> = plan
        .key_counts
        .iter()
        .map(|&count| {
            (0..count)
                .map(|_| uniform_packet(plan.field, len, rng))
                .collect()
        })
        .collect();
    execute_with_keys(plan, w1, w2, &keys)
}

/// Runs the plan with caller-supplied key material (used by exhaustive
/// audits, which enumerate keys instead of sampling them).
pub fn execute_with_keys(
    plan: &TransmissionPlan,
    w1: &[Packet],
    w2: &[Packet],
    keys: &[Vec<Packet>],
) -> Result<Trace, Error> {
    if w1.len() != plan.k1 || w2.len() != plan.k2 {
        return Err(Error::InvalidConfig(format!(
            "plan needs {} + {} message packets, got {} + {}",
            plan.k1,
            plan.k2,
            w1.len(),
            w2.len()
        )));
    }
    packet_len(plan, w1, w2)?;
    if keys.len() != plan.key_counts.len()
        || keys
            .iter()
            .zip(&plan.key_counts)
            .any(|(stream, &count)| stream.len() != count)
    {
        return Err(Error::InvalidConfig(
            "key material does not match the plan's stream sizes".to_string(),
        ));
    }

    let message = |s: Session| match s {
        Session::One => w1,
        Session::Two => w2,
    };
    let mut edges = Vec::with_capacity(plan.edges.len());
    for edge in &plan.edges {
        let mut contents = Vec::with_capacity(edge.slots.len());
        for slot in &edge.slots {
            let packet = match slot.kind {
                SlotKind::MessagePlain(s) => message(s)[slot.index].clone(),
                SlotKind::MessageMixed => w1[slot.index].add(&w2[slot.index])?,
                SlotKind::Key(stream) => keys[stream][slot.index].clone(),
                SlotKind::Ciphertext(s) => {
                    let key =
                        &keys[plan.key_stream(s)][plan.key_map(s)[slot.index]];
                    message(s)[slot.index].add(key)?
                }
            };
            contents.push(packet);
        }
        edges.push((edge.label, contents));
    }

    let decoded = decode(plan, &edges)?;
    Ok(Trace {
        edges,
        decoded,
        inputs: TraceInputs {
            w1: w1.to_vec(),
            w2: w2.to_vec(),
            keys: keys.to_vec(),
        },
    })
}

/// Reconstructs both messages reading only each sink's in-edges.
///
/// Recovery per packet, in order of preference: received in plain; received
/// mixed with the other session's constituent alongside; received as a
/// ciphertext with its key packet alongside.
pub fn decode(
    plan: &TransmissionPlan,
    edges: &[(EdgeLabel, Vec<Packet>)],
) -> Result<(Vec<Packet>, Vec<Packet>), Error> {
    let mut out = Vec::new();
    for session in [Session::One, Session::Two] {
        let in_labels = plan.sink_in_edges(session);
        let mut seen: HashMap<Slot, &Packet> = HashMap::new();
        for label in &in_labels {
            let edge_plan = plan
                .edge(*label)
                .ok_or_else(|| Error::Internal(format!("plan lacks edge {label}")))?;
            let contents = &edges
                .iter()
                .find(|(l, _)| l == label)
                .ok_or_else(|| Error::Internal(format!("trace lacks edge {label}")))?
                .1;
            if contents.len() != edge_plan.slots.len() {
                return Err(Error::Internal(format!(
                    "edge {label} carries {} packets, plan says {}",
                    contents.len(),
                    edge_plan.slots.len()
                )));
            }
            for (slot, packet) in edge_plan.slots.iter().zip(contents) {
                seen.insert(*slot, packet);
            }
        }

        let mut message = Vec::with_capacity(plan.k(session));
        for i in 0..plan.k(session) {
            let direct = seen.get(&Slot {
                kind: SlotKind::MessagePlain(session),
                index: i,
            });
            let packet = if let Some(p) = direct {
                (*p).clone()
            } else if let (Some(mix), Some(other)) = (
                seen.get(&Slot {
                    kind: SlotKind::MessageMixed,
                    index: i,
                }),
                seen.get(&Slot {
                    kind: SlotKind::MessagePlain(session.other()),
                    index: i,
                }),
            ) {
                mix.sub(other)?
            } else if let (Some(ct), Some(key)) = (
                seen.get(&Slot {
                    kind: SlotKind::Ciphertext(session),
                    index: i,
                }),
                seen.get(&Slot {
                    kind: SlotKind::Key(plan.key_stream(session)),
                    index: plan.key_map(session)[i],
                }),
            ) {
                ct.sub(key)?
            } else {
                return Err(Error::Internal(format!(
                    "sink for session {session:?} cannot recover packet {i}"
                )));
            };
            message.push(packet);
        }
        out.push(message);
    }
    let w2 = out.pop().expect("two sessions");
    let w1 = out.pop().expect("two sessions");
    Ok((w1, w2))
}

/// Exact reliability: the decoded messages equal the originals.
pub fn verify_reliability(trace: &Trace) -> bool {
    trace.decoded.0 == trace.inputs.w1 && trace.decoded.1 == trace.inputs.w2
}

/// CSV rows `edge,slot,symbol`, edges in plan order, one row per symbol.
pub fn trace_csv(trace: &Trace) -> String {
    let mut csv = String::from("edge,slot,symbol\n");
    for (label, contents) in &trace.edges {
        for (slot, packet) in contents.iter().enumerate() {
            for &symbol in packet.symbols() {
                let _ = writeln!(csv, "{label},{slot},{symbol}");
            }
        }
    }
    csv
}

/// Checks that every edge's slots are computable at the edge's tail from the
/// node's own sources plus what earlier edges delivered to it. Plans built by
/// [`plan`] always pass; this guards refactorings of the builders.
pub fn validate_information_flow(plan: &TransmissionPlan) -> Result<(), Error> {
    let owner_of_stream = |stream: usize| -> NodeRole {
        if plan.variant.has_merged_sources() {
            NodeRole::Source(EndpointId::Both)
        } else {
            NodeRole::Source(if stream == 0 {
                EndpointId::One
            } else {
                EndpointId::Two
            })
        }
    };
    let mut available: HashMap<NodeRole, HashSet<Slot>> = HashMap::new();
    let source_of = |session: Session| -> NodeRole {
        if plan.variant.has_merged_sources() {
            NodeRole::Source(EndpointId::Both)
        } else {
            NodeRole::Source(match session {
                Session::One => EndpointId::One,
                Session::Two => EndpointId::Two,
            })
        }
    };
    for session in [Session::One, Session::Two] {
        let owned = available.entry(source_of(session)).or_default();
        for i in 0..plan.k(session) {
            owned.insert(Slot {
                kind: SlotKind::MessagePlain(session),
                index: i,
            });
        }
    }
    for (stream, &count) in plan.key_counts.iter().enumerate() {
        let owned = available.entry(owner_of_stream(stream)).or_default();
        for i in 0..count {
            owned.insert(Slot {
                kind: SlotKind::Key(stream),
                index: i,
            });
        }
    }

    // Wiring order is topological, so tails are settled before their edges.
    for (label, tail, head) in plan.variant.wiring() {
        let edge = plan
            .edge(label)
            .ok_or_else(|| Error::Internal(format!("plan lacks edge {label}")))?;
        let empty = HashSet::new();
        let have = available.get(&tail).unwrap_or(&empty);
        for slot in &edge.slots {
            let ok = have.contains(slot)
                || match slot.kind {
                    SlotKind::MessageMixed => {
                        let has = |s: Session| {
                            have.contains(&Slot {
                                kind: SlotKind::MessagePlain(s),
                                index: slot.index,
                            })
                        };
                        has(Session::One) && has(Session::Two)
                    }
                    SlotKind::Ciphertext(s) => {
                        have.contains(&Slot {
                            kind: SlotKind::MessagePlain(s),
                            index: slot.index,
                        }) && have.contains(&Slot {
                            kind: SlotKind::Key(plan.key_stream(s)),
                            index: plan.key_map(s)[slot.index],
                        })
                    }
                    _ => false,
                };
            if !ok {
                return Err(Error::Internal(format!(
                    "node {tail} cannot produce {slot:?} for edge {label}"
                )));
            }
        }
        let delivered = edge.slots.clone();
        available.entry(head).or_default().extend(delivered);
    }
    Ok(())
}
