//! Secrecy audits for transmission plans and an exhaustive search over
//! single-letter binary encodings of the split butterfly.
//!
//! The audit enumerates every message and key assignment (one symbol per
//! packet) and checks, per edge, that the conditional distribution of the
//! edge's traffic given the messages does not depend on the messages. That
//! holds iff the per-message observation histograms over the key space are
//! identical, which is an exact integer comparison; the reported mutual
//! information in bits is display-only. Histograms are streamed message by
//! message, so memory grows with the key space, not with the full state
//! space.
//!
//! Work is split into fixed-size chunks of message indices. The parallel path
//! evaluates chunks on a thread pool and the sequential path evaluates them
//! in a loop, but both reduce the same chunk summaries in the same order, so
//! verdicts and entropy figures match bit for bit.
//!
//! The encoder search covers every family where each split-butterfly source
//! emits binary functions of its message bit and one local random bit, the
//! first relay emits a binary function of its two in-edges, and the second
//! relay forwards unary functions of the relay link. That is 2^24 families,
//! evaluated bitsliced over the 16 joint inputs. None of them is
//! simultaneously decodable at a positive rate and leak free on all seven
//! edges, while plenty decode both sessions insecurely.

use std::collections::BTreeMap;
use std::ops::Range;
use std::time::{Duration, Instant};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Error;
use crate::gfq::{FieldSpec, Packet, Symbol};
use crate::netgraph::EdgeLabel;
use crate::rational::Rational;
use crate::schemes::{execute_with_keys, TransmissionPlan};

/// Largest state count (message and key assignments combined) an audit will
/// enumerate unless the caller raises it.
pub const DEFAULT_AUDIT_BUDGET: u64 = 1 << 24;

/// Message indices evaluated per work unit. Fixed so that the sequential and
/// parallel paths sum floating point contributions in the same order.
const CHUNK: u64 = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVerdict {
    pub label: EdgeLabel,
    /// Exact test: traffic distribution is the same for every message pair.
    pub factorizes: bool,
    /// I(W1, W2; X_e) in bits, zero exactly when the edge factorizes.
    pub mutual_information_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyVerdict {
    pub pass: bool,
    pub edges: Vec<EdgeVerdict>,
    pub first_failure: Option<EdgeLabel>,
    /// Message-key assignments enumerated.
    pub states: u128,
}

/// States an exhaustive audit of the plan would enumerate: q raised to the
/// number of message and key packets.
pub fn audit_states(plan: &TransmissionPlan) -> u128 {
    let exponent = plan.k1 + plan.k2 + plan.key_counts.iter().sum::<usize>();
    let q = plan.field.q() as u128;
    let mut states: u128 = 1;
    for _ in 0..exponent {
        states = states.saturating_mul(q);
    }
    states
}

pub fn audit(plan: &TransmissionPlan) -> Result<SecrecyVerdict, Error> {
    audit_with_budget(plan, DEFAULT_AUDIT_BUDGET)
}

/// Runs the audit on the default path for this build: parallel when the
/// `parallel` feature is enabled, sequential otherwise.
pub fn audit_with_budget(plan: &TransmissionPlan, budget: u64) -> Result<SecrecyVerdict, Error> {
    #[cfg(feature = "parallel")]
    {
        audit_parallel(plan, budget)
    }
    #[cfg(not(feature = "parallel"))]
    {
        audit_sequential(plan, budget)
    }
}

pub fn audit_sequential(plan: &TransmissionPlan, budget: u64) -> Result<SecrecyVerdict, Error> {
    let dims = AuditDims::checked(plan, budget)?;
    let summaries: Result<Vec<ChunkSummary>, Error> = (0..dims.chunks())
        .map(|c| chunk_summary(plan, &dims, c))
        .collect();
    reduce(plan, &dims, summaries?)
}

#[cfg(feature = "parallel")]
pub fn audit_parallel(plan: &TransmissionPlan, budget: u64) -> Result<SecrecyVerdict, Error> {
    let dims = AuditDims::checked(plan, budget)?;
    let summaries: Result<Vec<ChunkSummary>, Error> = (0..dims.chunks())
        .into_par_iter()
        .map(|c| chunk_summary(plan, &dims, c))
        .collect();
    reduce(plan, &dims, summaries?)
}

struct AuditDims {
    q: u64,
    messages: u64,
    key_tuples: u64,
    key_symbols: usize,
    states: u128,
}

impl AuditDims {
    fn checked(plan: &TransmissionPlan, budget: u64) -> Result<Self, Error> {
        let states = audit_states(plan);
        if states > budget as u128 {
            return Err(Error::AuditBudgetExceeded {
                needed: states,
                budget,
            });
        }
        let q = plan.field.q() as u64;
        let pow = |e: usize| -> u64 { (0..e).fold(1u64, |acc, _| acc * q) };
        let key_symbols = plan.key_counts.iter().sum::<usize>();
        Ok(AuditDims {
            q,
            messages: pow(plan.k1 + plan.k2),
            key_tuples: pow(key_symbols),
            key_symbols,
            states,
        })
    }

    fn chunks(&self) -> u64 {
        self.messages.div_ceil(CHUNK)
    }
}

/// Everything the reduction needs from one block of message indices. Edge
/// index follows the plan's edge order.
struct ChunkSummary {
    edges: Vec<ChunkEdge>,
}

struct ChunkEdge {
    /// Observation histogram of the chunk's first message.
    reference: BTreeMap<Vec<Symbol>, u64>,
    /// Every message in the chunk produced `reference`.
    uniform: bool,
    /// Sum over the chunk's messages of H(X_e | W = w) in bits.
    cond_entropy_sum: f64,
    marginal: BTreeMap<Vec<Symbol>, u128>,
}

fn tuple_at(q: u64, len: usize, mut index: u64) -> Vec<Symbol> {
    let mut out = vec![0 as Symbol; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % q) as Symbol;
        index /= q;
    }
    out
}

fn single_symbol_packets(field: FieldSpec, symbols: &[Symbol]) -> Vec<Packet> {
    symbols
        .iter()
        .map(|&s| Packet::new(field, vec![s]).expect("symbol below q"))
        .collect()
}

fn entropy_bits_of_counts<I: Iterator<Item = u128>>(counts: I, total: u128) -> f64 {
    let total = total as f64;
    let mut h = 0.0;
    for count in counts {
        if count == 0 {
            continue;
        }
        let p = count as f64 / total;
        h -= p * p.log2();
    }
    h
}

fn chunk_summary(
    plan: &TransmissionPlan,
    dims: &AuditDims,
    chunk: u64,
) -> Result<ChunkSummary, Error> {
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(dims.messages);
    let field = plan.field;
    let mut edges: Vec<ChunkEdge> = plan
        .edges
        .iter()
        .map(|_| ChunkEdge {
            reference: BTreeMap::new(),
            uniform: true,
            cond_entropy_sum: 0.0,
            marginal: BTreeMap::new(),
        })
        .collect();

    for m in start..end {
        let message_symbols = tuple_at(dims.q, plan.k1 + plan.k2, m);
        let w1 = single_symbol_packets(field, &message_symbols[..plan.k1]);
        let w2 = single_symbol_packets(field, &message_symbols[plan.k1..]);

        let mut histograms: Vec<BTreeMap<Vec<Symbol>, u64>> =
            plan.edges.iter().map(|_| BTreeMap::new()).collect();
        for t in 0..dims.key_tuples {
            let key_symbols = tuple_at(dims.q, dims.key_symbols, t);
            let mut keys = Vec::with_capacity(plan.key_counts.len());
            let mut offset = 0;
            for &count in &plan.key_counts {
                keys.push(single_symbol_packets(
                    field,
                    &key_symbols[offset..offset + count],
                ));
                offset += count;
            }
            let trace = execute_with_keys(plan, &w1, &w2, &keys)?;
            for (hist, (_, contents)) in histograms.iter_mut().zip(&trace.edges) {
                let observation: Vec<Symbol> = contents
                    .iter()
                    .flat_map(|p| p.symbols().iter().copied())
                    .collect();
                *hist.entry(observation).or_insert(0) += 1;
            }
        }

        for (edge, hist) in edges.iter_mut().zip(histograms) {
            edge.cond_entropy_sum += entropy_bits_of_counts(
                hist.values().map(|&c| c as u128),
                dims.key_tuples as u128,
            );
            if m == start {
                edge.reference = hist.clone();
            } else if edge.uniform && hist != edge.reference {
                edge.uniform = false;
            }
            for (observation, count) in hist {
                *edge.marginal.entry(observation).or_insert(0) += count as u128;
            }
        }
    }

    Ok(ChunkSummary { edges })
}

fn reduce(
    plan: &TransmissionPlan,
    dims: &AuditDims,
    summaries: Vec<ChunkSummary>,
) -> Result<SecrecyVerdict, Error> {
    let mut edges = Vec::with_capacity(plan.edges.len());
    let mut first_failure = None;
    for (e, edge_plan) in plan.edges.iter().enumerate() {
        let mut factorizes = true;
        let mut cond_sum = 0.0;
        let mut marginal: BTreeMap<Vec<Symbol>, u128> = BTreeMap::new();
        let mut reference: Option<&BTreeMap<Vec<Symbol>, u64>> = None;
        for summary in &summaries {
            let chunk = &summary.edges[e];
            factorizes &= chunk.uniform;
            match reference {
                None => reference = Some(&chunk.reference),
                Some(r) => factorizes &= &chunk.reference == r,
            }
            cond_sum += chunk.cond_entropy_sum;
            for (observation, count) in &chunk.marginal {
                *marginal.entry(observation.clone()).or_insert(0) += count;
            }
        }
        let mutual_information_bits = if factorizes {
            0.0
        } else {
            let h_marginal = entropy_bits_of_counts(marginal.values().copied(), dims.states);
            (h_marginal - cond_sum / dims.messages as f64).max(0.0)
        };
        if !factorizes && first_failure.is_none() {
            first_failure = Some(edge_plan.label);
        }
        edges.push(EdgeVerdict {
            label: edge_plan.label,
            factorizes,
            mutual_information_bits,
        });
    }
    Ok(SecrecyVerdict {
        pass: first_failure.is_none(),
        edges,
        first_failure,
        states: dims.states,
    })
}

/// Exact distribution of one edge's traffic over every message and key
/// assignment, with rational masses.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeObservationDistribution {
    pub label: EdgeLabel,
    pub masses: BTreeMap<Vec<Symbol>, Rational>,
}

impl EdgeObservationDistribution {
    pub fn entropy_bits(&self) -> f64 {
        let mut h = 0.0;
        for mass in self.masses.values() {
            let p = *mass.numer() as f64 / *mass.denom() as f64;
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        h
    }
}

/// Materializes the marginal observation distribution of one edge. Subject to
/// the same state budget as the audit.
pub fn observe(
    plan: &TransmissionPlan,
    label: EdgeLabel,
    budget: u64,
) -> Result<EdgeObservationDistribution, Error> {
    let dims = AuditDims::checked(plan, budget)?;
    let position = plan
        .edges
        .iter()
        .position(|e| e.label == label)
        .ok_or_else(|| Error::Internal(format!("plan lacks edge {label}")))?;
    let mut counts: BTreeMap<Vec<Symbol>, u128> = BTreeMap::new();
    for chunk in 0..dims.chunks() {
        let summary = chunk_summary(plan, &dims, chunk)?;
        for (observation, count) in &summary.edges[position].marginal {
            *counts.entry(observation.clone()).or_insert(0) += count;
        }
    }
    let masses = counts
        .into_iter()
        .map(|(observation, count)| {
            (
                observation,
                Rational::new(count as i128, dims.states as i128),
            )
        })
        .collect();
    Ok(EdgeObservationDistribution { label, masses })
}

/// One single-letter binary encoding of the split butterfly. Sources hold a
/// message bit and one private uniform bit; `f1`, `f2`, `f4`, `f5` are 4-entry
/// truth tables over (message, randomness), `f3` is a 4-entry table over the
/// relay's two in-edges, `f6` and `f7` are 2-entry tables over the relay
/// link. Entry index is `w + 2r` (resp. `x1 + 2*x2`, `x3`); tables are stored
/// little-endian, bit b of the table is the output on entry b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderFamily {
    pub f1: u8,
    pub f2: u8,
    pub f4: u8,
    pub f5: u8,
    pub f3: u8,
    pub f6: u8,
    pub f7: u8,
}

pub const FAMILY_COUNT: u32 = 1 << 24;

impl EncoderFamily {
    pub fn from_index(index: u32) -> Self {
        assert!(index < FAMILY_COUNT, "family index out of range");
        EncoderFamily {
            f1: (index & 0xF) as u8,
            f2: ((index >> 4) & 0xF) as u8,
            f4: ((index >> 8) & 0xF) as u8,
            f5: ((index >> 12) & 0xF) as u8,
            f3: ((index >> 16) & 0xF) as u8,
            f6: ((index >> 20) & 0x3) as u8,
            f7: ((index >> 22) & 0x3) as u8,
        }
    }

    pub fn to_index(self) -> u32 {
        self.f1 as u32
            | (self.f2 as u32) << 4
            | (self.f4 as u32) << 8
            | (self.f5 as u32) << 12
            | (self.f3 as u32) << 16
            | (self.f6 as u32) << 20
            | (self.f7 as u32) << 22
    }

    /// The classic butterfly coding: forward the messages, relay their sum.
    /// Decodes both sessions; leaks on every message-bearing edge.
    pub fn xor_family() -> Self {
        EncoderFamily {
            f1: 0b1010,
            f2: 0b1010,
            f4: 0b1010,
            f5: 0b1010,
            f3: 0b0110,
            f6: 0b10,
            f7: 0b10,
        }
    }
}

impl std::fmt::Display for EncoderFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "f1={:04b} f2={:04b} f4={:04b} f5={:04b} f3={:04b} f6={:02b} f7={:02b}",
            self.f1, self.f2, self.f4, self.f5, self.f3, self.f6, self.f7
        )
    }
}

// Bitsliced evaluation: bit i of an edge word is the edge's output on joint
// input i, where w1 = i&1, w2 = (i>>1)&1, r1 = (i>>2)&1, r2 = (i>>3)&1.
const fn source_masks(w_shift: u32, r_shift: u32) -> [u16; 16] {
    let mut out = [0u16; 16];
    let mut table = 0;
    while table < 16 {
        let mut mask: u16 = 0;
        let mut i = 0;
        while i < 16 {
            let w = (i >> w_shift) & 1;
            let r = (i >> r_shift) & 1;
            if (table >> (w | (r << 1))) & 1 == 1 {
                mask |= 1 << i;
            }
            i += 1;
        }
        out[table as usize] = mask;
        table += 1;
    }
    out
}

/// Edge words for the 16 truth tables of session 1's source functions.
const X1MASK: [u16; 16] = source_masks(0, 2);
const X2MASK: [u16; 16] = source_masks(1, 3);

/// Inputs grouped by message pair (w1, w2): 00, 10, 01, 11.
const MESSAGE_GROUPS: [u16; 4] = [0x1111, 0x2222, 0x4444, 0x8888];
const W1_ZERO: u16 = 0x5555;
const W1_ONE: u16 = 0xAAAA;
const W2_ZERO: u16 = 0x3333;
const W2_ONE: u16 = 0xCCCC;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyClassification {
    /// Sink 1 recovers w1 from (x5, x7) on every input.
    pub decodes_w1: bool,
    pub decodes_w2: bool,
    /// Every edge's output is independent of the message pair.
    pub leak_free: bool,
}

impl FamilyClassification {
    pub fn secure_positive(self) -> bool {
        (self.decodes_w1 || self.decodes_w2) && self.leak_free
    }
}

fn unary(table: u8, x: u16) -> u16 {
    let mut out = 0;
    if table & 1 == 1 {
        out |= !x;
    }
    if table & 2 == 2 {
        out |= x;
    }
    out
}

/// A message bit is decodable from two observed edges iff no observation
/// pattern is consistent with both values of the bit.
fn decodable(xa: u16, xb: u16, zero_group: u16, one_group: u16) -> bool {
    for pattern in 0..4u16 {
        let pa = if pattern & 1 == 1 { xa } else { !xa };
        let pb = if pattern & 2 == 2 { xb } else { !xb };
        let observed = pa & pb;
        if observed & zero_group != 0 && observed & one_group != 0 {
            return false;
        }
    }
    true
}

/// A binary edge is independent of the message pair iff it is 1 on the same
/// number of inputs within each of the four message groups.
fn independent(x: u16) -> bool {
    let total = x.count_ones();
    MESSAGE_GROUPS
        .iter()
        .all(|&group| 4 * (x & group).count_ones() == total)
}

pub fn classify_family(family: EncoderFamily) -> FamilyClassification {
    let x1 = X1MASK[family.f1 as usize];
    let x4 = X1MASK[family.f4 as usize];
    let x2 = X2MASK[family.f2 as usize];
    let x5 = X2MASK[family.f5 as usize];

    let patterns = [!x1 & !x2, x1 & !x2, !x1 & x2, x1 & x2];
    let mut x3: u16 = 0;
    for (bit, &pattern) in patterns.iter().enumerate() {
        if (family.f3 >> bit) & 1 == 1 {
            x3 |= pattern;
        }
    }
    let x6 = unary(family.f6, x3);
    let x7 = unary(family.f7, x3);

    FamilyClassification {
        decodes_w1: decodable(x5, x7, W1_ZERO, W1_ONE),
        decodes_w2: decodable(x4, x6, W2_ZERO, W2_ONE),
        leak_free: [x1, x2, x3, x4, x5, x6, x7].iter().all(|&x| independent(x)),
    }
}

/// Counts over a family range, with the lowest qualifying index per class.
/// Merging summaries of disjoint ranges is order-insensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchSummary {
    pub scanned: u64,
    pub decodable_both: u64,
    pub secure_positive: u64,
    pub first_decodable_both: Option<u32>,
    pub first_secure_positive: Option<u32>,
}

impl SearchSummary {
    pub fn merge(self, other: SearchSummary) -> SearchSummary {
        let min = |a: Option<u32>, b: Option<u32>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        SearchSummary {
            scanned: self.scanned + other.scanned,
            decodable_both: self.decodable_both + other.decodable_both,
            secure_positive: self.secure_positive + other.secure_positive,
            first_decodable_both: min(self.first_decodable_both, other.first_decodable_both),
            first_secure_positive: min(self.first_secure_positive, other.first_secure_positive),
        }
    }
}

pub fn search_range_sequential(range: Range<u32>) -> SearchSummary {
    let mut summary = SearchSummary::default();
    for index in range {
        let classification = classify_family(EncoderFamily::from_index(index));
        summary.scanned += 1;
        if classification.decodes_w1 && classification.decodes_w2 {
            summary.decodable_both += 1;
            if summary.first_decodable_both.is_none() {
                summary.first_decodable_both = Some(index);
            }
        }
        if classification.secure_positive() {
            summary.secure_positive += 1;
            if summary.first_secure_positive.is_none() {
                summary.first_secure_positive = Some(index);
            }
        }
    }
    summary
}

#[cfg(feature = "parallel")]
pub fn search_range_parallel(range: Range<u32>) -> SearchSummary {
    // 2^16 families per work unit keeps rayon overhead negligible.
    const SPAN: u32 = 1 << 16;
    let start = range.start;
    let end = range.end;
    let units = (end - start).div_ceil(SPAN);
    (0..units)
        .into_par_iter()
        .map(|u| {
            let lo = start + u * SPAN;
            let hi = (lo + SPAN).min(end);
            search_range_sequential(lo..hi)
        })
        .reduce(SearchSummary::default, SearchSummary::merge)
}

/// Scans a range on the default path for this build: parallel when the
/// `parallel` feature is enabled, sequential otherwise.
pub fn search_range(range: Range<u32>) -> SearchSummary {
    #[cfg(feature = "parallel")]
    {
        search_range_parallel(range)
    }
    #[cfg(not(feature = "parallel"))]
    {
        search_range_sequential(range)
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub summary: SearchSummary,
    pub first_decodable_both: Option<EncoderFamily>,
    pub first_secure_positive: Option<EncoderFamily>,
    pub elapsed: Duration,
}

/// Scans all 2^24 families on the default path for this build.
pub fn search_families() -> SearchReport {
    let started = Instant::now();
    let summary = search_range(0..FAMILY_COUNT);
    SearchReport {
        summary,
        first_decodable_both: summary.first_decodable_both.map(EncoderFamily::from_index),
        first_secure_positive: summary.first_secure_positive.map(EncoderFamily::from_index),
        elapsed: started.elapsed(),
    }
}
