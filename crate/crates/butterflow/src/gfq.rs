//! Prime-field symbols and fixed-length packets.
//!
//! A symbol is an element of GF(q) for prime q, stored as a `u32` in `[0, q)`.
//! A packet is a fixed-length symbol vector; packet addition is the mixing
//! primitive and adding a uniform packet is the one-time pad.

use rand::{Rng, RngExt};

use crate::error::Error;

/// A field element in `[0, q)`. Range validity is enforced by [`FieldSpec`]
/// and [`Packet`] constructors and preserved by all arithmetic here.
pub type Symbol = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldSpec {
    q: u32,
}

/// GF(2), the default field everywhere.
pub const BINARY: FieldSpec = FieldSpec { q: 2 };

impl FieldSpec {
    /// Requires q to be prime; composite and trivial moduli are rejected.
    pub fn new(q: u32) -> Result<Self, Error> {
        if !is_prime(q) {
            return Err(Error::InvalidConfig(format!("field order {q} is not prime")));
        }
        Ok(FieldSpec { q })
    }

    pub fn q(self) -> u32 {
        self.q
    }

    pub fn add(self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(a < self.q && b < self.q);
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    pub fn sub(self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(a < self.q && b < self.q);
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    pub fn uniform_symbol<R: Rng + ?Sized>(self, rng: &mut R) -> Symbol {
        rng.random_range(0..self.q)
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    field: FieldSpec,
    symbols: Vec<Symbol>,
}

impl Packet {
    pub fn new(field: FieldSpec, symbols: Vec<Symbol>) -> Result<Self, Error> {
        if let Some(&s) = symbols.iter().find(|&&s| s >= field.q()) {
            return Err(Error::FieldMismatch(format!(
                "symbol {s} out of range for GF({})",
                field.q()
            )));
        }
        Ok(Packet { field, symbols })
    }

    pub fn zero(field: FieldSpec, len: usize) -> Self {
        Packet {
            field,
            symbols: vec![0; len],
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn add(&self, rhs: &Packet) -> Result<Packet, Error> {
        self.zip_with(rhs, FieldSpec::add)
    }

    pub fn sub(&self, rhs: &Packet) -> Result<Packet, Error> {
        self.zip_with(rhs, FieldSpec::sub)
    }

    fn zip_with(&self, rhs: &Packet, op: fn(FieldSpec, Symbol, Symbol) -> Symbol) -> Result<Packet, Error> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch(format!(
                "GF({}) vs GF({})",
                self.field.q(),
                rhs.field.q()
            )));
        }
        if self.len() != rhs.len() {
            return Err(Error::FieldMismatch(format!(
                "packet length {} vs {}",
                self.len(),
                rhs.len()
            )));
        }
        let symbols = self
            .symbols
            .iter()
            .zip(&rhs.symbols)
            .map(|(&a, &b)| op(self.field, a, b))
            .collect();
        Ok(Packet {
            field: self.field,
            symbols,
        })
    }
}

/// Draws a packet with i.i.d. uniform symbols from the given generator.
pub fn uniform_packet<R: Rng + ?Sized>(field: FieldSpec, len: usize, rng: &mut R) -> Packet {
    let symbols = (0..len).map(|_| field.uniform_symbol(rng)).collect();
    Packet { field, symbols }
}

/// Iterates every length-`len` symbol tuple of GF(q) in lexicographic order
/// (first position most significant). Used by exhaustive enumerations.
pub fn all_tuples(field: FieldSpec, len: usize) -> TupleIter {
    TupleIter {
        q: field.q(),
        state: vec![0; len],
        done: false,
    }
}

pub struct TupleIter {
    q: u32,
    state: Vec<Symbol>,
    done: bool,
}

impl Iterator for TupleIter {
    type Item = Vec<Symbol>;

    fn next(&mut self) -> Option<Vec<Symbol>> {
        if self.done {
            return None;
        }
        let current = self.state.clone();
        // Odometer increment, least significant digit last.
        let mut i = self.state.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.state[i] += 1;
            if self.state[i] < self.q {
                break;
            }
            self.state[i] = 0;
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn rejects_non_prime_orders() {
        for q in [0, 1, 4, 6, 9, 12] {
            assert!(FieldSpec::new(q).is_err(), "GF({q}) should be rejected");
        }
        for q in [2, 3, 5, 7, 11, 13] {
            assert_eq!(FieldSpec::new(q).unwrap().q(), q);
        }
    }

    #[test]
    fn add_sub_round_trip_gf2() {
        let f = BINARY;
        let a = Packet::new(f, vec![0, 1, 1, 0]).unwrap();
        let b = Packet::new(f, vec![1, 1, 0, 0]).unwrap();
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.symbols(), &[1, 0, 1, 0]);
        assert_eq!(sum.sub(&b).unwrap(), a);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = Packet::new(BINARY, vec![0, 1]).unwrap();
        let b = Packet::new(BINARY, vec![0]).unwrap();
        assert!(a.add(&b).is_err());
        let c = Packet::new(FieldSpec::new(3).unwrap(), vec![0, 2]).unwrap();
        assert!(a.add(&c).is_err());
        assert!(Packet::new(BINARY, vec![2]).is_err());
    }

    /// Adding any fixed packet permutes the tuple space: over all keys the
    /// ciphertext m + k takes every value exactly once.
    #[test]
    fn one_time_pad_is_uniform_for_every_message() {
        for q in [2u32, 3, 5] {
            let f = FieldSpec::new(q).unwrap();
            let len = 2;
            for m in all_tuples(f, len) {
                let msg = Packet::new(f, m).unwrap();
                let mut counts: HashMap<Vec<Symbol>, u32> = HashMap::new();
                for k in all_tuples(f, len) {
                    let key = Packet::new(f, k).unwrap();
                    let c = msg.add(&key).unwrap();
                    *counts.entry(c.symbols().to_vec()).or_insert(0) += 1;
                }
                assert_eq!(counts.len() as u64, (q as u64).pow(len as u32));
                assert!(counts.values().all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn uniform_packet_is_deterministic_and_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = uniform_packet(BINARY, 100_000, &mut rng);
        let ones = p.symbols().iter().filter(|&&s| s == 1).count() as f64;
        let frac = ones / 100_000.0;
        assert!((0.49..=0.51).contains(&frac), "ones fraction {frac}");

        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let p2 = uniform_packet(BINARY, 100_000, &mut rng2);
        assert_eq!(p, p2);
    }

    #[test]
    fn tuple_enumeration_is_exhaustive_and_ordered() {
        let f = FieldSpec::new(3).unwrap();
        let tuples: Vec<_> = all_tuples(f, 2).collect();
        assert_eq!(tuples.len(), 9);
        assert_eq!(tuples[0], vec![0, 0]);
        assert_eq!(tuples[1], vec![0, 1]);
        assert_eq!(tuples[8], vec![2, 2]);
        let empty: Vec<_> = all_tuples(f, 0).collect();
        assert_eq!(empty, vec![Vec::<Symbol>::new()]);
    }
}
