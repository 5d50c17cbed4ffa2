//! Rate regions as min-of-affine constraint systems.
//!
//! Every region here is a set of pairs (R1, R2) >= 0 cut out by constraints
//! of the form
//!
//! ```text
//! a1*R1 + a2*R2 <= min(t_1, ..., t_k),    t_j = c_j + b1_j*R1 + b2_j*R2
//! ```
//!
//! Such a constraint expands exactly into the half-planes
//! `(a1-b1_j)*R1 + (a2-b2_j)*R2 <= c_j`, so regions are convex polytopes and
//! membership, vertex enumeration, and equivalence are all exact rational
//! computations.
//!
//! Two region families are provided per template: the converse (capacity)
//! form, whose right-hand sides depend only on edge capacities, and the
//! achievability form, whose right-hand sides may also involve the rates
//! themselves. The two describe the same sets; tests hold both routes against
//! each other.

use std::fmt;

use num_traits::Zero;

use crate::error::Error;
use crate::netgraph::{EdgeLabel, TemplateCaps, Variant};
use crate::rational::Rational;

/// A non-negative rate pair (R1, R2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatePair {
    pub r1: Rational,
    pub r2: Rational,
}

impl RatePair {
    pub fn new(r1: Rational, r2: Rational) -> Result<Self, Error> {
        if r1 < Rational::zero() || r2 < Rational::zero() {
            return Err(Error::InvalidConfig(format!(
                "negative rate in ({r1}, {r2})"
            )));
        }
        Ok(RatePair { r1, r2 })
    }

    pub fn zero() -> Self {
        RatePair {
            r1: Rational::zero(),
            r2: Rational::zero(),
        }
    }

    pub fn sum(self) -> Rational {
        self.r1 + self.r2
    }
}

impl fmt::Display for RatePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.r1, self.r2)
    }
}

/// One affine right-hand-side term `constant + r1_coeff*R1 + r2_coeff*R2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineTerm {
    pub constant: Rational,
    pub r1_coeff: Rational,
    pub r2_coeff: Rational,
}

impl AffineTerm {
    pub fn constant(c: Rational) -> Self {
        AffineTerm {
            constant: c,
            r1_coeff: Rational::zero(),
            r2_coeff: Rational::zero(),
        }
    }

    fn rate1() -> Self {
        AffineTerm {
            constant: Rational::zero(),
            r1_coeff: Rational::from_integer(1),
            r2_coeff: Rational::zero(),
        }
    }

    fn rate2() -> Self {
        AffineTerm {
            constant: Rational::zero(),
            r1_coeff: Rational::zero(),
            r2_coeff: Rational::from_integer(1),
        }
    }

    fn plus(self, other: AffineTerm) -> AffineTerm {
        AffineTerm {
            constant: self.constant + other.constant,
            r1_coeff: self.r1_coeff + other.r1_coeff,
            r2_coeff: self.r2_coeff + other.r2_coeff,
        }
    }

    pub fn eval(self, p: RatePair) -> Rational {
        self.constant + self.r1_coeff * p.r1 + self.r2_coeff * p.r2
    }
}

impl fmt::Display for AffineTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        if !self.constant.is_zero() {
            write!(f, "{}", self.constant)?;
            wrote = true;
        }
        for (coeff, name) in [(self.r1_coeff, "R1"), (self.r2_coeff, "R2")] {
            if coeff.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            if coeff != Rational::from_integer(1) {
                write!(f, "{coeff}*")?;
            }
            write!(f, "{name}")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `lhs_r1*R1 + lhs_r2*R2 <= min(rhs_terms)`, with an optional symbolic note
/// recording which capacities built the right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinAffineConstraint {
    pub lhs_r1: Rational,
    pub lhs_r2: Rational,
    pub rhs_terms: Vec<AffineTerm>,
    pub origin: Option<String>,
}

impl MinAffineConstraint {
    pub fn rhs_at(&self, p: RatePair) -> Rational {
        self.rhs_terms
            .iter()
            .map(|t| t.eval(p))
            .min()
            .expect("constraints have at least one term")
    }

    pub fn lhs_at(&self, p: RatePair) -> Rational {
        self.lhs_r1 * p.r1 + self.lhs_r2 * p.r2
    }

    pub fn satisfied_by(&self, p: RatePair) -> bool {
        self.lhs_at(p) <= self.rhs_at(p)
    }

    fn lhs_display(&self) -> String {
        let one = Rational::from_integer(1);
        match (self.lhs_r1 == one, self.lhs_r2 == one, self.lhs_r1.is_zero(), self.lhs_r2.is_zero()) {
            (true, _, _, true) => "R1".to_string(),
            (_, true, true, _) => "R2".to_string(),
            (true, true, _, _) => "R1 + R2".to_string(),
            _ => format!("{}*R1 + {}*R2", self.lhs_r1, self.lhs_r2),
        }
    }
}

impl fmt::Display for MinAffineConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= ", self.lhs_display())?;
        if self.rhs_terms.len() == 1 {
            write!(f, "{}", self.rhs_terms[0])?;
        } else {
            let rendered: Vec<String> = self.rhs_terms.iter().map(|t| t.to_string()).collect();
            write!(f, "min({})", rendered.join(", "))?;
        }
        if let Some(origin) = &self.origin {
            write!(f, " [{origin}]")?;
        }
        Ok(())
    }
}

/// Closed half-plane `r1_coeff*R1 + r2_coeff*R2 <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfPlane {
    pub r1_coeff: Rational,
    pub r2_coeff: Rational,
    pub bound: Rational,
}

impl HalfPlane {
    pub fn admits(self, p: RatePair) -> bool {
        self.r1_coeff * p.r1 + self.r2_coeff * p.r2 <= self.bound
    }
}

/// A boundary line that can be tight at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryLine {
    /// R1 = 0.
    R1Floor,
    /// R2 = 0.
    R2Floor,
    /// Index into [`RateRegion::half_planes`].
    Constraint(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub point: RatePair,
    pub active: Vec<BoundaryLine>,
}

/// An intersection of min-affine constraints with the non-negative quadrant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateRegion {
    pub constraints: Vec<MinAffineConstraint>,
}

impl RateRegion {
    /// Expands every min term into its half-plane. The implicit R1, R2 >= 0
    /// bounds are not part of the list.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        self.constraints
            .iter()
            .flat_map(|c| {
                c.rhs_terms.iter().map(|t| HalfPlane {
                    r1_coeff: c.lhs_r1 - t.r1_coeff,
                    r2_coeff: c.lhs_r2 - t.r2_coeff,
                    bound: t.constant,
                })
            })
            .collect()
    }

    /// Membership through the expanded half-planes.
    pub fn contains(&self, p: RatePair) -> bool {
        p.r1 >= Rational::zero()
            && p.r2 >= Rational::zero()
            && self.half_planes().iter().all(|h| h.admits(p))
    }

    /// Membership by evaluating each min directly; must agree with
    /// [`RateRegion::contains`] everywhere.
    pub fn contains_direct(&self, p: RatePair) -> bool {
        p.r1 >= Rational::zero()
            && p.r2 >= Rational::zero()
            && self.constraints.iter().all(|c| c.satisfied_by(p))
    }

    /// First constraint the pair violates, for error reporting.
    pub fn first_violated(&self, p: RatePair) -> Option<&MinAffineConstraint> {
        self.constraints.iter().find(|c| !c.satisfied_by(p))
    }

    /// All extreme points, deduplicated and sorted lexicographically.
    /// Fails on unbounded regions.
    pub fn vertices(&self) -> Result<Vec<Vertex>, Error> {
        let planes = self.half_planes();
        if let Some(d) = self.recession_direction(&planes) {
            debug_assert!(d.0 >= Rational::zero() && d.1 >= Rational::zero());
            return Err(Error::UnboundedRegion);
        }

        // Boundary lines as (a1, a2, b) for a1*R1 + a2*R2 = b; the first two
        // are the quadrant floors, mirroring BoundaryLine indices.
        let mut lines: Vec<(Rational, Rational, Rational)> = vec![
            (
                Rational::from_integer(-1),
                Rational::zero(),
                Rational::zero(),
            ),
            (
                Rational::zero(),
                Rational::from_integer(-1),
                Rational::zero(),
            ),
        ];
        lines.extend(planes.iter().map(|h| (h.r1_coeff, h.r2_coeff, h.bound)));

        let mut points = std::collections::BTreeSet::new();
        for i in 0..lines.len() {
            for j in (i + 1)..lines.len() {
                let (a1, a2, b1) = lines[i];
                let (c1, c2, b2) = lines[j];
                let det = a1 * c2 - a2 * c1;
                if det.is_zero() {
                    continue;
                }
                let r1 = (b1 * c2 - b2 * a2) / det;
                let r2 = (a1 * b2 - c1 * b1) / det;
                if r1 < Rational::zero() || r2 < Rational::zero() {
                    continue;
                }
                let p = RatePair { r1, r2 };
                if planes.iter().all(|h| h.admits(p)) {
                    points.insert((r1, r2));
                }
            }
        }

        let vertices = points
            .into_iter()
            .map(|(r1, r2)| {
                let p = RatePair { r1, r2 };
                let mut active = Vec::new();
                if r1.is_zero() {
                    active.push(BoundaryLine::R1Floor);
                }
                if r2.is_zero() {
                    active.push(BoundaryLine::R2Floor);
                }
                for (idx, h) in planes.iter().enumerate() {
                    if h.r1_coeff * r1 + h.r2_coeff * r2 == h.bound {
                        active.push(BoundaryLine::Constraint(idx));
                    }
                }
                Vertex { point: p, active }
            })
            .collect();
        Ok(vertices)
    }

    /// A nonzero direction of recession inside the quadrant, if one exists.
    fn recession_direction(
        &self,
        planes: &[HalfPlane],
    ) -> Option<(Rational, Rational)> {
        let mut candidates = vec![
            (Rational::from_integer(1), Rational::zero()),
            (Rational::zero(), Rational::from_integer(1)),
        ];
        for h in planes {
            for d in [(-h.r2_coeff, h.r1_coeff), (h.r2_coeff, -h.r1_coeff)] {
                if d.0 >= Rational::zero() && d.1 >= Rational::zero() {
                    candidates.push(d);
                }
            }
        }
        candidates.into_iter().find(|&(d1, d2)| {
            !(d1.is_zero() && d2.is_zero())
                && planes
                    .iter()
                    .all(|h| h.r1_coeff * d1 + h.r2_coeff * d2 <= Rational::zero())
        })
    }
}

impl fmt::Display for RateRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Exact set equality of two bounded regions: every vertex of each lies in
/// the other.
pub fn equivalent(a: &RateRegion, b: &RateRegion) -> Result<bool, Error> {
    let va = a.vertices()?;
    let vb = b.vertices()?;
    Ok(va.iter().all(|v| b.contains(v.point)) && vb.iter().all(|v| a.contains(v.point)))
}

/// Largest R1 + R2 over the region; zero for an empty region.
pub fn sum_rate_max(region: &RateRegion) -> Result<Rational, Error> {
    Ok(region
        .vertices()?
        .iter()
        .map(|v| v.point.sum())
        .max()
        .unwrap_or_else(Rational::zero))
}

/// Vertices in counterclockwise boundary order, starting from the
/// lexicographically smallest. Exact arithmetic throughout.
pub fn boundary_vertices(region: &RateRegion) -> Result<Vec<RatePair>, Error> {
    let mut points: Vec<RatePair> = region.vertices()?.into_iter().map(|v| v.point).collect();
    if points.len() <= 2 {
        return Ok(points);
    }
    let n = Rational::from_integer(points.len() as i128);
    let cx = points.iter().map(|p| p.r1).sum::<Rational>() / n;
    let cy = points.iter().map(|p| p.r2).sum::<Rational>() / n;
    let upper = |p: &RatePair| {
        let (dx, dy) = (p.r1 - cx, p.r2 - cy);
        dy > Rational::zero() || (dy.is_zero() && dx > Rational::zero())
    };
    points.sort_by(|p, q| {
        use std::cmp::Ordering;
        match (upper(p), upper(q)) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => {
                let cross = (p.r1 - cx) * (q.r2 - cy) - (p.r2 - cy) * (q.r1 - cx);
                if cross > Rational::zero() {
                    Ordering::Less
                } else if cross < Rational::zero() {
                    Ordering::Greater
                } else {
                    p.cmp(q)
                }
            }
        }
    });
    let start = points
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| **p)
        .map(|(i, _)| i)
        .expect("nonempty");
    points.rotate_left(start);
    Ok(points)
}

fn constraint(
    lhs: (i128, i128),
    rhs_terms: Vec<AffineTerm>,
    origin: impl Into<String>,
) -> MinAffineConstraint {
    MinAffineConstraint {
        lhs_r1: Rational::from_integer(lhs.0),
        lhs_r2: Rational::from_integer(lhs.1),
        rhs_terms,
        origin: Some(origin.into()),
    }
}

/// Min of constants collapses to a single term.
fn const_min(values: &[Rational]) -> Vec<AffineTerm> {
    let m = values.iter().copied().min().expect("nonempty min");
    vec![AffineTerm::constant(m)]
}

/// Sum of min-groups, expanded: min(A) + min(B) = min over all pairwise sums.
fn cross_sum(groups: &[Vec<AffineTerm>]) -> Vec<AffineTerm> {
    let mut acc = vec![AffineTerm::constant(Rational::zero())];
    for group in groups {
        acc = acc
            .iter()
            .flat_map(|a| group.iter().map(|b| a.plus(*b)))
            .collect();
    }
    acc
}

/// The converse (capacity) form of a template's rate region. For Butterfly1
/// under the secrecy requirement this is the single point (0, 0).
pub fn capacity_region(caps: &TemplateCaps, secure: bool) -> RateRegion {
    let c = |i: u8| caps.single(i);
    let variant = caps.variant();
    let constraints = match (variant, secure) {
        (Variant::Butterfly1, false) => vec![
            constraint((1, 0), const_min(&[c(1), c(3), c(7)]), "min(C1, C3, C7)"),
            constraint((0, 1), const_min(&[c(2), c(3), c(6)]), "min(C2, C3, C6)"),
            constraint((1, 1), const_min(&[c(3) + c(4)]), "C3 + C4"),
            constraint((1, 1), const_min(&[c(3) + c(5)]), "C3 + C5"),
        ],
        (Variant::Butterfly1, true) => {
            // No secure scheme exists here; only the origin remains.
            let zero = |lhs| MinAffineConstraint {
                lhs_r1: Rational::from_integer(if lhs == 1 { 1 } else { 0 }),
                lhs_r2: Rational::from_integer(if lhs == 2 { 1 } else { 0 }),
                rhs_terms: vec![AffineTerm::constant(Rational::zero())],
                origin: None,
            };
            vec![zero(1), zero(2)]
        }
        (Variant::CoLocatedSources, false) => {
            let c12 = caps.get(EdgeLabel::Merged(1, 2));
            vec![
                constraint(
                    (1, 0),
                    cross_sum(&[const_min(&[c(5)]), const_min(&[c12, c(3), c(7)])]),
                    "C5 + min(C12, C3, C7)",
                ),
                constraint(
                    (0, 1),
                    cross_sum(&[const_min(&[c(4)]), const_min(&[c12, c(3), c(6)])]),
                    "C4 + min(C12, C3, C6)",
                ),
                constraint(
                    (1, 1),
                    cross_sum(&[
                        const_min(&[c(4) + c(5)]),
                        const_min(&[c12, c(3), c(6) + c(7)]),
                    ]),
                    "C4 + C5 + min(C12, C3, C6 + C7)",
                ),
            ]
        }
        (Variant::CoLocatedSources, true) => {
            let c12 = caps.get(EdgeLabel::Merged(1, 2));
            vec![
                constraint(
                    (1, 0),
                    const_min(&[c(5), c12, c(3), c(7)]),
                    "min(C5, C12, C3, C7)",
                ),
                constraint(
                    (0, 1),
                    const_min(&[c(4), c12, c(3), c(6)]),
                    "min(C4, C12, C3, C6)",
                ),
            ]
        }
        (Variant::CoLocatedSinks, false) => {
            let c67 = caps.get(EdgeLabel::Merged(6, 7));
            vec![
                constraint(
                    (1, 0),
                    cross_sum(&[const_min(&[c(4)]), const_min(&[c(1), c(3), c67])]),
                    "C4 + min(C1, C3, C67)",
                ),
                constraint(
                    (0, 1),
                    cross_sum(&[const_min(&[c(5)]), const_min(&[c(2), c(3), c67])]),
                    "C5 + min(C2, C3, C67)",
                ),
                constraint(
                    (1, 1),
                    cross_sum(&[
                        const_min(&[c(4) + c(5)]),
                        const_min(&[c(1) + c(2), c(3), c67]),
                    ]),
                    "C4 + C5 + min(C1 + C2, C3, C67)",
                ),
            ]
        }
        (Variant::CoLocatedSinks, true) => {
            let c67 = caps.get(EdgeLabel::Merged(6, 7));
            vec![
                constraint((1, 0), const_min(&[c(1), c(4)]), "min(C1, C4)"),
                constraint((0, 1), const_min(&[c(2), c(5)]), "min(C2, C5)"),
                constraint((1, 1), const_min(&[c(3), c67]), "min(C3, C67)"),
            ]
        }
        (Variant::Butterfly2, false) => vec![
            constraint(
                (1, 0),
                cross_sum(&[const_min(&[c(4)]), const_min(&[c(1), c(3), c(7)])]),
                "C4 + min(C1, C3, C7)",
            ),
            constraint(
                (0, 1),
                cross_sum(&[const_min(&[c(5)]), const_min(&[c(2), c(3), c(6)])]),
                "C5 + min(C2, C3, C6)",
            ),
            constraint(
                (1, 1),
                const_min(&[c(3) + c(4) + c(5)]),
                "C3 + C4 + C5",
            ),
        ],
        (Variant::Butterfly2, true) => vec![
            constraint(
                (1, 0),
                const_min(&[c(4), c(1), c(3), c(7)]),
                "min(C4, C1, C3, C7)",
            ),
            constraint(
                (0, 1),
                const_min(&[c(5), c(2), c(3), c(6)]),
                "min(C5, C2, C3, C6)",
            ),
            constraint((1, 1), const_min(&[c(3)]), "C3"),
        ],
    };
    RateRegion { constraints }
}

/// The achievability form: the region the concrete transmission schemes
/// reach, written with rate-dependent min terms. For secure operation the
/// schemes meet the converse exactly, so that form is returned as is.
pub fn achievable_region(caps: &TemplateCaps, secure: bool) -> RateRegion {
    if secure {
        return capacity_region(caps, true);
    }
    let c = |i: u8| caps.single(i);
    let constraints = match caps.variant() {
        Variant::Butterfly1 => vec![
            constraint((1, 0), const_min(&[c(1), c(7)]), "min(C1, C7)"),
            constraint((0, 1), const_min(&[c(2), c(6)]), "min(C2, C6)"),
            constraint(
                (1, 1),
                cross_sum(&[
                    const_min(&[c(3)]),
                    vec![
                        AffineTerm::rate2(),
                        AffineTerm::constant(c(4)),
                        AffineTerm::constant(c(5)),
                    ],
                ]),
                "C3 + min(R2, C4, C5)",
            ),
            constraint(
                (1, 1),
                cross_sum(&[
                    const_min(&[c(3)]),
                    vec![
                        AffineTerm::rate1(),
                        AffineTerm::constant(c(4)),
                        AffineTerm::constant(c(5)),
                    ],
                ]),
                "C3 + min(R1, C4, C5)",
            ),
        ],
        Variant::CoLocatedSources => {
            let c12 = caps.get(EdgeLabel::Merged(1, 2));
            let min_r1_c5 = vec![AffineTerm::rate1(), AffineTerm::constant(c(5))];
            let min_r2_c4 = vec![AffineTerm::rate2(), AffineTerm::constant(c(4))];
            vec![
                constraint(
                    (1, 0),
                    cross_sum(&[const_min(&[c(7)]), min_r1_c5.clone()]),
                    "C7 + min(R1, C5)",
                ),
                constraint(
                    (0, 1),
                    cross_sum(&[const_min(&[c(6)]), min_r2_c4.clone()]),
                    "C6 + min(R2, C4)",
                ),
                constraint(
                    (1, 1),
                    cross_sum(&[const_min(&[c12, c(3)]), min_r2_c4, min_r1_c5]),
                    "min(C12, C3) + min(R2, C4) + min(R1, C5)",
                ),
            ]
        }
        Variant::CoLocatedSinks => {
            let c67 = caps.get(EdgeLabel::Merged(6, 7));
            let min_r1_c4 = vec![AffineTerm::rate1(), AffineTerm::constant(c(4))];
            let min_r2_c5 = vec![AffineTerm::rate2(), AffineTerm::constant(c(5))];
            vec![
                constraint(
                    (1, 0),
                    cross_sum(&[const_min(&[c(1)]), min_r1_c4.clone()]),
                    "C1 + min(R1, C4)",
                ),
                constraint(
                    (0, 1),
                    cross_sum(&[const_min(&[c(2)]), min_r2_c5.clone()]),
                    "C2 + min(R2, C5)",
                ),
                constraint(
                    (1, 1),
                    cross_sum(&[const_min(&[c(3), c67]), min_r2_c5, min_r1_c4]),
                    "min(C3, C67) + min(R2, C5) + min(R1, C4)",
                ),
            ]
        }
        Variant::Butterfly2 => {
            let min_r1_c4 = vec![AffineTerm::rate1(), AffineTerm::constant(c(4))];
            let min_r2_c5 = vec![AffineTerm::rate2(), AffineTerm::constant(c(5))];
            vec![
                constraint(
                    (1, 0),
                    cross_sum(&[const_min(&[c(1), c(7)]), min_r1_c4.clone()]),
                    "min(C1, C7) + min(R1, C4)",
                ),
                constraint(
                    (0, 1),
                    cross_sum(&[const_min(&[c(2), c(6)]), min_r2_c5.clone()]),
                    "min(C2, C6) + min(R2, C5)",
                ),
                constraint(
                    (1, 1),
                    cross_sum(&[const_min(&[c(3)]), min_r2_c5, min_r1_c4]),
                    "C3 + min(R2, C5) + min(R1, C4)",
                ),
            ]
        }
    };
    RateRegion { constraints }
}
