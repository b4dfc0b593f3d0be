//! TDMA frame model and the spatial-reuse slot allocator.
//!
//! A frame is an ordered list of variable-length slots. Every slot carries a
//! set of link transmissions that can run concurrently under the protocol
//! interference model with transmission range equal to interference range:
//! no node takes part in two transmissions, and no receiver has another
//! transmitting neighbor.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{ConnectivityGraph, Link, NodeId};
use crate::rational::{format_fraction, parse_rational, Rational};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId(pub u32);

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Useful bits (megabits) sent on `from->to` during one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub from: NodeId,
    pub to: NodeId,
    pub flow: Rational,
}

impl Allocation {
    pub fn key(&self) -> (NodeId, NodeId) {
        (self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSlot {
    pub id: SlotId,
    pub duration: Rational,
    pub allocations: Vec<Allocation>,
}

impl TimeSlot {
    pub fn has_link(&self, key: (NodeId, NodeId)) -> bool {
        self.allocations.iter().any(|a| a.key() == key)
    }
}

/// True iff `a = (m,n)` and `b = (p,q)` cannot share a slot.
///
/// That is the case when they share an endpoint, when `p` is a neighbor of
/// the receiver `n`, or when `m` is a neighbor of the receiver `q`. A link
/// conflicts with itself.
pub fn conflicts(g: &ConnectivityGraph, a: (NodeId, NodeId), b: (NodeId, NodeId)) -> Result<bool> {
    for (from, to) in [a, b] {
        if g.capacity(from, to).is_none() {
            return Err(Error::MissingLink(from, to));
        }
    }
    Ok(links_conflict(g, a, b))
}

#[inline]
pub(crate) fn links_conflict(g: &ConnectivityGraph, (m, n): (NodeId, NodeId), (p, q): (NodeId, NodeId)) -> bool {
    m == p || m == q || n == p || n == q || g.is_adjacent(p, n) || g.is_adjacent(m, q)
}

/// True iff `link` conflicts with nothing already in `slot`.
pub fn slot_feasible(g: &ConnectivityGraph, slot: &TimeSlot, link: (NodeId, NodeId)) -> bool {
    slot.allocations.iter().all(|a| !links_conflict(g, a.key(), link))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// Slot being split; it keeps the first `cut` seconds.
    pub slot: SlotId,
    pub cut: Rational,
    /// Fragment holding the remaining time, appended to the frame.
    pub new_slot: SlotId,
}

/// Outcome of [`spatial_reuse`]: what to reuse, split and create so that
/// `link` gets exactly `needed` seconds of air time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationPlan {
    pub link: Link,
    pub needed: Rational,
    /// Existing slots the link joins, with the time used in each (after splits).
    pub reused: Vec<(SlotId, Rational)>,
    pub splits: Vec<Split>,
    pub created: Vec<(SlotId, Rational)>,
    /// Time added to the frame, i.e. the total of `created`.
    pub delta: Rational,
    base_version: u64,
    base_next_id: u32,
    base_slot_count: usize,
}

impl AllocationPlan {
    pub fn allocated(&self) -> Rational {
        self.reused
            .iter()
            .chain(&self.created)
            .fold(Rational::zero(), |acc, (_, d)| acc + d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    slots: Vec<Arc<TimeSlot>>,
    next_id: u32,
    version: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::new()
    }
}

impl Schedule {
    pub fn new() -> Self {
        Schedule {
            slots: Vec::new(),
            next_id: 1,
            version: 0,
        }
    }

    /// Builds a schedule from explicit slots, kept in the given order.
    pub fn from_slots(slots: Vec<TimeSlot>) -> Result<Self> {
        let mut ids: Vec<SlotId> = slots.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invariant("duplicate slot id".into()));
        }
        if let Some(s) = slots.iter().find(|s| !s.duration.is_positive()) {
            return Err(Error::Invariant(format!("slot {} has non-positive duration", s.id)));
        }
        let next_id = ids.last().map_or(1, |id| id.0 + 1);
        Ok(Schedule {
            slots: slots.into_iter().map(Arc::new).collect(),
            next_id,
            version: 0,
        })
    }

    pub fn slots(&self) -> &[Arc<TimeSlot>] {
        &self.slots
    }

    pub fn slot_mut(&mut self, index: usize) -> Option<&mut TimeSlot> {
        self.slots.get_mut(index).map(Arc::make_mut)
    }

    pub fn slot(&self, id: SlotId) -> Option<&TimeSlot> {
        self.slots.iter().find(|s| s.id == id).map(|s| &**s)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn total_duration(&self) -> Rational {
        self.slots.iter().fold(Rational::zero(), |acc, s| acc + &s.duration)
    }

    /// Air time given to `from->to` across the frame.
    pub fn link_time(&self, key: (NodeId, NodeId)) -> Rational {
        self.slots
            .iter()
            .filter(|s| s.has_link(key))
            .fold(Rational::zero(), |acc, s| acc + &s.duration)
    }

    /// Executes `plan`, which must have been computed against this exact state.
    pub fn apply_plan(&mut self, plan: &AllocationPlan) -> Result<()> {
        if plan.base_version != self.version
            || plan.base_next_id != self.next_id
            || plan.base_slot_count != self.slots.len()
        {
            return Err(Error::StalePlan);
        }
        for split in &plan.splits {
            let idx = self.index_of(split.slot).ok_or(Error::StalePlan)?;
            if split.cut >= self.slots[idx].duration || split.new_slot.0 != self.next_id {
                return Err(Error::StalePlan);
            }
        }
        for (id, used) in &plan.reused {
            let slot = self.slot(*id).ok_or(Error::StalePlan)?;
            let split_here = plan.splits.iter().any(|s| s.slot == *id);
            if slot.has_link(plan.link.key()) || (!split_here && *used != slot.duration) {
                return Err(Error::StalePlan);
            }
        }

        for split in &plan.splits {
            let idx = self.index_of(split.slot).ok_or(Error::StalePlan)?;
            let old = Arc::make_mut(&mut self.slots[idx]);
            let rest = &old.duration - &split.cut;
            let keep_share = &split.cut / &old.duration;
            let rest_share = &rest / &old.duration;
            let moved: Vec<Allocation> = old
                .allocations
                .iter()
                .map(|a| Allocation {
                    from: a.from,
                    to: a.to,
                    flow: &a.flow * &rest_share,
                })
                .collect();
            for a in &mut old.allocations {
                a.flow = &a.flow * &keep_share;
            }
            old.duration = split.cut.clone();
            self.slots.push(Arc::new(TimeSlot {
                id: split.new_slot,
                duration: rest,
                allocations: moved,
            }));
            self.next_id += 1;
        }
        let link = &plan.link;
        for (id, used) in &plan.reused {
            let idx = self.index_of(*id).ok_or(Error::StalePlan)?;
            Arc::make_mut(&mut self.slots[idx]).allocations.push(Allocation {
                from: link.from,
                to: link.to,
                flow: &link.capacity * used,
            });
        }
        for (id, duration) in &plan.created {
            debug_assert_eq!(id.0, self.next_id);
            self.slots.push(Arc::new(TimeSlot {
                id: *id,
                duration: duration.clone(),
                allocations: vec![Allocation {
                    from: link.from,
                    to: link.to,
                    flow: &link.capacity * duration,
                }],
            }));
            self.next_id += 1;
        }
        self.version += 1;
        Ok(())
    }

    fn index_of(&self, id: SlotId) -> Option<usize> {
        self.slots.iter().position(|s| s.id == id)
    }

    /// One line per slot: `slot <id> <p/q> : <from>-><to>@<cap> ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for slot in &self.slots {
            out.push_str(&format!("slot {} {} :", slot.id, format_fraction(&slot.duration)));
            for a in &slot.allocations {
                out.push_str(&format!(" {}->{}@{}", a.from, a.to, &a.flow / &slot.duration));
            }
            out.push('\n');
        }
        out
    }

    /// Parses lines produced by [`Schedule::dump`]; other lines are an error.
    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut slots = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            slots.push(parse_slot_line(line)?);
        }
        Schedule::from_slots(slots)
    }
}

pub(crate) fn parse_slot_line(line: &str) -> Result<TimeSlot> {
    let bad = || Error::Parse(format!("bad slot line: {line}"));
    let (head, body) = line.split_once(':').ok_or_else(bad)?;
    let mut head = head.split_whitespace();
    if head.next() != Some("slot") {
        return Err(bad());
    }
    let id: u32 = head.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
    let duration = head.next().and_then(parse_rational).ok_or_else(bad)?;
    if head.next().is_some() {
        return Err(bad());
    }
    let mut allocations = Vec::new();
    for tok in body.split_whitespace() {
        let (arc, cap) = tok.split_once('@').ok_or_else(bad)?;
        let (from, to) = arc.split_once("->").ok_or_else(bad)?;
        let from: usize = from.parse().map_err(|_| bad())?;
        let to: usize = to.parse().map_err(|_| bad())?;
        let cap = parse_rational(cap).ok_or_else(bad)?;
        allocations.push(Allocation {
            from: NodeId(from),
            to: NodeId(to),
            flow: cap * &duration,
        });
    }
    Ok(TimeSlot {
        id: SlotId(id),
        duration,
        allocations,
    })
}

/// Plans `needed` seconds of air time for `link` by first-fit reuse of
/// existing slots in frame order.
///
/// Feasible slots are collected until their total reaches `needed`. With
/// none, one slot of `needed` is created. If the collected total overshoots,
/// the last collected slot is split at the exact remainder. Otherwise every
/// collected slot is used whole and the shortfall, if any, becomes a new
/// slot. The schedule itself is left untouched.
pub fn spatial_reuse(sched: &Schedule, g: &ConnectivityGraph, link: &Link, needed: &Rational) -> AllocationPlan {
    debug_assert!(needed.is_positive());
    let key = link.key();
    let mut collected: Vec<(SlotId, Rational)> = Vec::new();
    let mut available = Rational::zero();
    for slot in &sched.slots {
        if slot_feasible(g, slot, key) {
            available += &slot.duration;
            collected.push((slot.id, slot.duration.clone()));
            if &available >= needed {
                break;
            }
        }
    }

    let mut splits = Vec::new();
    let mut created = Vec::new();
    let mut delta = Rational::zero();
    if collected.is_empty() {
        created.push((SlotId(sched.next_id), needed.clone()));
        delta = needed.clone();
    } else if &available > needed {
        let excess = &available - needed;
        let last = collected.last_mut().expect("non-empty");
        let cut = &last.1 - &excess;
        splits.push(Split {
            slot: last.0,
            cut: cut.clone(),
            new_slot: SlotId(sched.next_id),
        });
        last.1 = cut;
    } else {
        let shortfall = needed - &available;
        if shortfall.is_positive() {
            created.push((SlotId(sched.next_id), shortfall.clone()));
            delta = shortfall;
        }
    }

    AllocationPlan {
        link: link.clone(),
        needed: needed.clone(),
        reused: collected,
        splits,
        created,
        delta,
        base_version: sched.version,
        base_next_id: sched.next_id,
        base_slot_count: sched.slots.len(),
    }
}
