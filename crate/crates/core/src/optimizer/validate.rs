use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use super::Solution;
use crate::graph::{ConnectivityGraph, NodeId};
use crate::rational::Rational;
use crate::schedule::SlotId;

/// How secondary interference is judged when validating a slot.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum InterferenceModel {
    /// Protocol model: a node joins at most one transmission and no other
    /// neighbor of a receiver may transmit, whoever it sends to.
    #[default]
    Protocol,
    /// Only what the constraint equations say verbatim: a sender does not
    /// receive, a receiver does not send and hears a single sender.
    LiteralEquations,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonPositiveDuration {
        slot: SlotId,
    },
    UnknownLink {
        slot: SlotId,
        from: NodeId,
        to: NodeId,
    },
    DuplicateAllocation {
        slot: SlotId,
        from: NodeId,
        to: NodeId,
    },
    FlowExceedsCapacity {
        slot: SlotId,
        from: NodeId,
        to: NodeId,
        flow: Rational,
        limit: Rational,
    },
    /// A node sends and receives in the same slot.
    SendAndReceive {
        slot: SlotId,
        node: NodeId,
    },
    /// A node sends on more than one link in the same slot.
    MultipleSends {
        slot: SlotId,
        node: NodeId,
    },
    /// `interferer` transmits next to `receiver` while `sender` is sending to it.
    ReceiverInterference {
        slot: SlotId,
        sender: NodeId,
        receiver: NodeId,
        interferer: NodeId,
    },
    /// Relay forwards a different amount than it receives over the frame.
    Conservation {
        node: NodeId,
        inflow: Rational,
        outflow: Rational,
    },
    SourceDestinationMismatch {
        sent: Rational,
        received: Rational,
    },
    ThroughputMismatch {
        reported: Rational,
        computed: Rational,
    },
    BottleneckMismatch {
        path: usize,
        reported: Rational,
        computed: Rational,
    },
    /// Air time on a link differs from what the paths through it require.
    LinkTimeMismatch {
        from: NodeId,
        to: NodeId,
        allocated: Rational,
        required: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NonPositiveDuration { slot } => write!(f, "slot {slot}: non-positive duration"),
            UnknownLink { slot, from, to } => write!(f, "slot {slot}: {from}->{to} is not a link"),
            DuplicateAllocation { slot, from, to } => write!(f, "slot {slot}: {from}->{to} allocated twice"),
            FlowExceedsCapacity {
                slot,
                from,
                to,
                flow,
                limit,
            } => {
                write!(f, "slot {slot}: flow {flow} on {from}->{to} exceeds {limit}")
            }
            SendAndReceive { slot, node } => write!(f, "slot {slot}: node {node} sends and receives"),
            MultipleSends { slot, node } => write!(f, "slot {slot}: node {node} sends on several links"),
            ReceiverInterference {
                slot,
                sender,
                receiver,
                interferer,
            } => write!(
                f,
                "slot {slot}: {interferer} transmits next to {receiver} while {sender}->{receiver} is active"
            ),
            Conservation { node, inflow, outflow } => {
                write!(f, "node {node}: receives {inflow} but forwards {outflow}")
            }
            SourceDestinationMismatch { sent, received } => {
                write!(f, "source sends {sent} but destination receives {received}")
            }
            ThroughputMismatch { reported, computed } => {
                write!(f, "reported throughput {reported} but frame delivers {computed}")
            }
            BottleneckMismatch {
                path,
                reported,
                computed,
            } => {
                write!(f, "p({path}): bottleneck {reported} but links give {computed}")
            }
            LinkTimeMismatch {
                from,
                to,
                allocated,
                required,
            } => {
                write!(f, "{from}->{to}: allocated {allocated} s, paths require {required} s")
            }
        }
    }
}

pub fn validate(sol: &Solution, g: &ConnectivityGraph) -> Vec<Violation> {
    validate_with(sol, g, InterferenceModel::Protocol)
}

/// Re-checks a solution from its raw slots and allocations.
pub fn validate_with(sol: &Solution, g: &ConnectivityGraph, model: InterferenceModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut inflow: BTreeMap<NodeId, Rational> = BTreeMap::new();
    let mut outflow: BTreeMap<NodeId, Rational> = BTreeMap::new();
    let mut link_time: BTreeMap<(NodeId, NodeId), Rational> = BTreeMap::new();

    for slot in sol.schedule.slots() {
        let id = slot.id;
        if !slot.duration.is_positive() {
            out.push(Violation::NonPositiveDuration { slot: id });
        }
        let mut sends: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut receives: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut seen = Vec::new();
        for a in &slot.allocations {
            if seen.contains(&a.key()) {
                out.push(Violation::DuplicateAllocation {
                    slot: id,
                    from: a.from,
                    to: a.to,
                });
            }
            seen.push(a.key());
            match g.capacity(a.from, a.to) {
                None => out.push(Violation::UnknownLink {
                    slot: id,
                    from: a.from,
                    to: a.to,
                }),
                Some(cap) => {
                    let limit = cap * &slot.duration;
                    if a.flow > limit {
                        out.push(Violation::FlowExceedsCapacity {
                            slot: id,
                            from: a.from,
                            to: a.to,
                            flow: a.flow.clone(),
                            limit,
                        });
                    }
                }
            }
            *sends.entry(a.from).or_default() += 1;
            receives.entry(a.to).or_default().push(a.from);
            *inflow.entry(a.to).or_insert_with(Rational::zero) += &a.flow;
            *outflow.entry(a.from).or_insert_with(Rational::zero) += &a.flow;
            *link_time.entry(a.key()).or_insert_with(Rational::zero) += &slot.duration;
        }

        for (&node, &count) in &sends {
            if receives.contains_key(&node) {
                out.push(Violation::SendAndReceive { slot: id, node });
            }
            if count > 1 && model == InterferenceModel::Protocol {
                out.push(Violation::MultipleSends { slot: id, node });
            }
        }
        for a in &slot.allocations {
            let interferers: Vec<NodeId> = match model {
                InterferenceModel::Protocol => sends
                    .keys()
                    .copied()
                    .filter(|&p| p != a.from && p != a.to && g.is_adjacent(p, a.to))
                    .collect(),
                InterferenceModel::LiteralEquations => {
                    receives[&a.to].iter().copied().filter(|&p| p != a.from).collect()
                }
            };
            for interferer in interferers {
                out.push(Violation::ReceiverInterference {
                    slot: id,
                    sender: a.from,
                    receiver: a.to,
                    interferer,
                });
            }
        }
    }

    let zero = Rational::zero();
    let touched: std::collections::BTreeSet<NodeId> = inflow.keys().chain(outflow.keys()).copied().collect();
    for node in touched {
        if node == sol.source || node == sol.destination {
            continue;
        }
        let i = inflow.get(&node).unwrap_or(&zero);
        let o = outflow.get(&node).unwrap_or(&zero);
        if i != o {
            out.push(Violation::Conservation {
                node,
                inflow: i.clone(),
                outflow: o.clone(),
            });
        }
    }
    let sent = outflow.get(&sol.source).unwrap_or(&zero).clone();
    let received = inflow.get(&sol.destination).unwrap_or(&zero).clone();
    if sent != received {
        out.push(Violation::SourceDestinationMismatch {
            sent,
            received: received.clone(),
        });
    }

    let total = sol.schedule.total_duration();
    let computed = if total.is_zero() {
        zero.clone()
    } else {
        &received / &total
    };
    if computed != sol.throughput {
        out.push(Violation::ThroughputMismatch {
            reported: sol.throughput.clone(),
            computed,
        });
    }
    let path_flow = sol.paths.iter().fold(Rational::zero(), |acc, p| acc + &p.bottleneck);
    if !sol.paths.is_empty() && path_flow != received {
        out.push(Violation::SourceDestinationMismatch {
            sent: path_flow,
            received,
        });
    }

    let mut required: BTreeMap<(NodeId, NodeId), Rational> = BTreeMap::new();
    for p in &sol.paths {
        let computed = p.links.iter().filter_map(|l| g.capacity(l.from, l.to)).min().cloned();
        if computed.as_ref() != Some(&p.bottleneck) {
            out.push(Violation::BottleneckMismatch {
                path: p.id,
                reported: p.bottleneck.clone(),
                computed: computed.unwrap_or_default(),
            });
        }
        for l in &p.links {
            if let Some(cap) = g.capacity(l.from, l.to) {
                *required.entry(l.key()).or_insert_with(Rational::zero) += &p.bottleneck / cap;
            }
        }
    }
    if !sol.paths.is_empty() {
        let keys: std::collections::BTreeSet<_> = required.keys().chain(link_time.keys()).copied().collect();
        for key in keys {
            let allocated = link_time.get(&key).unwrap_or(&zero);
            let need = required.get(&key).unwrap_or(&zero);
            if allocated != need {
                out.push(Violation::LinkTimeMismatch {
                    from: key.0,
                    to: key.1,
                    allocated: allocated.clone(),
                    required: need.clone(),
                });
            }
        }
    }
    out
}
