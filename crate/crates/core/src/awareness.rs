//! Information layer: the structure of awareness afforded by a scenario's
//! wiring, and a check that every decision rule only relies on images the
//! wiring actually provides.
//!
//! The wiring maps onto words over the root process `T`, agent atoms `a_i` and
//! an optional controller atom `c`:
//!
//! | channel                                  | word        |
//! |------------------------------------------|-------------|
//! | the process itself                       | `T`         |
//! | agent `i` senses the process             | `T a_i`     |
//! | the controller senses the process        | `T c`       |
//! | agent `i` holds an image of agent `j`    | `T a_j a_i` |
//! | agent `i` receives controller messages   | `T c a_i`   |

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{Atom, Polynomial, Word};
use crate::regulatory::RuleKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AwarenessError {
    #[error("agent {agent}: commanded rule needs a controller, but none is declared")]
    NoController { agent: usize },
    #[error("{got} rules given for {expected} agents")]
    RuleCountMismatch { expected: usize, got: usize },
    #[error("agent {agent}: peer image of unknown agent {peer}")]
    UnknownPeer { agent: usize, peer: usize },
    #[error("per-agent wiring lists must all have one entry per agent")]
    RaggedWiring,
}

/// Who perceives what in a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AwarenessDecl {
    pub root: Atom,
    pub agent_atoms: Vec<Atom>,
    pub controller_atom: Option<Atom>,
    pub agent_senses_root: Vec<bool>,
    pub controller_senses_root: bool,
    /// For each agent, the agents (by index) whose policies it holds images of.
    pub peer_images: Vec<BTreeSet<usize>>,
    pub controller_channel: Vec<bool>,
}

fn default_root() -> Atom {
    Atom::new('T').expect("alphabetic")
}

fn agent_atom(i: usize) -> Atom {
    Atom::indexed('a', i as u32).expect("alphabetic")
}

fn controller_atom() -> Atom {
    Atom::new('c').expect("alphabetic")
}

impl AwarenessDecl {
    /// `n` agents named `a0 .. a{n-1}` over root `T`, with no channels at all.
    pub fn isolated(n: usize) -> Self {
        Self {
            root: default_root(),
            agent_atoms: (0..n).map(agent_atom).collect(),
            controller_atom: None,
            agent_senses_root: vec![false; n],
            controller_senses_root: false,
            peer_images: vec![BTreeSet::new(); n],
            controller_channel: vec![false; n],
        }
    }

    /// Every agent senses the process directly and nothing else.
    pub fn direct_sensing(n: usize) -> Self {
        Self {
            agent_senses_root: vec![true; n],
            ..Self::isolated(n)
        }
    }

    /// Direct sensing, plus every agent holds an image of every agent's policy,
    /// its own included.
    pub fn mutual_images(n: usize) -> Self {
        let everyone: BTreeSet<usize> = (0..n).collect();
        Self {
            peer_images: vec![everyone; n],
            ..Self::direct_sensing(n)
        }
    }

    /// Direct sensing, plus a controller `c` that senses the process and
    /// messages every agent.
    pub fn central_controller(n: usize) -> Self {
        Self {
            controller_atom: Some(controller_atom()),
            controller_senses_root: true,
            controller_channel: vec![true; n],
            ..Self::direct_sensing(n)
        }
    }

    pub fn agent_count(&self) -> usize {
        self.agent_atoms.len()
    }

    pub fn validate(&self) -> Result<(), AwarenessError> {
        let n = self.agent_count();
        if self.agent_senses_root.len() != n
            || self.peer_images.len() != n
            || self.controller_channel.len() != n
        {
            return Err(AwarenessError::RaggedWiring);
        }
        for (agent, peers) in self.peer_images.iter().enumerate() {
            if let Some(&peer) = peers.iter().find(|&&p| p >= n) {
                return Err(AwarenessError::UnknownPeer { agent, peer });
            }
        }
        Ok(())
    }

    /// The structure of awareness `Ω` afforded by this wiring. Controller
    /// channels are ignored when no controller atom is declared.
    pub fn derive_structure(&self) -> Polynomial {
        let root = Word::from(self.root);
        let mut omega = Polynomial::from(root.clone());
        for (i, &a) in self.agent_atoms.iter().enumerate() {
            if self.agent_senses_root.get(i).copied().unwrap_or(false) {
                omega.extend([Word::from_atoms([self.root, a])]);
            }
            if let Some(peers) = self.peer_images.get(i) {
                omega.extend(
                    peers
                        .iter()
                        .filter_map(|&j| self.agent_atoms.get(j))
                        .map(|&aj| Word::from_atoms([self.root, aj, a])),
                );
            }
            if let Some(c) = self.controller_atom {
                if self.controller_channel.get(i).copied().unwrap_or(false) {
                    omega.extend([Word::from_atoms([self.root, c, a])]);
                }
            }
        }
        if let (Some(c), true) = (self.controller_atom, self.controller_senses_root) {
            omega.extend([Word::from_atoms([self.root, c])]);
        }
        omega
    }

    /// Words agent `agent` needs in `Ω` to run a rule of kind `kind`.
    pub fn rule_requirements(
        &self,
        kind: RuleKind,
        agent: usize,
    ) -> Result<BTreeSet<Word>, AwarenessError> {
        let a = self.agent_atoms[agent];
        let root = self.root;
        Ok(match kind {
            RuleKind::PassiveCycle => BTreeSet::new(),
            RuleKind::ReactiveThreshold => BTreeSet::from([Word::from_atoms([root, a])]),
            RuleKind::ProbabilisticReactive => {
                let mut words = BTreeSet::from([Word::from_atoms([root, a])]);
                words.extend(
                    self.agent_atoms
                        .iter()
                        .map(|&aj| Word::from_atoms([root, aj, a])),
                );
                words
            }
            RuleKind::Commanded => {
                let c = self
                    .controller_atom
                    .ok_or(AwarenessError::NoController { agent })?;
                BTreeSet::from([Word::from_atoms([root, c, a])])
            }
        })
    }

    /// Every requirement of every agent's rule that the derived structure does
    /// not contain. An empty result means the scenario is awareness-consistent.
    pub fn validate_rules(&self, rules: &[RuleKind]) -> Result<Vec<Violation>, AwarenessError> {
        if rules.len() != self.agent_count() {
            return Err(AwarenessError::RuleCountMismatch {
                expected: self.agent_count(),
                got: rules.len(),
            });
        }
        let omega = self.derive_structure();
        let mut violations = Vec::new();
        for (agent, &rule) in rules.iter().enumerate() {
            for word in self.rule_requirements(rule, agent)? {
                if !omega.contains_word(&word) {
                    violations.push(Violation {
                        agent,
                        rule,
                        missing: word,
                    });
                }
            }
        }
        Ok(violations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub agent: usize,
    pub rule: RuleKind,
    pub missing: Word,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "agent {}: rule {} requires {} not present in structure of awareness",
            self.agent, self.rule, self.missing
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn selfish_wiring() {
        assert_eq!(
            AwarenessDecl::direct_sensing(3).derive_structure(),
            p("T(1+a0+a1+a2)")
        );
    }

    #[test]
    fn mutual_image_wiring() {
        assert_eq!(
            AwarenessDecl::mutual_images(2).derive_structure(),
            p("T(1+a0+a1+(a0+a1)a0+(a0+a1)a1)")
        );
    }

    #[test]
    fn controller_wiring() {
        assert_eq!(
            AwarenessDecl::central_controller(2).derive_structure(),
            p("T(1+c+a0+a1)+Tc(a0+a1)")
        );
    }

    #[test]
    fn requirements() {
        let decl = AwarenessDecl::central_controller(2);
        assert!(decl
            .rule_requirements(RuleKind::PassiveCycle, 0)
            .unwrap()
            .is_empty());
        let words: Vec<String> = decl
            .rule_requirements(RuleKind::ProbabilisticReactive, 1)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(words, ["Ta1", "Ta0a1", "Ta1a1"]);
        let words: Vec<String> = decl
            .rule_requirements(RuleKind::Commanded, 0)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(words, ["Tca0"]);
        assert_eq!(
            AwarenessDecl::direct_sensing(2).rule_requirements(RuleKind::Commanded, 1),
            Err(AwarenessError::NoController { agent: 1 })
        );
    }

    #[test]
    fn validation_outcomes() {
        let n = 3;
        let selfish = AwarenessDecl::direct_sensing(n);
        let reactive = vec![RuleKind::ReactiveThreshold; n];
        let probabilistic = vec![RuleKind::ProbabilisticReactive; n];
        assert!(selfish.validate_rules(&reactive).unwrap().is_empty());

        let v = selfish.validate_rules(&probabilistic).unwrap();
        assert_eq!(v.len(), n * n);
        assert_eq!(
            v[0].to_string(),
            "agent 0: rule probabilistic requires Ta0a0 not present in structure of awareness"
        );

        let controlled = AwarenessDecl::central_controller(n);
        assert!(controlled
            .validate_rules(&vec![RuleKind::Commanded; n])
            .unwrap()
            .is_empty());
        assert!(AwarenessDecl::mutual_images(n)
            .validate_rules(&probabilistic)
            .unwrap()
            .is_empty());
        assert_eq!(
            selfish.validate_rules(&reactive[..2]),
            Err(AwarenessError::RuleCountMismatch {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn isolated_reactive_agent_is_flagged() {
        let decl = AwarenessDecl::isolated(1);
        let v = decl.validate_rules(&[RuleKind::ReactiveThreshold]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].missing.to_string(), "Ta0");
    }

    #[test]
    fn wiring_checks() {
        let mut decl = AwarenessDecl::direct_sensing(2);
        decl.peer_images[0].insert(5);
        assert_eq!(
            decl.validate(),
            Err(AwarenessError::UnknownPeer { agent: 0, peer: 5 })
        );
        let mut decl = AwarenessDecl::direct_sensing(2);
        decl.controller_channel.pop();
        assert_eq!(decl.validate(), Err(AwarenessError::RaggedWiring));
    }
}
