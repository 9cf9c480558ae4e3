//! The thirteen admissible migration topologies on three patches.
//!
//! An arc `j -> i` is present when the rate `m[i][j]` is allowed to be
//! nonzero. Arc sets are stored as 6-bit masks over the ordered pairs
//! `m12, m13, m21, m23, m31, m32` (bit 0 is `m12`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, ParamName};

/// `(into, from)` for each bit of an [`ArcSet`].
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];

/// The six relabelings of `{0, 1, 2}`, identity first. `perm[i]` is the new
/// label of patch `i`.
pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn pair_bit(into: usize, from: usize) -> u8 {
    let idx = PAIRS
        .iter()
        .position(|&p| p == (into, from))
        .expect("off-diagonal pair");
    1 << idx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcSet(u8);

impl ArcSet {
    pub const FULL: ArcSet = ArcSet(0b11_1111);

    pub fn from_bits(bits: u8) -> Self {
        ArcSet(bits & 0b11_1111)
    }

    pub fn bits(&self) -> u8 {
        self.0
    }

    /// Build from `(into, from)` pairs, zero-based.
    pub fn from_rates(rates: &[(usize, usize)]) -> Self {
        ArcSet(rates.iter().fold(0, |acc, &(i, j)| acc | pair_bit(i, j)))
    }

    /// Build from directed arcs `(from, to)`, zero-based.
    pub fn from_arcs(arcs: &[(usize, usize)]) -> Self {
        ArcSet(arcs.iter().fold(0, |acc, &(from, to)| acc | pair_bit(to, from)))
    }

    /// All `(into, from)` pairs with a present arc.
    pub fn rates(&self) -> Vec<(usize, usize)> {
        PAIRS
            .iter()
            .enumerate()
            .filter(|(b, _)| self.0 & (1 << b) != 0)
            .map(|(_, &p)| p)
            .collect()
    }

    pub fn has_rate(&self, into: usize, from: usize) -> bool {
        self.0 & pair_bit(into, from) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Relabel with `perm[i]` as the new name of patch `i`.
    pub fn permuted(&self, perm: [usize; 3]) -> ArcSet {
        ArcSet::from_rates(
            &self
                .rates()
                .into_iter()
                .map(|(i, j)| (perm[i], perm[j]))
                .collect::<Vec<_>>(),
        )
    }

    fn reach(&self) -> [[bool; 3]; 3] {
        let mut reach = [[false; 3]; 3];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for (into, from) in self.rates() {
            reach[from][into] = true;
        }
        for via in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    if reach[a][via] && reach[via][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
        reach
    }

    /// No isolated patch and the underlying undirected graph is connected.
    pub fn is_admissible(&self) -> bool {
        let mut undirected = *self;
        for (i, j) in self.rates() {
            undirected.0 |= pair_bit(j, i);
        }
        undirected.reach().iter().all(|row| row.iter().all(|&b| b))
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.reach().iter().all(|row| row.iter().all(|&b| b))
    }
}

impl fmt::Display for ArcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arcs: Vec<String> = self
            .rates()
            .into_iter()
            .map(|(i, j)| format!("{}->{}", j + 1, i + 1))
            .collect();
        write!(f, "{{{}}}", arcs.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyId {
    Full,
    Ex2,
    Hub0,
    Ex3,
    Ex7,
    Ex8,
    Ex1,
    Ex6,
    Ex2New,
    Ex7New,
    Chain,
    Converge,
    Diverge,
}

impl TopologyId {
    pub const ALL: [TopologyId; 13] = [
        TopologyId::Full,
        TopologyId::Ex2,
        TopologyId::Hub0,
        TopologyId::Ex3,
        TopologyId::Ex7,
        TopologyId::Ex8,
        TopologyId::Ex1,
        TopologyId::Ex6,
        TopologyId::Ex2New,
        TopologyId::Ex7New,
        TopologyId::Chain,
        TopologyId::Converge,
        TopologyId::Diverge,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            TopologyId::Full => "FULL",
            TopologyId::Ex2 => "EX2",
            TopologyId::Hub0 => "HUB0",
            TopologyId::Ex3 => "EX3",
            TopologyId::Ex7 => "EX7",
            TopologyId::Ex8 => "EX8",
            TopologyId::Ex1 => "EX1",
            TopologyId::Ex6 => "EX6",
            TopologyId::Ex2New => "EX2N",
            TopologyId::Ex7New => "EX7N",
            TopologyId::Chain => "CHAIN",
            TopologyId::Converge => "CONVERGE",
            TopologyId::Diverge => "DIVERGE",
        }
    }

    /// Rates forced to zero, as `(into, from)` pairs.
    pub fn zeroed(&self) -> &'static [(usize, usize)] {
        match self {
            TopologyId::Full => &[],
            TopologyId::Ex2 => &[(1, 2)],
            TopologyId::Hub0 => &[(1, 2), (2, 1)],
            TopologyId::Ex3 => &[(2, 0), (0, 1)],
            TopologyId::Ex7 => &[(1, 0), (1, 2)],
            TopologyId::Ex8 => &[(1, 0), (2, 0)],
            TopologyId::Ex1 => &[(2, 0), (0, 1), (1, 2)],
            TopologyId::Ex6 => &[(1, 0), (2, 0), (1, 2)],
            TopologyId::Ex2New => &[(0, 1), (1, 0), (2, 1)],
            TopologyId::Ex7New => &[(1, 0), (1, 2), (0, 1)],
            TopologyId::Chain => &[(0, 2), (2, 0), (0, 1), (1, 2)],
            TopologyId::Converge => &[(0, 2), (2, 0), (0, 1), (2, 1)],
            TopologyId::Diverge => &[(0, 2), (2, 0), (1, 0), (1, 2)],
        }
    }

    /// Representative arc set of the class.
    pub fn arcs(&self) -> ArcSet {
        let removed = ArcSet::from_rates(self.zeroed());
        ArcSet::from_bits(ArcSet::FULL.bits() & !removed.bits())
    }

    pub fn zeroed_names(&self) -> Vec<ParamName> {
        self.zeroed().iter().map(|&(i, j)| ParamName::M(i, j)).collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.arcs().is_strongly_connected()
    }
}

impl fmt::Display for TopologyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for TopologyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopologyId::ALL
            .iter()
            .find(|t| t.token() == s)
            .copied()
            .ok_or_else(|| Error::UnknownToken(s.to_string()))
    }
}

impl Serialize for TopologyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

impl<'de> Deserialize<'de> for TopologyId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn enumerate_canonical() -> Vec<(TopologyId, ArcSet)> {
    TopologyId::ALL.iter().map(|&t| (t, t.arcs())).collect()
}

/// Class of an admissible arc set, plus the relabeling that carries it onto
/// the class representative. Applying the same relabeling to a
/// [`ModelParams`] yields the model in the representative's numbering.
pub fn canonical_form(arcs: ArcSet) -> Result<(TopologyId, [usize; 3])> {
    if arcs.len() == 0 || !arcs.is_admissible() {
        return Err(Error::InadmissibleArcs(
            arcs.bits(),
            "a patch is isolated or the graph is disconnected",
        ));
    }
    for perm in PERMUTATIONS {
        let image = arcs.permuted(perm);
        if let Some(&t) = TopologyId::ALL.iter().find(|t| t.arcs() == image) {
            return Ok((t, perm));
        }
    }
    unreachable!("every admissible arc set belongs to one of the 13 classes")
}

/// Zero the rates absent from `topo`.
pub fn apply_topology(params: &ModelParams, topo: TopologyId) -> ModelParams {
    topo.zeroed()
        .iter()
        .fold(*params, |p, &(i, j)| p.with_rate(i, j, 0.0))
}

pub fn is_strongly_connected(arcs: ArcSet) -> bool {
    arcs.is_strongly_connected()
}

/// Topology class of the nonzero pattern of `params`' migration matrix.
pub fn topology_of(params: &ModelParams) -> Result<(TopologyId, [usize; 3])> {
    let present: Vec<_> = PAIRS
        .iter()
        .copied()
        .filter(|&(i, j)| params.rate(i, j) > 0.0)
        .collect();
    canonical_form(ArcSet::from_rates(&present))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirteen_distinct_representatives() {
        let all = enumerate_canonical();
        assert_eq!(all.len(), 13);
        for (i, (_, a)) in all.iter().enumerate() {
            assert!(a.is_admissible());
            for (_, b) in &all[i + 1..] {
                assert!(PERMUTATIONS.iter().all(|&p| a.permuted(p) != *b));
            }
        }
    }

    #[test]
    fn arc_counts_per_class() {
        let count = |n: usize| enumerate_canonical().iter().filter(|(_, a)| a.len() == n).count();
        assert_eq!(count(6), 1);
        assert_eq!(count(5), 1);
        assert_eq!(count(4), 4);
        assert_eq!(count(3), 4);
        assert_eq!(count(2), 3);
    }

    #[test]
    fn full_is_its_own_canonical_form() {
        assert_eq!(canonical_form(ArcSet::FULL).unwrap(), (TopologyId::Full, [0, 1, 2]));
    }

    #[test]
    fn aligned_path_is_chain() {
        let (t, _) = canonical_form(ArcSet::from_arcs(&[(0, 1), (1, 2)])).unwrap();
        assert_eq!(t, TopologyId::Chain);
        let (t, _) = canonical_form(ArcSet::from_arcs(&[(2, 0), (0, 1)])).unwrap();
        assert_eq!(t, TopologyId::Chain);
    }

    #[test]
    fn isolated_patch_rejected() {
        let both_ways_12 = ArcSet::from_arcs(&[(0, 1), (1, 0)]);
        assert!(matches!(canonical_form(both_ways_12), Err(Error::InadmissibleArcs(..))));
        assert!(canonical_form(ArcSet::from_bits(0)).is_err());
    }

    #[test]
    fn representative_rate_lists() {
        // EX7: m21 = m23 = 0; DIVERGE keeps only m12 and m32.
        let ex7 = TopologyId::Ex7.arcs();
        assert!(!ex7.has_rate(1, 0) && !ex7.has_rate(1, 2));
        assert_eq!(TopologyId::Diverge.arcs().rates(), vec![(0, 1), (2, 1)]);
        // EX1 is the directed cycle 1 -> 2 -> 3 -> 1.
        assert_eq!(TopologyId::Ex1.arcs(), ArcSet::from_arcs(&[(0, 1), (1, 2), (2, 0)]));
    }

    #[test]
    fn strong_connectivity() {
        assert!(is_strongly_connected(TopologyId::Full.arcs()));
        assert!(is_strongly_connected(TopologyId::Ex1.arcs()));
        assert!(!is_strongly_connected(TopologyId::Chain.arcs()));
    }

    #[test]
    fn apply_topology_zeroes_and_projects() {
        let mut m = [[0.5; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        let p = ModelParams::new([1.0; 3], [1.0; 3], m).unwrap();
        assert_eq!(apply_topology(&p, TopologyId::Full), p);
        let d = apply_topology(&p, TopologyId::Diverge);
        assert_eq!(d.m(), &[[0.0, 0.5, 0.0], [0.0, 0.0, 0.0], [0.0, 0.5, 0.0]]);
        let ex7 = apply_topology(&p, TopologyId::Ex7);
        assert_eq!(ex7.rate(1, 0), 0.0);
        assert_eq!(ex7.rate(1, 2), 0.0);
        assert_eq!(ex7.rate(0, 1), 0.5);
        assert_eq!(apply_topology(&ex7, TopologyId::Ex7), ex7);
    }

    #[test]
    fn tokens_round_trip() {
        for t in TopologyId::ALL {
            assert_eq!(t.token().parse::<TopologyId>().unwrap(), t);
        }
        assert!("EX9".parse::<TopologyId>().is_err());
    }
}
