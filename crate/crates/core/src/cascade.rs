//! Finite realizations of the DSY cascade up to a time horizon.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::{sample_exponential, Branch, BranchSampler, RngStream};
use crate::specfun::Params;
use crate::vector::WaveVector;

/// Binary vertex address `v in {1, 2}*`; the root is the empty word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub Vec<u8>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, k: u8) -> Address {
        let mut v = self.0.clone();
        v.push(k);
        Address(v)
    }

    pub fn parent(&self) -> Option<Address> {
        if self.0.is_empty() {
            None
        } else {
            Some(Address(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// The prefix `v|j` of length `j`.
    pub fn prefix(&self, j: usize) -> Address {
        Address(self.0[..j].to_vec())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Address {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|b| match b {
                b'1' => Ok(1),
                b'2' => Ok(2),
                _ => Err(Error::domain(format!("address digits must be 1 or 2, got {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Address)
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Resource bounds for growing one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardConfig {
    pub max_nodes: usize,
    /// Maximum number of generations; the root is generation 1, so a node
    /// with address length `|v|` may branch only while `|v| + 1 < max_depth`.
    pub max_depth: usize,
}

impl Default for GuardConfig {
    fn default() -> Self {
        GuardConfig { max_nodes: 1 << 20, max_depth: 4096 }
    }
}

/// One vertex of a realized tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub addr: Address,
    #[serde(rename = "W")]
    pub w: WaveVector,
    /// Unit-exponential clock.
    #[serde(rename = "T")]
    pub t: f64,
    /// Holding time `|W|^{-2 gamma} T`.
    #[serde(rename = "Y")]
    pub y: f64,
    pub birth: f64,
    #[serde(skip)]
    pub norm: f64,
    #[serde(skip)]
    pub children: Option<[u32; 2]>,
    #[serde(skip)]
    pub parent: Option<u32>,
}

impl NodeRecord {
    pub fn death(&self) -> f64 {
        self.birth + self.y
    }
}

/// A finite realized cascade. Nodes are stored in breadth-first order, so
/// every child has a larger index than its parent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeTree {
    pub params: Params,
    pub xi: WaveVector,
    pub t: f64,
    pub guard: GuardConfig,
    pub nodes: Vec<NodeRecord>,
    pub guard_hit: bool,
}

/// The t-leaves and internal vertices of a tree, as node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCut {
    pub leaves: Vec<u32>,
    pub internal: Vec<u32>,
}

/// Where the exponential clocks and branchings of a tree come from.
pub trait DrawSource {
    fn unit_exponential(&mut self) -> Result<f64>;
    fn branch(&mut self, xi: &WaveVector) -> Result<(WaveVector, WaveVector)>;
}

/// Draws from a random stream.
pub struct RandomDraws<'a> {
    pub stream: &'a mut RngStream,
    pub sampler: &'a BranchSampler,
}

impl DrawSource for RandomDraws<'_> {
    fn unit_exponential(&mut self) -> Result<f64> {
        sample_exponential(self.stream, 1.0)
    }

    fn branch(&mut self, xi: &WaveVector) -> Result<(WaveVector, WaveVector)> {
        let Branch { w1, w2, .. } = self.sampler.sample(self.stream, xi)?;
        Ok((w1, w2))
    }
}

/// Prescribed draws, consumed in breadth-first order; used to reproduce
/// specific trees.
#[derive(Debug, Clone, Default)]
pub struct ScriptedDraws {
    pub clocks: VecDeque<f64>,
    pub branches: VecDeque<WaveVector>,
}

impl ScriptedDraws {
    /// `clocks` are unit-exponential values in node order; `first_children`
    /// are the `W_{v1}` of each branching node in order (`W_{v2}` follows by
    /// subtraction).
    pub fn new(clocks: Vec<f64>, first_children: Vec<WaveVector>) -> Self {
        ScriptedDraws { clocks: clocks.into(), branches: first_children.into() }
    }
}

impl DrawSource for ScriptedDraws {
    fn unit_exponential(&mut self) -> Result<f64> {
        self.clocks.pop_front().ok_or_else(|| Error::domain("scripted clocks exhausted"))
    }

    fn branch(&mut self, xi: &WaveVector) -> Result<(WaveVector, WaveVector)> {
        let w1 = self.branches.pop_front().ok_or_else(|| Error::domain("scripted branches exhausted"))?;
        let w2 = xi - &w1;
        Ok((w1, w2))
    }
}

fn check_inputs(p: &Params, xi: &WaveVector, t: f64) -> Result<()> {
    if xi.dim() != p.d {
        return Err(Error::domain(format!("expected a {}-vector, got dimension {}", p.d, xi.dim())));
    }
    if xi.is_zero() {
        return Err(Error::domain("the cascade needs a nonzero root wavevector"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("horizon must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// Grows a cascade from `xi` until every branch crosses `t` or a guard is reached.
pub fn grow(s: &mut RngStream, p: &Params, xi: &WaveVector, t: f64, guard: GuardConfig) -> Result<CascadeTree> {
    let sampler = BranchSampler::new(*p)?;
    grow_from(&mut RandomDraws { stream: s, sampler: &sampler }, p, xi, t, guard)
}

/// Breadth-first growth with an explicit frontier. Each node's clock is drawn
/// when the node is created, children in the order `v1, v2` right after the
/// branching of `v`.
pub fn grow_from<D: DrawSource>(
    draws: &mut D,
    p: &Params,
    xi: &WaveVector,
    t: f64,
    guard: GuardConfig,
) -> Result<CascadeTree> {
    check_inputs(p, xi, t)?;
    let two_gamma = 2.0 * p.gamma;
    let make = |draws: &mut D, addr: Address, w: WaveVector, birth: f64, parent: Option<u32>| -> Result<NodeRecord> {
        let clock = draws.unit_exponential()?;
        let norm = w.norm();
        let y = clock * norm.powf(-two_gamma);
        Ok(NodeRecord { addr, w, t: clock, y, birth, norm, children: None, parent })
    };
    let mut nodes = vec![make(draws, Address::root(), xi.clone(), 0.0, None)?];
    let mut frontier: VecDeque<u32> = VecDeque::from([0]);
    let mut guard_hit = false;
    while let Some(i) = frontier.pop_front() {
        let node = &nodes[i as usize];
        let death = node.death();
        if !(death < t) {
            continue;
        }
        if node.addr.len() + 1 >= guard.max_depth || nodes.len() + 2 > guard.max_nodes {
            guard_hit = true;
            break;
        }
        let (w1, w2) = draws.branch(&node.w)?;
        let addr = node.addr.clone();
        let base = nodes.len() as u32;
        let c1 = make(draws, addr.child(1), w1, death, Some(i))?;
        let c2 = make(draws, addr.child(2), w2, death, Some(i))?;
        nodes.push(c1);
        nodes.push(c2);
        nodes[i as usize].children = Some([base, base + 1]);
        frontier.push_back(base);
        frontier.push_back(base + 1);
    }
    Ok(CascadeTree { params: *p, xi: xi.clone(), t, guard, nodes, guard_hit })
}

/// Outcome of growing a tree without storing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthSummary {
    pub guard_hit: bool,
    pub nodes: usize,
    pub leaves: usize,
}

/// Same draws and the same guard decisions as [`grow`], keeping only the
/// frontier; used where only the explosion proxy is needed.
pub fn grow_summary(
    s: &mut RngStream,
    sampler: &BranchSampler,
    xi: &WaveVector,
    t: f64,
    guard: GuardConfig,
) -> Result<GrowthSummary> {
    let p = sampler.params();
    check_inputs(&p, xi, t)?;
    let two_gamma = 2.0 * p.gamma;
    let holding = |s: &mut RngStream, w: &WaveVector| -> Result<f64> {
        Ok(sample_exponential(s, 1.0)? * w.norm().powf(-two_gamma))
    };
    // (wavevector, death time, depth)
    let y0 = holding(s, xi)?;
    let mut frontier: VecDeque<(WaveVector, f64, usize)> = VecDeque::from([(xi.clone(), y0, 0)]);
    let mut nodes = 1usize;
    let mut leaves = 0usize;
    while let Some((w, death, depth)) = frontier.pop_front() {
        if !(death < t) {
            leaves += 1;
            continue;
        }
        if depth + 1 >= guard.max_depth || nodes + 2 > guard.max_nodes {
            return Ok(GrowthSummary { guard_hit: true, nodes, leaves });
        }
        let b = sampler.sample(s, &w)?;
        let d1 = death + holding(s, &b.w1)?;
        let d2 = death + holding(s, &b.w2)?;
        nodes += 2;
        frontier.push_back((b.w1, d1, depth + 1));
        frontier.push_back((b.w2, d2, depth + 1));
    }
    Ok(GrowthSummary { guard_hit: false, nodes, leaves })
}

impl CascadeTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &NodeRecord {
        &self.nodes[0]
    }

    pub fn root_is_leaf(&self) -> bool {
        self.nodes[0].children.is_none()
    }

    pub fn find(&self, addr: &Address) -> Option<&NodeRecord> {
        let mut i = 0u32;
        for &k in &addr.0 {
            i = self.nodes[i as usize].children?[(k - 1) as usize];
        }
        Some(&self.nodes[i as usize])
    }

    /// Depth (address length) of the deepest stored node.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.addr.len()).max().unwrap_or(0)
    }

    /// Birth time recomputed from the root along the address.
    pub fn birth_along_path(&self, addr: &Address) -> Option<f64> {
        let mut i = 0u32;
        let mut acc = 0.0;
        for &k in &addr.0 {
            let n = &self.nodes[i as usize];
            acc += n.y;
            i = n.children?[(k - 1) as usize];
        }
        Some(acc)
    }
}

/// Partitions the stored nodes at the horizon: `birth < t <= birth + Y` for
/// t-leaves, `birth + Y < t` for internal vertices. The root is a t-leaf at
/// `t = 0`.
pub fn cut(tree: &CascadeTree) -> TreeCut {
    let mut leaves = Vec::new();
    let mut internal = Vec::new();
    for (i, n) in tree.nodes.iter().enumerate() {
        if n.death() < tree.t {
            internal.push(i as u32);
        } else if n.birth < tree.t || i == 0 {
            leaves.push(i as u32);
        }
    }
    TreeCut { leaves, internal }
}

/// Finite-resource surrogate for explosion before the horizon: true when a
/// guard stopped the growth. Non-explosive trees that need more than the
/// guard allows are misclassified as explosive, never the reverse.
pub fn explosion_proxy(tree: &CascadeTree) -> bool {
    tree.guard_hit
}
