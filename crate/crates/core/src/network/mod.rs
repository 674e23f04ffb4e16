//! Network case model.
//!
//! A [`NetworkCase`] is immutable once built: every downstream computation
//! expresses outages and switching through a [`TopologyMask`] instead of
//! editing the case.

pub(crate) mod graph;
mod matpower;
pub mod testing;
mod validate;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use graph::{bridges, connected_components, is_connected, radial_branches, switchable_branches};
pub use matpower::{parse_case, serialize_case};
pub use validate::{validate_case, ValidationIssue, ValidationReport};

/// External bus number as it appears in the case file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

/// 1-based ordinal of a branch row in the case file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchId(pub usize);

/// 1-based ordinal of a generator row in the case file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenId(pub usize);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for GenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl BranchId {
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(index: usize) -> Self {
        BranchId(index + 1)
    }
}

impl GenId {
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(index: usize) -> Self {
        GenId(index + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusType {
    PQ,
    PV,
    Slack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub bus_type: BusType,
    /// MW
    pub active_load: f64,
    /// MVAR
    pub reactive_load: f64,
    /// MW consumed at 1 p.u. voltage
    pub shunt_conductance: f64,
    /// MVAR injected at 1 p.u. voltage
    pub shunt_susceptance: f64,
    pub base_kv: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_init: f64,
    /// degrees
    pub angle_init: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Line,
    Transformer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: BranchId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance, p.u.
    pub charging_susceptance: f64,
    /// Off-nominal turns ratio; 1.0 for lines.
    pub tap_ratio: f64,
    /// degrees
    pub phase_shift: f64,
    /// Long-term rating in MVA, 0 = unmonitored.
    pub rate_normal: f64,
    /// Short-term emergency rating in MVA, 0 = unmonitored.
    pub rate_emergency: f64,
    pub in_service: bool,
    pub kind: BranchKind,
}

impl Branch {
    /// Rating for the chosen tier; `None` when the branch is unmonitored.
    pub fn rating(&self, tier: RatingTier) -> Option<f64> {
        let rating = match tier {
            RatingTier::Normal => self.rate_normal,
            RatingTier::Emergency => self.rate_emergency,
        };
        (rating > 0.0).then_some(rating)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingTier {
    Normal,
    Emergency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: GenId,
    pub bus: BusId,
    /// MW
    pub p_set: f64,
    /// MVAR, used when the bus does not regulate voltage.
    pub q_set: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub v_set: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub in_service: bool,
}

/// Immutable electrical model of the system under study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkCase {
    name: String,
    base_mva: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    generators: Vec<Generator>,
    #[serde(skip)]
    bus_index: HashMap<BusId, usize>,
}

impl NetworkCase {
    /// Builds a case, checking id uniqueness and that every reference resolves.
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        generators: Vec<Generator>,
    ) -> Result<Self> {
        if !(base_mva > 0.0) {
            return Err(Error::Validation(format!("base MVA must be positive, got {base_mva}")));
        }
        let mut bus_index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            if bus_index.insert(bus.id, i).is_some() {
                return Err(Error::Validation(format!("duplicate bus id {}", bus.id)));
            }
        }
        for (i, br) in branches.iter().enumerate() {
            if br.id != BranchId::from_index(i) {
                return Err(Error::Validation(format!(
                    "branch at position {} carries id {}",
                    i + 1,
                    br.id
                )));
            }
            for bus in [br.from_bus, br.to_bus] {
                if !bus_index.contains_key(&bus) {
                    return Err(Error::Validation(format!(
                        "branch {} references unknown bus {bus}",
                        br.id
                    )));
                }
            }
            if br.from_bus == br.to_bus {
                return Err(Error::Validation(format!(
                    "branch {} connects bus {} to itself",
                    br.id, br.from_bus
                )));
            }
        }
        for (i, gen) in generators.iter().enumerate() {
            if gen.id != GenId::from_index(i) {
                return Err(Error::Validation(format!(
                    "generator at position {} carries id {}",
                    i + 1,
                    gen.id
                )));
            }
            if gen.in_service && !bus_index.contains_key(&gen.bus) {
                return Err(Error::Validation(format!(
                    "generator {} references unknown bus {}",
                    gen.id, gen.bus
                )));
            }
        }
        Ok(NetworkCase {
            name: name.into(),
            base_mva,
            buses,
            branches,
            generators,
            bus_index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Internal position of a bus.
    pub fn bus_position(&self, id: BusId) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    pub fn branch(&self, id: BranchId) -> Option<&Branch> {
        id.0.checked_sub(1).and_then(|i| self.branches.get(i))
    }

    pub fn generator(&self, id: GenId) -> Option<&Generator> {
        id.0.checked_sub(1).and_then(|i| self.generators.get(i))
    }

    /// Endpoint positions of a branch.
    pub fn branch_ends(&self, branch: &Branch) -> (usize, usize) {
        (self.bus_index[&branch.from_bus], self.bus_index[&branch.to_bus])
    }

    pub fn slack_buses(&self) -> impl Iterator<Item = &Bus> {
        self.buses.iter().filter(|b| b.bus_type == BusType::Slack)
    }

    /// In-service generators at a bus that survive the mask.
    pub fn generators_at<'a>(
        &'a self,
        bus: BusId,
        mask: &'a TopologyMask,
    ) -> impl Iterator<Item = &'a Generator> + 'a {
        self.generators
            .iter()
            .filter(move |g| g.bus == bus && g.in_service && !mask.removes_generator(g.id))
    }

    /// Whether a branch carries flow under the mask.
    pub fn branch_active(&self, branch: &Branch, mask: &TopologyMask) -> bool {
        branch.in_service && !mask.removes_branch(branch.id)
    }

    /// Decomposes the case so it can be edited and rebuilt with [`NetworkCase::new`].
    pub fn into_parts(self) -> (String, f64, Vec<Bus>, Vec<Branch>, Vec<Generator>) {
        (self.name, self.base_mva, self.buses, self.branches, self.generators)
    }

    /// Copy of the case with new ratings on the listed branches.
    pub fn with_ratings(&self, overrides: &[(BranchId, f64, f64)]) -> Result<Self> {
        let mut branches = self.branches.clone();
        for &(id, normal, emergency) in overrides {
            let br = id
                .0
                .checked_sub(1)
                .and_then(|i| branches.get_mut(i))
                .ok_or(Error::UnknownBranch(id))?;
            br.rate_normal = normal;
            br.rate_emergency = emergency;
        }
        NetworkCase::new(
            self.name.clone(),
            self.base_mva,
            self.buses.clone(),
            branches,
            self.generators.clone(),
        )
    }
}

impl<'de> Deserialize<'de> for NetworkCase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            name: String,
            base_mva: f64,
            buses: Vec<Bus>,
            branches: Vec<Branch>,
            generators: Vec<Generator>,
        }
        let raw = Raw::deserialize(deserializer)?;
        NetworkCase::new(raw.name, raw.base_mva, raw.buses, raw.branches, raw.generators)
            .map_err(serde::de::Error::custom)
    }
}

/// Elements removed from the case for one scenario.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologyMask {
    pub removed_branches: BTreeSet<BranchId>,
    pub removed_generators: BTreeSet<GenId>,
}

impl TopologyMask {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn branches(ids: impl IntoIterator<Item = BranchId>) -> Self {
        TopologyMask {
            removed_branches: ids.into_iter().collect(),
            removed_generators: BTreeSet::new(),
        }
    }

    pub fn generator(id: GenId) -> Self {
        TopologyMask {
            removed_branches: BTreeSet::new(),
            removed_generators: [id].into_iter().collect(),
        }
    }

    pub fn with_branch(&self, id: BranchId) -> Self {
        let mut next = self.clone();
        next.removed_branches.insert(id);
        next
    }

    pub fn removes_branch(&self, id: BranchId) -> bool {
        self.removed_branches.contains(&id)
    }

    pub fn removes_generator(&self, id: GenId) -> bool {
        self.removed_generators.contains(&id)
    }

    /// Checks that every referenced element exists in `case`.
    pub fn check(&self, case: &NetworkCase) -> Result<()> {
        if let Some(&id) = self.removed_branches.iter().find(|id| case.branch(**id).is_none()) {
            return Err(Error::UnknownBranch(id));
        }
        if let Some(id) = self
            .removed_generators
            .iter()
            .find(|id| case.generator(**id).is_none())
        {
            return Err(Error::Validation(format!("generator {id} is not defined in the case")));
        }
        Ok(())
    }
}
