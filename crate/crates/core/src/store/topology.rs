use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{LinkId, NodeId, Spectrum};
use crate::doc::SchemaViolation;
use crate::gn::{Element, GainLimit, LineControl, RoadmNode};

pub const TOPOLOGY_VERSION: u32 = 1;

/// Usable spectrum and flex-grid granularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Band {
    pub min_thz: f64,
    pub max_thz: f64,
    pub slot_width_ghz: f64,
}

impl Default for Band {
    fn default() -> Self {
        Band {
            min_thz: 191.3,
            max_thz: 196.1,
            slot_width_ghz: 6.25,
        }
    }
}

const ALIGN_EPS: f64 = 1e-6;

impl Band {
    pub fn slot_count(&self) -> u32 {
        ((self.max_thz - self.min_thz) * 1e3 / self.slot_width_ghz + ALIGN_EPS).floor() as u32
    }

    /// Slots needed by a channel of `baud_gbd`: `1.2·baud` rounded up to the grid.
    pub fn slots_for_baud(&self, baud_gbd: f64) -> u32 {
        (1.2 * baud_gbd / self.slot_width_ghz - ALIGN_EPS).ceil() as u32
    }

    pub fn spectrum(&self, first_slot: u32, slots: u32) -> Spectrum {
        let width_ghz = slots as f64 * self.slot_width_ghz;
        let start_ghz = first_slot as f64 * self.slot_width_ghz;
        Spectrum {
            center_thz: self.min_thz + (start_ghz + width_ghz / 2.0) / 1e3,
            width_ghz,
        }
    }

    /// `[first, first + count)` slot range of an aligned in-band spectrum.
    pub fn slot_range(&self, spectrum: &Spectrum) -> Result<(u32, u32), String> {
        let n = spectrum.width_ghz / self.slot_width_ghz;
        if !(n >= 1.0 - ALIGN_EPS) || (n - n.round()).abs() > ALIGN_EPS {
            return Err(format!(
                "width {} GHz is not a multiple of the {} GHz grid",
                spectrum.width_ghz, self.slot_width_ghz
            ));
        }
        let start = ((spectrum.center_thz - self.min_thz) * 1e3 - spectrum.width_ghz / 2.0) / self.slot_width_ghz;
        if (start - start.round()).abs() > ALIGN_EPS {
            return Err(format!("center {} THz is not grid-aligned", spectrum.center_thz));
        }
        let (first, count) = (start.round(), n.round());
        if first < 0.0 || first + count > self.slot_count() as f64 {
            return Err(format!("spectrum at {} THz outside the band", spectrum.center_thz));
        }
        Ok((first as u32, count as u32))
    }

    fn validate(&self) -> Result<(), String> {
        let (lo, hi) = crate::gn::SUPPORTED_BAND_THZ;
        if !(self.min_thz >= lo && self.max_thz <= hi && self.min_thz < self.max_thz) {
            return Err(format!("band must lie within [{lo}, {hi}] THz"));
        }
        if !(self.slot_width_ghz > 0.0) {
            return Err("slot width must be > 0".into());
        }
        Ok(())
    }
}

/// Transceiver location attached to a ROADM through an access link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TrxSite {
    pub id: NodeId,
    pub roadm: NodeId,
    pub access_loss_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Roadm(RoadmNode),
    TrxSite(TrxSite),
}

impl Node {
    pub fn id(&self) -> &str {
        match self {
            Node::Roadm(r) => &r.id,
            Node::TrxSite(t) => t.id.as_str(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LinkMode {
    /// Per-channel power held at the head ROADM set-point by the line system.
    Managed,
    /// Fixed amplifier gains; power depends on what the transceivers launch.
    Unmanaged,
}

/// Fiber pair between two ROADMs. Both directions share occupancy and are
/// evaluated over the `a → b` element chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Link {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    pub mode: LinkMode,
    pub operator_id: String,
    /// Fiber spans and amplifiers after the `a` ROADM.
    pub elements: Vec<Element>,
}

impl Link {
    pub fn length_km(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                Element::Fiber(f) => f.length_km,
                _ => 0.0,
            })
            .sum()
    }

    pub fn other_end(&self, node: &str) -> Option<&NodeId> {
        if self.a == node {
            Some(&self.b)
        } else if self.b == node {
            Some(&self.a)
        } else {
            None
        }
    }
}

fn default_version() -> u32 {
    TOPOLOGY_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Topology {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub band: Band,
    #[serde(default)]
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub links: Vec<Link>,
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            version: TOPOLOGY_VERSION,
            band: Band::default(),
            nodes: Vec::new(),
            links: Vec::new(),
        }
    }
}

impl Topology {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id() == id)
    }

    pub fn roadm(&self, id: &str) -> Option<&RoadmNode> {
        match self.node(id) {
            Some(Node::Roadm(r)) => Some(r),
            _ => None,
        }
    }

    pub fn roadms(&self) -> impl Iterator<Item = &RoadmNode> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Roadm(r) => Some(r),
            _ => None,
        })
    }

    pub fn link(&self, id: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn link_mut(&mut self, id: &str) -> Option<&mut Link> {
        self.links.iter_mut().find(|l| l.id == id)
    }

    /// ROADM an endpoint attaches to and the loss of its access link.
    pub fn attachment(&self, endpoint: &str) -> Option<(&RoadmNode, f64)> {
        match self.node(endpoint)? {
            Node::Roadm(r) => Some((r, 0.0)),
            Node::TrxSite(t) => self.roadm(t.roadm.as_str()).map(|r| (r, t.access_loss_db)),
        }
    }

    /// Element chain of a link, head ROADM first.
    pub fn chain(&self, link: &Link) -> Vec<Element> {
        let head = self.roadm(link.a.as_str()).expect("validated link endpoint");
        std::iter::once(Element::Roadm(head.clone()))
            .chain(link.elements.iter().cloned())
            .collect()
    }

    pub fn control(&self, link: &Link, gain_limit: GainLimit) -> LineControl {
        let control = match link.mode {
            LinkMode::Managed => {
                let head = self.roadm(link.a.as_str()).expect("validated link endpoint");
                LineControl::managed(head.target_per_channel_power_dbm)
            }
            LinkMode::Unmanaged => LineControl::unmanaged(),
        };
        control.with_gain_limit(gain_limit)
    }

    pub fn validate(&self) -> Result<(), SchemaViolation> {
        if self.version != TOPOLOGY_VERSION {
            return Err(SchemaViolation::new(
                "/version",
                format!("unsupported topology version {}", self.version),
            ));
        }
        self.band.validate().map_err(|m| SchemaViolation::new("/band", m))?;
        for (i, node) in self.nodes.iter().enumerate() {
            if self.nodes[..i].iter().any(|n| n.id() == node.id()) {
                return Err(SchemaViolation::new(
                    format!("/nodes/{i}/id"),
                    format!("duplicate node id {}", node.id()),
                ));
            }
            match node {
                Node::Roadm(r) => r
                    .validate()
                    .map_err(|e| SchemaViolation::new(format!("/nodes/{i}"), e.to_string()))?,
                Node::TrxSite(t) => {
                    if self.roadm(t.roadm.as_str()).is_none() {
                        return Err(SchemaViolation::new(
                            format!("/nodes/{i}/roadm"),
                            format!("trx site {} attaches to unknown ROADM {}", t.id, t.roadm),
                        ));
                    }
                    if !(t.access_loss_db >= 0.0) {
                        return Err(SchemaViolation::new(
                            format!("/nodes/{i}/access_loss_db"),
                            "access loss must be ≥ 0",
                        ));
                    }
                }
            }
        }
        for (i, link) in self.links.iter().enumerate() {
            if self.links[..i].iter().any(|l| l.id == link.id) {
                return Err(SchemaViolation::new(
                    format!("/links/{i}/id"),
                    format!("duplicate link id {}", link.id),
                ));
            }
            for (field, end) in [("a", &link.a), ("b", &link.b)] {
                if self.roadm(end.as_str()).is_none() {
                    return Err(SchemaViolation::new(
                        format!("/links/{i}/{field}"),
                        format!("link {} endpoint {end} is not a ROADM", link.id),
                    ));
                }
            }
            if link.a == link.b {
                return Err(SchemaViolation::new(
                    format!("/links/{i}/b"),
                    format!("link {} is a self-loop", link.id),
                ));
            }
            if link.length_km() <= 0.0 {
                return Err(SchemaViolation::new(
                    format!("/links/{i}/elements"),
                    format!("link {} has no fiber", link.id),
                ));
            }
            for (k, element) in link.elements.iter().enumerate() {
                let path = format!("/links/{i}/elements/{k}");
                if matches!(element, Element::Roadm(_)) {
                    return Err(SchemaViolation::new(path, "ROADMs are nodes, not link elements"));
                }
                element
                    .validate()
                    .map_err(|e| SchemaViolation::new(path, e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Issues that are legal but suspicious, such as back-to-back amplifiers.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for link in &self.links {
            for (k, pair) in link.elements.windows(2).enumerate() {
                if matches!(pair, [Element::Edfa(_), Element::Edfa(_)]) {
                    out.push(format!("link {}: adjacent amplifiers at elements {k} and {}", link.id, k + 1));
                }
            }
        }
        out
    }
}
