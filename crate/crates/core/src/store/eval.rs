use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Lightpath, LinkId, LpId, StoreError, Topology};
use crate::gn::{evaluate_link, Channel, ChannelPlan, GainLimit, LinkSnrBreakdown};
use crate::trx::TrxCatalog;
use crate::units::{inverse_sum, lin_to_db, watt_to_dbm};

/// Upper bound on fixed-point passes over the network.
const MAX_PASSES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    pub gain_limit: GainLimit,
}

impl EvalOptions {
    pub fn clamped() -> Self {
        EvalOptions {
            gain_limit: GainLimit::Clamp,
        }
    }
}

/// One route hop: the link and the channel's breakdown on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct HopQot {
    pub link: LinkId,
    pub breakdown: LinkSnrBreakdown,
}

impl HopQot {
    pub fn gsnr_db(&self) -> f64 {
        self.breakdown.gsnr_db()
    }
}

/// End-to-end QoT of one lightpath: per-hop breakdowns accumulated by
/// inverse sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct PathQot {
    pub lp_id: LpId,
    pub hops: Vec<HopQot>,
    /// Linear end-to-end GSNR.
    pub gsnr: f64,
    pub gsnr_db: f64,
    /// Power at the receiver after the drop ROADM and access link.
    pub rx_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkQot {
    pub paths: Vec<PathQot>,
}

impl NetworkQot {
    pub fn get(&self, id: &str) -> Option<&PathQot> {
        self.paths.iter().find(|p| p.lp_id == id)
    }
}

struct LinkLoad<'a> {
    link: &'a super::Link,
    /// (lightpath index, hop index) in lightpath order.
    users: Vec<(usize, usize)>,
}

/// Evaluates `lps` together: each link carries every listed lightpath
/// routed over it, launched at the power it had leaving the previous hop.
///
/// The per-hop launch powers are iterated to a bitwise fixed point, so the
/// result does not depend on link order.
pub fn evaluate_lightpaths(
    topology: &Topology,
    catalog: &TrxCatalog,
    lps: &[&Lightpath],
    options: EvalOptions,
) -> Result<NetworkQot, StoreError> {
    let mut trxs = Vec::with_capacity(lps.len());
    let mut launch: Vec<Vec<f64>> = Vec::with_capacity(lps.len());
    for lp in lps {
        let trx = catalog.get(&lp.trx)?;
        let (_, access) = topology
            .attachment(lp.src.as_str())
            .ok_or_else(|| StoreError::UnknownNode(lp.src.clone()))?;
        launch.push(vec![trx.tx_power_dbm - access; lp.route.len()]);
        trxs.push(trx);
    }

    let mut loads: Vec<LinkLoad> = Vec::new();
    for link in &topology.links {
        let users: Vec<(usize, usize)> = lps
            .iter()
            .enumerate()
            .filter_map(|(i, lp)| lp.route.iter().position(|l| *l == link.id).map(|h| (i, h)))
            .collect();
        if !users.is_empty() {
            loads.push(LinkLoad { link, users });
        }
    }
    for lp in lps {
        if let Some(missing) = lp.route.iter().find(|l| topology.link(l.as_str()).is_none()) {
            return Err(StoreError::UnknownLink(missing.clone()));
        }
    }

    let mut passes = 0;
    let evaluations = loop {
        passes += 1;
        let mut evaluations = Vec::with_capacity(loads.len());
        for load in &loads {
            let plan = ChannelPlan::new(
                load.users
                    .iter()
                    .map(|&(i, h)| {
                        Channel::new(lps[i].spectrum.center_thz, trxs[i].baud_gbd, launch[i][h])
                    })
                    .collect(),
            );
            let chain = topology.chain(load.link);
            let control = topology.control(load.link, options.gain_limit);
            evaluations.push(evaluate_link(&chain, &plan, control)?);
        }
        let mut changed = false;
        for (load, eval) in loads.iter().zip(&evaluations) {
            let out = eval.profile.output_w(eval.profile.boundaries() - 2);
            for (c, &(i, h)) in load.users.iter().enumerate() {
                if h + 1 < launch[i].len() {
                    let next = watt_to_dbm(out[c]);
                    if next.to_bits() != launch[i][h + 1].to_bits() {
                        launch[i][h + 1] = next;
                        changed = true;
                    }
                }
            }
        }
        if !changed || passes >= MAX_PASSES {
            break evaluations;
        }
    };

    let mut hops: Vec<Vec<Option<HopQot>>> = lps.iter().map(|lp| vec![None; lp.route.len()]).collect();
    let mut last_out_w = vec![0.0; lps.len()];
    for (load, eval) in loads.iter().zip(evaluations) {
        let out = eval.profile.output_w(eval.profile.boundaries() - 2).to_vec();
        for (breakdown, (c, &(i, h))) in eval.breakdowns.into_iter().zip(load.users.iter().enumerate()) {
            if h + 1 == lps[i].route.len() {
                last_out_w[i] = out[c];
            }
            hops[i][h] = Some(HopQot {
                link: load.link.id.clone(),
                breakdown,
            });
        }
    }

    let paths = lps
        .iter()
        .zip(hops)
        .zip(last_out_w)
        .map(|((lp, hops), out_w)| {
            let hops: Vec<HopQot> = hops.into_iter().map(|h| h.expect("every hop evaluated")).collect();
            let gsnr = inverse_sum(hops.iter().map(|h| h.breakdown.gsnr));
            let (drop, access) = topology.attachment(lp.dst.as_str()).expect("validated endpoint");
            PathQot {
                lp_id: lp.id.clone(),
                gsnr,
                gsnr_db: lin_to_db(gsnr),
                rx_power_dbm: watt_to_dbm(out_w) - drop.insertion_loss_db - access,
                hops,
            }
        })
        .collect();
    Ok(NetworkQot { paths })
}
