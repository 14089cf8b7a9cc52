//! `resources.json` assembly.

use anyhow::{bail, Result};
use rtdec_core::cluster::UfConfig;
use rtdec_core::cost::{
    estimate_cluster_resources, estimate_osd_resources, utilization, ClusterParams, DeviceProfile, OsdParams,
    ResourceEstimate, Utilization, RELAY_GROSS_PERCENT, STANDARD_OSD_GROSS_PERCENT,
};
use serde::Serialize;

use crate::config::{ClusterSettings, OsdSettings};

/// Circuit-noise matrix sizes for which only dimensions are needed.
pub fn named_dimensions(name: &str) -> Option<(u64, u64)> {
    match name {
        "gross" => Some((936, 8784)),
        "two-gross" | "two_gross" => Some((2736, 26208)),
        _ => None,
    }
}

#[derive(Debug, Serialize)]
pub struct ResourceReport {
    pub decoder: String,
    pub m: u64,
    pub n: u64,
    pub device: DeviceProfile,
    /// Absent for designs whose figures are imported rather than modelled.
    pub estimate: Option<ResourceEstimate>,
    pub utilization_percent: Utilization,
    pub utilization_rounded: [u64; 4],
    pub imported: bool,
}

fn imported(decoder: &str, m: u64, n: u64, device: &DeviceProfile, pct: [f64; 4]) -> ResourceReport {
    let u = Utilization { ffs: pct[0], luts: pct[1], brams: pct[2], urams: pct[3] };
    ResourceReport {
        decoder: decoder.into(),
        m,
        n,
        device: device.clone(),
        estimate: None,
        utilization_percent: u,
        utilization_rounded: u.rounded(),
        imported: true,
    }
}

fn modelled(decoder: &str, m: u64, n: u64, device: &DeviceProfile, e: ResourceEstimate) -> ResourceReport {
    let u = utilization(&e.total, device);
    ResourceReport {
        decoder: decoder.into(),
        m,
        n,
        device: device.clone(),
        estimate: Some(e),
        utilization_percent: u,
        utilization_rounded: u.rounded(),
        imported: false,
    }
}

/// Cluster presets switch to the larger pool and solver set above 1000 checks.
pub fn default_cluster_settings(m: u64) -> ClusterSettings {
    let c = if m > 1000 { UfConfig::two_gross() } else { UfConfig::gross() };
    ClusterSettings { n_clus: c.n_clus, solver_sizes: c.solver_sizes, ..ClusterSettings::default() }
}

pub fn report(
    decoder: &str,
    m: u64,
    n: u64,
    device: &DeviceProfile,
    osd: &OsdSettings,
    cluster: &ClusterSettings,
) -> Result<ResourceReport> {
    Ok(match decoder {
        "filtered-osd" | "filtered_osd" => {
            let p = OsdParams {
                m,
                n,
                r_max: osd.r_max as u64,
                banking: osd.banking as u64,
                zero_filter_blocks: osd.zero_filter_blocks as u64,
            };
            modelled(decoder, m, n, device, estimate_osd_resources(&p, device))
        }
        "cluster" => {
            let p = ClusterParams {
                m,
                n,
                n_clus: cluster.n_clus as u64,
                solver_sizes: cluster.solver_sizes.iter().map(|&(r, c)| (r as u64, c as u64)).collect(),
            };
            modelled(decoder, m, n, device, estimate_cluster_resources(&p, device))
        }
        "relay" => imported(decoder, m, n, device, RELAY_GROSS_PERCENT),
        "standard-osd" | "standard_osd" => imported(decoder, m, n, device, STANDARD_OSD_GROSS_PERCENT),
        other => bail!("unknown decoder `{other}`; expected filtered-osd, cluster, relay or standard-osd"),
    })
}
