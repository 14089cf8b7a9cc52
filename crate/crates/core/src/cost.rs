//! Architectural FPGA resource estimates.
//!
//! Counts are closed-form functions of the problem size and decoder
//! parameters. Every estimate keeps a per-component breakdown whose sums are
//! the totals.

use alloc::vec::Vec;

/// 36 Kb block RAM geometry: 36 bits wide, 1024 deep.
pub const BRAM_WIDTH: u64 = 36;
pub const BRAM_DEPTH: u64 = 1024;
/// 288 Kb UltraRAM geometry: 72 bits wide, 4096 deep.
pub const URAM_WIDTH: u64 = 72;
pub const URAM_DEPTH: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeviceProfile {
    pub name: alloc::string::String,
    pub ffs: u64,
    pub luts: u64,
    pub brams: u64,
    pub urams: u64,
}

impl DeviceProfile {
    pub fn vu19p() -> Self {
        Self { name: "VU19P".into(), ffs: 8_171_520, luts: 4_085_760, brams: 2_160, urams: 320 }
    }
}

impl Default for DeviceProfile {
    fn default() -> Self {
        Self::vu19p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Resources {
    pub ffs: u64,
    pub luts: u64,
    pub brams: u64,
    pub urams: u64,
}

impl Resources {
    pub fn ffs(ffs: u64) -> Self {
        Self { ffs, ..Self::default() }
    }

    fn plus(self, o: Resources) -> Resources {
        Resources { ffs: self.ffs + o.ffs, luts: self.luts + o.luts, brams: self.brams + o.brams, urams: self.urams + o.urams }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResourceEstimate {
    pub total: Resources,
    pub breakdown: Vec<(&'static str, Resources)>,
}

impl ResourceEstimate {
    fn push(&mut self, name: &'static str, r: Resources) {
        self.total = self.total.plus(r);
        self.breakdown.push((name, r));
    }

    pub fn component(&self, name: &str) -> Option<Resources> {
        self.breakdown.iter().find(|(n, _)| *n == name).map(|&(_, r)| r)
    }
}

/// Where the parity-check matrix is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HStorage {
    Bram(u64),
    Uram(u64),
}

pub fn h_storage_brams(m: u64, n: u64) -> u64 {
    m.div_ceil(BRAM_WIDTH) * n.div_ceil(BRAM_DEPTH)
}

pub fn h_storage_urams(m: u64, n: u64) -> u64 {
    m.div_ceil(URAM_WIDTH) * n.div_ceil(URAM_DEPTH)
}

/// Chooses BRAM unless the design's BRAM total would exceed the device.
pub fn choose_h_storage(m: u64, n: u64, other_brams: u64, profile: &DeviceProfile) -> HStorage {
    let b = h_storage_brams(m, n);
    if b + other_brams > profile.brams {
        HStorage::Uram(h_storage_urams(m, n))
    } else {
        HStorage::Bram(b)
    }
}

fn h_resources(s: HStorage) -> Resources {
    match s {
        HStorage::Bram(b) => Resources { brams: b, ..Resources::default() },
        HStorage::Uram(u) => Resources { urams: u, ..Resources::default() },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OsdParams {
    pub m: u64,
    pub n: u64,
    pub r_max: u64,
    pub banking: u64,
    pub zero_filter_blocks: u64,
}

impl OsdParams {
    pub fn new(m: u64, n: u64) -> Self {
        Self { m, n, r_max: 500, banking: 8, zero_filter_blocks: 9 }
    }
}

pub fn estimate_osd_resources(p: &OsdParams, profile: &DeviceProfile) -> ResourceEstimate {
    let llr = (p.banking * 32 * p.n).div_ceil(BRAM_WIDTH * BRAM_DEPTH) + 2;
    let zero = p.zero_filter_blocks;
    let others = llr + zero + 1;
    let mut e = ResourceEstimate::default();
    e.push("h_storage", h_resources(choose_h_storage(p.m, p.n, others, profile)));
    e.push("llr_store", Resources { brams: llr, ..Resources::default() });
    e.push("sorter", Resources { ffs: p.r_max * 48, luts: p.r_max * 16, ..Resources::default() });
    e.push("submatrix_store", Resources::ffs(p.m * p.r_max));
    e.push("zero_filter", Resources { luts: zero * p.r_max, brams: zero, ..Resources::default() });
    let w = p.r_max * (p.r_max + 1);
    e.push("solver", Resources { ffs: w, luts: 3 * w, ..Resources::default() });
    e.push("output", Resources { brams: 1, ..Resources::default() });
    e
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterParams {
    pub m: u64,
    pub n: u64,
    pub n_clus: u64,
    /// `(rows, cols)` per solver.
    pub solver_sizes: Vec<(u64, u64)>,
}

pub fn estimate_cluster_resources(p: &ClusterParams, profile: &DeviceProfile) -> ResourceEstimate {
    let k = p.m + p.n;
    let buckets = ((p.n / 4) * 16).div_ceil(BRAM_WIDTH * BRAM_DEPTH);
    let staging: u64 = p.solver_sizes.iter().map(|&(r, _)| r).sum();
    let mut e = ResourceEstimate::default();
    e.push("h_storage", h_resources(choose_h_storage(p.m, p.n, buckets + staging, profile)));
    e.push("cluster_store", Resources::ffs(p.n_clus * k));
    e.push("grow_merge", Resources { luts: 2 * k + k.div_ceil(6), ..Resources::default() });
    let (mut ffs, mut luts) = (0, 0);
    for &(r, c) in &p.solver_sizes {
        ffs += c * (c + 1) + r * c;
        luts += 3 * c * (c + 1);
    }
    e.push("solvers", Resources { ffs, luts, ..Resources::default() });
    e.push("index_buckets", Resources { brams: buckets, ..Resources::default() });
    e.push("intermediate_matrix", Resources { brams: staging, ..Resources::default() });
    e
}

/// Percent of each resource used.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Utilization {
    pub ffs: f64,
    pub luts: f64,
    pub brams: f64,
    pub urams: f64,
}

impl Utilization {
    pub fn rounded(&self) -> [u64; 4] {
        [self.ffs, self.luts, self.brams, self.urams].map(|x| libm::round(x) as u64)
    }
}

pub fn utilization(r: &Resources, profile: &DeviceProfile) -> Utilization {
    let pct = |a: u64, b: u64| 100.0 * a as f64 / b as f64;
    Utilization {
        ffs: pct(r.ffs, profile.ffs),
        luts: pct(r.luts, profile.luts),
        brams: pct(r.brams, profile.brams),
        urams: pct(r.urams, profile.urams),
    }
}

/// Published utilization percentages, FF/LUT/BRAM/URAM, for designs this
/// crate does not model.
pub const RELAY_GROSS_PERCENT: [f64; 4] = [7.0, 52.0, 1.0, 0.0];
pub const STANDARD_OSD_GROSS_PERCENT: [f64; 4] = [25.0, 39.0, 25.0, 0.0];

/// Reference percentages for the modelled designs, for comparison.
pub const FILTERED_OSD_GROSS_PERCENT: [f64; 4] = [9.0, 19.0, 14.0, 0.0];
pub const CLUSTER_GROSS_PERCENT: [f64; 4] = [9.0, 6.0, 25.0, 0.0];
pub const FILTERED_OSD_TWO_GROSS_PERCENT: [f64; 4] = [20.0, 19.0, 10.0, 83.0];
pub const CLUSTER_TWO_GROSS_PERCENT: [f64; 4] = [69.0, 88.0, 53.0, 83.0];
