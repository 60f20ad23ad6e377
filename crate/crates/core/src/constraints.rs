//! Kinetic projectors and the sector decomposition of configuration space.
//!
//! `R_k` keeps the configurations whose excitation runs all have length `k`;
//! `S_k` is cumulative, keeping the vacuum and every `R_j` with `j ≤ k`.
//! Both are diagonal in the configuration basis and are stored as 0/1
//! vectors indexed by the integer encoding.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{classify, BasisConfig, SectorLabel};

/// Largest chain that is enumerated exhaustively.
pub const MAX_ENUMERATED_SITES: usize = 20;

fn check_k(k: usize, n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_ENUMERATED_SITES {
        return Err(Error::Capacity {
            what: "enumerated chain length",
            requested: n_sites,
            limit: MAX_ENUMERATED_SITES,
        });
    }
    if k == 0 || k > n_sites {
        return Err(Error::input(format!("k={k} out of range 1..={n_sites}")));
    }
    Ok(())
}

fn indicator(n_sites: usize, keep: impl Fn(SectorLabel) -> bool) -> Vec<u8> {
    BasisConfig::all(n_sites)
        .map(|c| keep(classify(&c)) as u8)
        .collect()
}

pub fn r_k_projector(k: usize, n_sites: usize) -> Result<Vec<u8>> {
    check_k(k, n_sites)?;
    Ok(indicator(n_sites, |l| l == SectorLabel::Uniform(k)))
}

pub fn s_k_projector(k: usize, n_sites: usize) -> Result<Vec<u8>> {
    check_k(k, n_sites)?;
    Ok(indicator(n_sites, |l| match l {
        SectorLabel::Vacuum => true,
        SectorLabel::Uniform(j) => j <= k,
        SectorLabel::Hybrid => false,
    }))
}

/// `S_0`: the vacuum alone.
pub fn vacuum_projector(n_sites: usize) -> Result<Vec<u8>> {
    check_k(1, n_sites)?;
    Ok(indicator(n_sites, |l| l == SectorLabel::Vacuum))
}

pub fn hybrid_projector(n_sites: usize) -> Result<Vec<u8>> {
    check_k(1, n_sites)?;
    Ok(indicator(n_sites, |l| l == SectorLabel::Hybrid))
}

/// Number of configurations in `Uniform(k)`, from the tiling recurrence.
///
/// `f(n)` counts length-`n` strings (vacuum included) whose runs all have
/// length `k`: either site 1 is ground, or it opens a `k`-block that is
/// followed by a ground site or the chain end.
pub fn sector_dimension(n_sites: usize, k: usize) -> u64 {
    if k == 0 || k > n_sites {
        return 0;
    }
    let mut f = vec![0u64; n_sites + 1];
    f[0] = 1;
    for n in 1..=n_sites {
        let block = match n.cmp(&k) {
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => f[n - k - 1],
        };
        f[n] = f[n - 1] + block;
    }
    f[n_sites] - 1
}

/// Number of configurations in `Uniform(k)`, by exhaustive enumeration.
pub fn sector_dimension_enumerated(n_sites: usize, k: usize) -> Result<u64> {
    check_k(k, n_sites)?;
    Ok(BasisConfig::all(n_sites)
        .filter(|c| classify(c) == SectorLabel::Uniform(k))
        .count() as u64)
}

/// Partition of all `2^N` configurations by [`SectorLabel`].
#[derive(Debug, Clone)]
pub struct SectorDecomposition {
    n_sites: usize,
    sectors: BTreeMap<SectorLabel, Vec<BasisConfig>>,
    labels: Vec<SectorLabel>,
}

pub fn decompose(n_sites: usize) -> Result<SectorDecomposition> {
    check_k(1, n_sites)?;
    let mut sectors: BTreeMap<SectorLabel, Vec<BasisConfig>> = BTreeMap::new();
    let mut labels = Vec::with_capacity(1 << n_sites);
    for c in BasisConfig::all(n_sites) {
        let label = classify(&c);
        labels.push(label);
        sectors.entry(label).or_default().push(c);
    }
    Ok(SectorDecomposition {
        n_sites,
        sectors,
        labels,
    })
}

impl SectorDecomposition {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label_of(&self, config: &BasisConfig) -> SectorLabel {
        self.labels[config.index()]
    }

    /// Labels indexed by configuration integer.
    pub fn labels(&self) -> &[SectorLabel] {
        &self.labels
    }

    /// Members of a sector in integer order; empty if the sector is empty.
    pub fn sector(&self, label: SectorLabel) -> &[BasisConfig] {
        self.sectors.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn sectors(&self) -> &BTreeMap<SectorLabel, Vec<BasisConfig>> {
        &self.sectors
    }

    /// Every label of an `N`-site chain, in output column order:
    /// vacuum, uniform 1..=N, hybrid.
    pub fn all_labels(&self) -> Vec<SectorLabel> {
        std::iter::once(SectorLabel::Vacuum)
            .chain((1..=self.n_sites).map(SectorLabel::Uniform))
            .chain(std::iter::once(SectorLabel::Hybrid))
            .collect()
    }

    pub fn hybrid_count(&self) -> usize {
        self.sector(SectorLabel::Hybrid).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(v: &[u8], s: &str) -> u8 {
        v[s.parse::<BasisConfig>().unwrap().index()]
    }

    #[test]
    fn projector_examples() {
        let r2 = r_k_projector(2, 5).unwrap();
        assert_eq!(at(&r2, "11011"), 1);
        assert_eq!(at(&r2, "11010"), 0);
        assert_eq!(at(&r2, "00000"), 0);

        assert_eq!(at(&s_k_projector(2, 5).unwrap(), "01010"), 1);
        assert_eq!(at(&s_k_projector(1, 5).unwrap(), "11000"), 0);

        let s5 = s_k_projector(5, 5).unwrap();
        for c in BasisConfig::all(5) {
            let expect = (classify(&c) != SectorLabel::Hybrid) as u8;
            assert_eq!(s5[c.index()], expect, "{c}");
        }
    }

    #[test]
    fn projector_range_errors() {
        assert!(r_k_projector(0, 5).is_err());
        assert!(r_k_projector(6, 5).is_err());
        assert!(s_k_projector(1, 21).is_err());
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(sector_dimension(5, 5), 1);
        assert_eq!(sector_dimension(5, 2), 5);
        assert_eq!(sector_dimension(5, 1), 12);
        assert_eq!(sector_dimension(5, 0), 0);
        assert_eq!(sector_dimension(5, 6), 0);
    }

    #[test]
    fn decompose_two_sites_by_hand() {
        let d = decompose(2).unwrap();
        let strs = |l| d.sector(l).iter().map(|c| c.to_string()).collect::<Vec<_>>();
        assert_eq!(strs(SectorLabel::Vacuum), ["00"]);
        assert_eq!(strs(SectorLabel::Uniform(1)), ["10", "01"]);
        assert_eq!(strs(SectorLabel::Uniform(2)), ["11"]);
        assert!(strs(SectorLabel::Hybrid).is_empty());
    }

    #[test]
    fn decompose_five_and_six() {
        let d = decompose(5).unwrap();
        assert_eq!(d.hybrid_count(), 8);
        let uniform: u64 = (1..=5).map(|k| sector_dimension(5, k)).sum();
        assert_eq!(d.hybrid_count() as u64, 32 - 1 - uniform);

        let d6 = decompose(6).unwrap();
        let u2 = d6.sector(SectorLabel::Uniform(2));
        assert_eq!(u2.len(), 8);
        let mut site_one: Vec<String> = u2
            .iter()
            .filter(|c| c.is_excited(0))
            .map(|c| c.to_string())
            .collect();
        site_one.sort();
        assert_eq!(site_one, ["110000", "110011", "110110"]);
    }

    #[test]
    fn decompose_bound() {
        assert!(matches!(decompose(21), Err(Error::Capacity { .. })));
    }
}
