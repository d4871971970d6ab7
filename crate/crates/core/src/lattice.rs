//! Finite rectangular windows of the cubic lattice, regions inside them, and
//! the boundary/buffer geometry used to separate a region from the rest.
//!
//! Sites are enumerated row-major over `dims` (the last coordinate varies
//! fastest). Distances are graph distances with open boundaries, i.e. the
//! ℓ1 distance between coordinates.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest window for which exact state vectors are supported.
pub const MAX_STATE_SITES: usize = 24;
/// Largest window accepted for pure geometry.
pub const MAX_WINDOW_SITES: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    dims: Vec<usize>,
}

impl Window {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidArgument(format!("window dimension must be 1..=3, got {}", dims.len())));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("window edge lengths must be positive".into()));
        }
        let count = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if count > MAX_WINDOW_SITES {
            return Err(Error::Capacity { what: "window sites", got: count, limit: MAX_WINDOW_SITES });
        }
        Ok(Self { dims: dims.to_vec() })
    }

    /// One-dimensional chain of `n` sites.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn site_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        let mut out = vec![0; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = rest % d;
            rest /= d;
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.dims.len() {
            return None;
        }
        let mut idx = 0;
        for (&c, &d) in coords.iter().zip(&self.dims) {
            if c >= d {
                return None;
            }
            idx = idx * d + c;
        }
        Some(idx)
    }

    pub fn distance(&self, u: usize, v: usize) -> usize {
        self.coords(u).iter().zip(self.coords(v)).map(|(&a, b)| a.abs_diff(b)).sum()
    }

    /// Nearest neighbours of a site inside the window.
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let c = self.coords(site);
        let mut out = Vec::with_capacity(2 * c.len());
        for k in 0..c.len() {
            if c[k] > 0 {
                let mut n = c.clone();
                n[k] -= 1;
                out.push(self.index(&n).expect("in range"));
            }
            if c[k] + 1 < self.dims[k] {
                let mut n = c.clone();
                n[k] += 1;
                out.push(self.index(&n).expect("in range"));
            }
        }
        out
    }

    /// Shift a site by an integer offset; `None` if the result leaves the window.
    pub fn translate(&self, site: usize, offset: &[i64]) -> Option<usize> {
        if offset.len() != self.dims.len() {
            return None;
        }
        let c = self.coords(site);
        let mut shifted = Vec::with_capacity(c.len());
        for ((&x, &o), &d) in c.iter().zip(offset).zip(&self.dims) {
            let y = x as i64 + o;
            if y < 0 || y >= d as i64 {
                return None;
            }
            shifted.push(y as usize);
        }
        self.index(&shifted)
    }

    pub fn full(&self) -> Region {
        Region { window: self.clone(), sites: (0..self.site_count()).collect() }
    }

    pub fn empty(&self) -> Region {
        Region { window: self.clone(), sites: Vec::new() }
    }

    pub fn region(&self, sites: impl IntoIterator<Item = usize>) -> Result<Region> {
        Region::new(self, sites)
    }

    /// Inclusive coordinate box `lo..=hi`.
    pub fn box_region(&self, lo: &[usize], hi: &[usize]) -> Result<Region> {
        if lo.len() != self.dims.len() || hi.len() != self.dims.len() {
            return Err(Error::InvalidArgument("box corners must match the window dimension".into()));
        }
        for k in 0..lo.len() {
            if lo[k] > hi[k] || hi[k] >= self.dims[k] {
                return Err(Error::InvalidArgument(format!(
                    "box axis {k} is [{}, {}] but the window edge is {}",
                    lo[k], hi[k], self.dims[k]
                )));
            }
        }
        let sites = (0..self.site_count()).filter(|&s| {
            let c = self.coords(s);
            (0..c.len()).all(|k| lo[k] <= c[k] && c[k] <= hi[k])
        });
        Region::new(self, sites)
    }
}

/// A set of sites of a window, kept sorted and duplicate free.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    window: Window,
    sites: Vec<usize>,
}

impl Region {
    pub fn new(window: &Window, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = sites.into_iter().collect();
        let count = window.site_count();
        if let Some(&bad) = set.iter().find(|&&s| s >= count) {
            return Err(Error::SiteOutOfRange { site: bad, count });
        }
        Ok(Self { window: window.clone(), sites: set.into_iter().collect() })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| !other.contains(s))
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        sites.sort_unstable();
        sites.dedup();
        Region { window: self.window.clone(), sites }
    }

    pub fn difference(&self, other: &Region) -> Region {
        let sites = self.sites.iter().copied().filter(|&s| !other.contains(s)).collect();
        Region { window: self.window.clone(), sites }
    }

    pub fn complement(&self) -> Region {
        self.window.full().difference(self)
    }

    /// Position of `site` within this region's sorted list.
    pub fn position(&self, site: usize) -> Option<usize> {
        self.sites.binary_search(&site).ok()
    }

    pub fn distance_to_site(&self, site: usize) -> Option<usize> {
        self.sites.iter().map(|&s| self.window.distance(s, site)).min()
    }

    pub fn distance_to(&self, other: &Region) -> Option<usize> {
        other.sites.iter().filter_map(|&s| self.distance_to_site(s)).min()
    }
}

/// `W = A ⊔ B ⊔ C`: a core region, its buffer, and the remainder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tripartition {
    pub a: Region,
    pub b: Region,
    pub c: Region,
}

impl Tripartition {
    /// Build from explicit parts; they must be pairwise disjoint and tile the window.
    pub fn new(a: Region, b: Region, c: Region) -> Result<Self> {
        if a.window() != b.window() || b.window() != c.window() {
            return Err(Error::RegionMismatch("tripartition parts live on different windows".into()));
        }
        if !a.is_disjoint(&b) || !a.is_disjoint(&c) || !b.is_disjoint(&c) {
            return Err(Error::Overlap("tripartition parts must be pairwise disjoint".into()));
        }
        if a.len() + b.len() + c.len() != a.window().site_count() {
            return Err(Error::InvalidArgument("tripartition parts must cover the window".into()));
        }
        Ok(Self { a, b, c })
    }

    /// `C` is taken as the complement of `A ∪ B`.
    pub fn from_core_and_buffer(a: Region, b: Region) -> Result<Self> {
        let c = a.union(&b).complement();
        Self::new(a, b, c)
    }

    pub fn window(&self) -> &Window {
        self.a.window()
    }
}

/// `∂A`: sites of `A` with a nearest neighbour outside `A`.
pub fn boundary(a: &Region) -> Result<Region> {
    if a.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let w = a.window();
    let sites = a.sites().iter().copied().filter(|&s| w.neighbors(s).into_iter().any(|n| !a.contains(n)));
    Region::new(w, sites)
}

/// Width-`l` buffer `B_l = {u ∉ A : d(u, A) ≤ l}` and the remainder.
pub fn buffer(a: &Region, width: usize) -> Result<Tripartition> {
    if a.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if width == 0 {
        return Err(Error::InvalidArgument("buffer width must be at least 1".into()));
    }
    let b = shell(a, width);
    Tripartition::from_core_and_buffer(a.clone(), b)
}

fn shell(a: &Region, width: usize) -> Region {
    let dist = distance_field(a);
    let w = a.window();
    let sites = (0..w.site_count()).filter(|&s| !a.contains(s) && dist[s] <= width);
    Region::new(w, sites).expect("sites come from the window")
}

/// Breadth-first distance from every site to `a` (usize::MAX when `a` is empty).
fn distance_field(a: &Region) -> Vec<usize> {
    let w = a.window();
    let mut dist = vec![usize::MAX; w.site_count()];
    let mut queue = std::collections::VecDeque::new();
    for &s in a.sites() {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(s) = queue.pop_front() {
        for n in w.neighbors(s) {
            if dist[n] == usize::MAX {
                dist[n] = dist[s] + 1;
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Two cores with their own disjoint width-`l` buffers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitBuffer {
    pub b1: Region,
    pub b2: Region,
    pub c: Region,
}

pub fn split_buffer(a1: &Region, a2: &Region, width: usize) -> Result<SplitBuffer> {
    if a1.is_empty() || a2.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if !a1.is_disjoint(a2) {
        return Err(Error::Overlap("cores of a split buffer must be disjoint".into()));
    }
    let distance = a1.distance_to(a2).expect("both nonempty");
    let required = 3 * width;
    if distance < required {
        return Err(Error::BuffersOverlap { distance, required });
    }
    let cores = a1.union(a2);
    let b1 = shell(a1, width).difference(&cores);
    let b2 = shell(a2, width).difference(&cores);
    if !b1.is_disjoint(&b2) {
        return Err(Error::BuffersOverlap { distance, required });
    }
    let c = cores.union(&b1).union(&b2).complement();
    Ok(SplitBuffer { b1, b2, c })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    pub boundary_size: usize,
    /// `L(A) = |A| / (c_d |∂A|)` with the measured `c_d`.
    pub length_scale: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    /// `(l, |B_l|)` for every scanned width.
    pub buffer_sizes: Vec<(usize, usize)>,
    pub is_regular: bool,
}

/// Measure the constants realizing `c l |∂A| ≤ |B_l| ≤ C l |∂A|`.
///
/// Widths are scanned over `1..=max(1, ⌈|A|/|∂A|⌉)`, i.e. the length scale
/// evaluated at unit lower constant; the reported `length_scale` then uses the
/// measured lower constant.
pub fn regularity_check(a: &Region) -> Result<RegularityReport> {
    if a.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if a.len() == a.window().site_count() {
        return Err(Error::NoBoundary);
    }
    let boundary_size = boundary(a)?.len();
    let dist = distance_field(a);
    let l_max = ((a.len() as f64 / boundary_size as f64).ceil() as usize).max(1);
    let mut buffer_sizes = Vec::with_capacity(l_max);
    let mut c_lower = f64::INFINITY;
    let mut c_upper = 0.0f64;
    for l in 1..=l_max {
        let size = dist.iter().filter(|&&d| d >= 1 && d <= l).count();
        let ratio = size as f64 / (l * boundary_size) as f64;
        c_lower = c_lower.min(ratio);
        c_upper = c_upper.max(ratio);
        buffer_sizes.push((l, size));
    }
    let is_regular = c_lower > 0.0;
    let length_scale = if is_regular { a.len() as f64 / (c_lower * boundary_size as f64) } else { 0.0 };
    Ok(RegularityReport { boundary_size, length_scale, c_lower, c_upper, buffer_sizes, is_regular })
}

/// Region description as it appears in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionSpec {
    Box { lo: Vec<usize>, hi: Vec<usize> },
    Sites(Vec<usize>),
}

impl RegionSpec {
    pub fn resolve(&self, window: &Window) -> Result<Region> {
        match self {
            RegionSpec::Box { lo, hi } => window.box_region(lo, hi),
            RegionSpec::Sites(sites) => window.region(sites.iter().copied()),
        }
    }
}
