//! Near-duplicate detection via MinHash + LSH.
//!
//! Files are tokenized (lowercase, split on non-alphanumeric runs), shingled
//! into 5-token windows, and sketched with a 256-component MinHash. LSH
//! banding surfaces candidate pairs at a 0.7 Jaccard threshold with no
//! post-hoc verification; connected components over the pairs give the
//! duplicate clusters, and the smallest id in each cluster is kept.
//!
//! An exact mode (full pairwise Jaccard over shingle sets) exists for
//! oracle-grade ground truth at small scale.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::SourceFile;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DedupConfig {
    pub gram_size: usize,
    pub num_perm: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Replace LSH with brute-force exact Jaccard; ground truth for tests.
    pub exact: bool,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            gram_size: 5,
            num_perm: 256,
            threshold: 0.7,
            seed: 0,
            exact: false,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DedupError {
    #[error("signatures mix num_perm or seed values ({0} vs {1})")]
    MixedSignatures(String, String),
    #[error("num_perm must be at least 16, got {0}")]
    NumPermTooSmall(usize),
    #[error("duplicate file id {0:?}")]
    DuplicateId(String),
}

/// Deduplicated k-gram hashes over normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShingleSet {
    pub hashes: BTreeSet<u64>,
    pub k: usize,
}

impl ShingleSet {
    pub fn build(content: &str, k: usize) -> ShingleSet {
        let tokens = normalize_tokens(content);
        let mut hashes = BTreeSet::new();
        if tokens.len() >= k {
            for window in tokens.windows(k) {
                hashes.insert(shingle_hash(window));
            }
        }
        ShingleSet { hashes, k }
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    /// Exact Jaccard similarity; 0 when either set is empty.
    pub fn jaccard(&self, other: &ShingleSet) -> f64 {
        if self.hashes.is_empty() || other.hashes.is_empty() {
            return 0.0;
        }
        let intersection = self.hashes.intersection(&other.hashes).count();
        let union = self.hashes.len() + other.hashes.len() - intersection;
        intersection as f64 / union as f64
    }
}

fn normalize_tokens(content: &str) -> Vec<String> {
    content
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// FNV-1a over the window's tokens with a separator byte, so token
/// boundaries are part of the hash.
fn shingle_hash(window: &[String]) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut hash = FNV_OFFSET;
    for token in window {
        for &byte in token.as_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(FNV_PRIME);
        }
        hash ^= 0x1f;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// splitmix64 finalizer; a bijection on u64.
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58476d1ce4e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    z
}

fn component_seed(seed: u64, index: usize) -> u64 {
    mix64(seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHashSignature {
    pub minima: Vec<u64>,
    pub num_perm: usize,
    pub seed: u64,
}

impl MinHashSignature {
    /// Fraction of equal components; an unbiased estimate of Jaccard.
    pub fn equal_fraction(&self, other: &MinHashSignature) -> f64 {
        let equal = self
            .minima
            .iter()
            .zip(&other.minima)
            .filter(|(a, b)| a == b)
            .count();
        equal as f64 / self.num_perm as f64
    }
}

/// Sketch one shingle set. An empty set yields the sentinel signature of all
/// `u64::MAX` components; such files never enter the LSH index.
pub fn minhash_signature(
    shingles: &ShingleSet,
    num_perm: usize,
    seed: u64,
) -> Result<MinHashSignature, DedupError> {
    if num_perm < 16 {
        return Err(DedupError::NumPermTooSmall(num_perm));
    }
    let mut minima = vec![u64::MAX; num_perm];
    for &shingle in &shingles.hashes {
        for (i, slot) in minima.iter_mut().enumerate() {
            let h = mix64(shingle ^ component_seed(seed, i));
            if h < *slot {
                *slot = h;
            }
        }
    }
    Ok(MinHashSignature {
        minima,
        num_perm,
        seed,
    })
}

/// Convenience over a file's content with the configured gram size.
pub fn file_signature(
    file: &SourceFile,
    config: &DedupConfig,
) -> Result<MinHashSignature, DedupError> {
    minhash_signature(
        &ShingleSet::build(&file.content, config.gram_size),
        config.num_perm,
        config.seed,
    )
}

/// Split `num_perm` into b bands of r rows (b·r = num_perm), minimizing the
/// summed false-positive and false-negative area of the LSH S-curve around
/// the threshold.
pub fn optimal_band_split(num_perm: usize, threshold: f64) -> (usize, usize) {
    let mut best = (num_perm, 1);
    let mut best_error = f64::INFINITY;
    for bands in 1..=num_perm {
        if num_perm % bands != 0 {
            continue;
        }
        let rows = num_perm / bands;
        let error = fp_area(threshold, bands, rows) + fn_area(threshold, bands, rows);
        if error < best_error {
            best_error = error;
            best = (bands, rows);
        }
    }
    best
}

/// P(collide | similarity s) for b bands of r rows.
pub fn collision_probability(s: f64, bands: usize, rows: usize) -> f64 {
    1.0 - (1.0 - s.powi(rows as i32)).powi(bands as i32)
}

fn fp_area(threshold: f64, bands: usize, rows: usize) -> f64 {
    integrate(0.0, threshold, |s| collision_probability(s, bands, rows))
}

fn fn_area(threshold: f64, bands: usize, rows: usize) -> f64 {
    integrate(threshold, 1.0, |s| 1.0 - collision_probability(s, bands, rows))
}

fn integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const STEPS: usize = 2000;
    let width = (b - a) / STEPS as f64;
    (0..STEPS)
        .map(|i| f(a + (i as f64 + 0.5) * width) * width)
        .sum()
}

/// All id pairs colliding in at least one LSH band. No exact verification is
/// applied on top; the banding itself is the filter.
pub fn find_duplicate_pairs(
    signatures: &[(String, MinHashSignature)],
    threshold: f64,
) -> Result<BTreeSet<(String, String)>, DedupError> {
    let mut pairs = BTreeSet::new();
    let Some((_, first)) = signatures.first() else {
        return Ok(pairs);
    };
    for (id, sig) in signatures {
        if sig.num_perm != first.num_perm || sig.seed != first.seed {
            return Err(DedupError::MixedSignatures(
                format!("num_perm={} seed={}", first.num_perm, first.seed),
                format!("num_perm={} seed={} (id {id})", sig.num_perm, sig.seed),
            ));
        }
    }
    let (bands, rows) = optimal_band_split(first.num_perm, threshold);
    let mut buckets: HashMap<(usize, &[u64]), Vec<usize>> = HashMap::new();
    for (idx, (_, sig)) in signatures.iter().enumerate() {
        // Sentinel signatures (no shingles) carry no similarity evidence.
        if sig.minima.iter().all(|&m| m == u64::MAX) {
            continue;
        }
        for band in 0..bands {
            let slice = &sig.minima[band * rows..(band + 1) * rows];
            buckets.entry((band, slice)).or_default().push(idx);
        }
    }
    for ((_, _), members) in buckets {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let a = &signatures[members[i]].0;
                let b = &signatures[members[j]].0;
                let pair = if a < b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                };
                pairs.insert(pair);
            }
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateClusters {
    /// Each cluster sorted ascending; clusters sorted by representative.
    pub clusters: Vec<Vec<String>>,
    /// The smallest id of each cluster, kept in the output corpus.
    pub kept: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DedupReport {
    pub n_input: u64,
    pub n_kept: u64,
    pub n_removed: u64,
    pub removed_fraction: f64,
    pub n_clusters_with_duplicates: u64,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Near-deduplicate a corpus. Byte-identical files always land in one
/// cluster regardless of shingle content, so the kept set never holds two
/// identical files.
pub fn deduplicate(
    files: Vec<SourceFile>,
    config: &DedupConfig,
) -> Result<(Vec<SourceFile>, DuplicateClusters, DedupReport), DedupError> {
    let mut seen_ids = HashSet::new();
    for file in &files {
        if !seen_ids.insert(file.id.as_str()) {
            return Err(DedupError::DuplicateId(file.id.clone()));
        }
    }

    let shingles: Vec<ShingleSet> = files
        .iter()
        .map(|f| ShingleSet::build(&f.content, config.gram_size))
        .collect();

    let mut uf = UnionFind::new(files.len());

    // Exact-content pass: identical bytes are duplicates even when the
    // content is too short to shingle.
    let mut by_content: HashMap<&str, usize> = HashMap::new();
    for (idx, file) in files.iter().enumerate() {
        match by_content.entry(file.content.as_str()) {
            std::collections::hash_map::Entry::Occupied(first) => uf.union(*first.get(), idx),
            std::collections::hash_map::Entry::Vacant(slot) => {
                slot.insert(idx);
            }
        }
    }

    if config.exact {
        for i in 0..files.len() {
            for j in i + 1..files.len() {
                if !shingles[i].is_empty() && shingles[i].jaccard(&shingles[j]) >= config.threshold
                {
                    uf.union(i, j);
                }
            }
        }
    } else {
        let signatures: Vec<(String, MinHashSignature)> = files
            .iter()
            .zip(&shingles)
            .map(|(f, s)| {
                minhash_signature(s, config.num_perm, config.seed).map(|sig| (f.id.clone(), sig))
            })
            .collect::<Result<_, _>>()?;
        let index_of: HashMap<&str, usize> = files
            .iter()
            .enumerate()
            .map(|(i, f)| (f.id.as_str(), i))
            .collect();
        for (a, b) in find_duplicate_pairs(&signatures, config.threshold)? {
            uf.union(index_of[a.as_str()], index_of[b.as_str()]);
        }
    }

    // Gather clusters keyed by root, pick the smallest id as representative.
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for idx in 0..files.len() {
        let root = uf.find(idx);
        groups.entry(root).or_default().push(idx);
    }
    let mut clusters = Vec::with_capacity(groups.len());
    let mut kept_ids = Vec::with_capacity(groups.len());
    let mut duplicates = 0u64;
    for members in groups.into_values() {
        let mut ids: Vec<String> = members.iter().map(|&i| files[i].id.clone()).collect();
        ids.sort();
        if ids.len() > 1 {
            duplicates += 1;
        }
        kept_ids.push(ids[0].clone());
        clusters.push(ids);
    }
    clusters.sort_by(|a, b| a[0].cmp(&b[0]));
    kept_ids.sort();

    let kept_set: HashSet<&str> = kept_ids.iter().map(String::as_str).collect();
    let n_input = files.len() as u64;
    let kept_files: Vec<SourceFile> = files
        .into_iter()
        .filter(|f| kept_set.contains(f.id.as_str()))
        .collect();
    let n_kept = kept_files.len() as u64;
    let report = DedupReport {
        n_input,
        n_kept,
        n_removed: n_input - n_kept,
        removed_fraction: if n_input == 0 {
            0.0
        } else {
            (n_input - n_kept) as f64 / n_input as f64
        },
        n_clusters_with_duplicates: duplicates,
    };
    Ok((
        kept_files,
        DuplicateClusters {
            clusters,
            kept: kept_ids,
        },
        report,
    ))
}

/// The on-disk cluster report: `{clusters: [[ids]], kept: [ids],
/// removed_fraction}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub clusters: Vec<Vec<String>>,
    pub kept: Vec<String>,
    pub removed_fraction: f64,
}

impl ClusterReport {
    pub fn new(clusters: &DuplicateClusters, report: &DedupReport) -> ClusterReport {
        ClusterReport {
            clusters: clusters.clusters.clone(),
            kept: clusters.kept.clone(),
            removed_fraction: report.removed_fraction,
        }
    }
}

/// Binary signature cache: little-endian records of
/// `{id_len: u32, id bytes, seed: u64, num_perm: u32, minima: [u64]}`.
pub fn write_signature_cache(
    out: &mut impl std::io::Write,
    signatures: &[(String, MinHashSignature)],
) -> std::io::Result<()> {
    for (id, sig) in signatures {
        out.write_all(&(id.len() as u32).to_le_bytes())?;
        out.write_all(id.as_bytes())?;
        out.write_all(&sig.seed.to_le_bytes())?;
        out.write_all(&(sig.num_perm as u32).to_le_bytes())?;
        for &m in &sig.minima {
            out.write_all(&m.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_signature_cache(
    input: &mut impl std::io::Read,
) -> std::io::Result<Vec<(String, MinHashSignature)>> {
    use std::io::{Error, ErrorKind, Read};
    let mut out = Vec::new();
    loop {
        let mut len_buf = [0u8; 4];
        match input.read_exact(&mut len_buf) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e),
        }
        let id_len = u32::from_le_bytes(len_buf) as usize;
        let mut id_bytes = vec![0u8; id_len];
        input.read_exact(&mut id_bytes)?;
        let id = String::from_utf8(id_bytes)
            .map_err(|e| Error::new(ErrorKind::InvalidData, e.to_string()))?;
        let mut buf8 = [0u8; 8];
        input.read_exact(&mut buf8)?;
        let seed = u64::from_le_bytes(buf8);
        input.read_exact(&mut len_buf)?;
        let num_perm = u32::from_le_bytes(len_buf) as usize;
        let mut minima = Vec::with_capacity(num_perm);
        for _ in 0..num_perm {
            input.read_exact(&mut buf8)?;
            minima.push(u64::from_le_bytes(buf8));
        }
        out.push((
            id,
            MinHashSignature {
                minima,
                num_perm,
                seed,
            },
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    /// Fraction of flagged pairs whose exact Jaccard is below the threshold.
    pub fp_rate: Option<f64>,
    /// Fraction of truly-similar sampled pairs the flagging missed.
    pub fn_rate: Option<f64>,
}

/// Estimate LSH error rates from samples. `flagged_sample` is a uniform
/// sample of flagged pairs; `high_sim_sample` a uniform sample of pairs with
/// exact Jaccard at or above the threshold.
pub fn estimate_error_rates(
    flagged_sample: &[(String, String)],
    high_sim_sample: &[(String, String)],
    flagged: &BTreeSet<(String, String)>,
    shingles: &HashMap<String, ShingleSet>,
    threshold: f64,
) -> ErrorRates {
    let fp_rate = if flagged_sample.is_empty() {
        None
    } else {
        let below = flagged_sample
            .iter()
            .filter(|(a, b)| shingles[a].jaccard(&shingles[b]) < threshold)
            .count();
        Some(below as f64 / flagged_sample.len() as f64)
    };
    let fn_rate = if high_sim_sample.is_empty() {
        None
    } else {
        let missed = high_sim_sample
            .iter()
            .filter(|(a, b)| {
                let key = if a < b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                };
                !flagged.contains(&key)
            })
            .count();
        Some(missed as f64 / high_sim_sample.len() as f64)
    };
    ErrorRates { fp_rate, fn_rate }
}
