//! Density matrices without matrix-valued training: clustering a word's context
//! vectors, or reducing externally produced contextual token vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{build_density, DensityMatrix, LinalgError};
use crate::vectors::WordVectors;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SenseError {
    #[error("`{0}` does not occur in the corpus")]
    NoOccurrences(String),
    #[error("no context vectors found for `{0}`")]
    NoContexts(String),
    #[error("clustering needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid cluster-count bounds [{min}, {max}]")]
    InvalidBounds { min: usize, max: usize },
    #[error("cannot reduce {dim}-dimensional vectors to {d_out} dimensions")]
    InvalidReduction { dim: usize, d_out: usize },
    #[error("no instances given")]
    Empty,
    #[error("instance dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type SenseResult<T> = std::result::Result<T, SenseError>;

/// How context instances are formed from a word's occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    /// One vector per distinct context word type.
    #[default]
    Types,
    /// One vector per occurrence: the mean of its context-word vectors.
    Occurrences,
}

impl std::str::FromStr for ContextMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "types" => Ok(ContextMode::Types),
            "occurrences" => Ok(ContextMode::Occurrences),
            other => Err(format!("unknown context mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextSet {
    pub word: String,
    pub instances: Vec<DVector<f64>>,
}

/// Gathers context vectors for `word` from tokenized sentences. Context words
/// without a vector are skipped.
pub fn collect_contexts(
    sentences: &[Vec<String>],
    vectors: &WordVectors,
    word: &str,
    window: usize,
    mode: ContextMode,
) -> SenseResult<ContextSet> {
    let mut occurs = false;
    let mut types = BTreeSet::new();
    let mut instances = Vec::new();
    for sentence in sentences {
        for (pos, token) in sentence.iter().enumerate() {
            if token != word {
                continue;
            }
            occurs = true;
            let lo = pos.saturating_sub(window);
            let hi = (pos + window + 1).min(sentence.len());
            let around = (lo..hi).filter(|&j| j != pos).map(|j| sentence[j].as_str());
            match mode {
                ContextMode::Types => types.extend(around.filter(|w| vectors.contains(w))),
                ContextMode::Occurrences => {
                    let mut sum = DVector::zeros(vectors.dim());
                    let mut n = 0usize;
                    for w in around {
                        if let Some(v) = vectors.get(w) {
                            sum += DVector::from_column_slice(v);
                            n += 1;
                        }
                    }
                    if n > 0 {
                        instances.push(sum / n as f64);
                    }
                }
            }
        }
    }
    if !occurs {
        return Err(SenseError::NoOccurrences(word.to_string()));
    }
    if mode == ContextMode::Types {
        instances = types
            .into_iter()
            .map(|w| vectors.vector(w).expect("filtered on presence"))
            .collect();
    }
    if instances.is_empty() {
        return Err(SenseError::NoContexts(word.to_string()));
    }
    Ok(ContextSet {
        word: word.to_string(),
        instances,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for KBounds {
    fn default() -> Self {
        Self { min: 2, max: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub centroid: DVector<f64>,
    pub size: usize,
    /// Indices into the input point list.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub k: usize,
    pub clusters: Vec<Cluster>,
    /// Merge heights of the full dendrogram, ascending.
    pub merge_distances: Vec<f64>,
}

/// Distances below this are round-off and snap to 0.
const ZERO_DISTANCE: f64 = 1e-12;

/// `1 − cos(a, b)`; a zero vector is at distance 1 from everything but another zero vector.
pub fn cosine_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    match (na > 0.0, nb > 0.0) {
        (false, false) => 0.0,
        (true, true) => {
            let d = (1.0 - a.dot(b) / (na * nb)).clamp(0.0, 2.0);
            if d < ZERO_DISTANCE {
                0.0
            } else {
                d
            }
        }
        _ => 1.0,
    }
}

/// Average-linkage agglomerative clustering under cosine distance, cut at the
/// `k` in `bounds` with the largest gap between consecutive merge heights
/// (gaps are measured relative to the final merge height; ties prefer smaller `k`).
///
/// Points are sorted lexicographically first, so the result does not depend on input order.
pub fn agglomerative_cluster(
    points: &[DVector<f64>],
    bounds: KBounds,
) -> SenseResult<ClusterResult> {
    let n = points.len();
    if bounds.min == 0 || bounds.min > bounds.max {
        return Err(SenseError::InvalidBounds {
            min: bounds.min,
            max: bounds.max,
        });
    }
    if n < 2 {
        return Err(SenseError::TooFewPoints(n));
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(SenseError::DimensionMismatch {
            expected: d,
            found: p.len(),
        });
    }
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(LinalgError::NonFinite.into());
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .iter()
            .zip(points[b].iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted: Vec<&DVector<f64>> = order.iter().map(|&i| &points[i]).collect();

    let mut merges = nn_chain_average(&sorted);
    merges.sort_by(|a, b| a.2.total_cmp(&b.2));
    let heights: Vec<f64> = merges.iter().map(|m| m.2).collect();
    let k = choose_k(&heights, n, bounds);

    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for &(a, b, _) in &merges[..n - k] {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        uf[ra.max(rb)] = ra.min(rb);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut uf, i);
        groups.entry(root).or_default().push(i);
    }
    let clusters = groups
        .into_values()
        .map(|members| {
            let mut centroid = DVector::zeros(d);
            for &i in &members {
                centroid += sorted[i];
            }
            centroid /= members.len() as f64;
            let mut original: Vec<usize> = members.iter().map(|&i| order[i]).collect();
            original.sort_unstable();
            Cluster {
                centroid,
                size: members.len(),
                members: original,
            }
        })
        .collect();
    Ok(ClusterResult {
        k,
        clusters,
        merge_distances: heights,
    })
}

/// Nearest-neighbour chain over average linkage. Returns `(a, b, height)`
/// merges where `a`, `b` are representative point indices.
fn nn_chain_average(points: &[&DVector<f64>]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = cosine_distance(points[i], points[j]);
            dist[i * n + j] = dij;
            dist[j * n + i] = dij;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut merges = Vec::with_capacity(n - 1);

    while merges.len() < n - 1 {
        if chain.is_empty() {
            chain.push(
                active
                    .iter()
                    .position(|&a| a)
                    .expect("an active cluster remains"),
            );
        }
        let a = *chain.last().expect("chain is nonempty");
        let prev = chain.len().checked_sub(2).map(|i| chain[i]);
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for b in (0..n).filter(|&b| active[b] && b != a) {
            let dab = dist[a * n + b];
            if dab < best_d || (dab == best_d && Some(b) == prev) {
                best = b;
                best_d = dab;
            }
        }
        if Some(best) == prev {
            chain.truncate(chain.len() - 2);
            let (keep, gone) = (a.min(best), a.max(best));
            let (sa, sb) = (size[keep] as f64, size[gone] as f64);
            for k in (0..n).filter(|&k| active[k] && k != keep && k != gone) {
                let merged = (sa * dist[keep * n + k] + sb * dist[gone * n + k]) / (sa + sb);
                dist[keep * n + k] = merged;
                dist[k * n + keep] = merged;
            }
            active[gone] = false;
            size[keep] += size[gone];
            merges.push((keep, gone, best_d));
        } else {
            chain.push(best);
        }
    }
    merges
}

fn choose_k(heights: &[f64], n: usize, bounds: KBounds) -> usize {
    let hi = bounds.max.min(n);
    let lo = bounds.min.min(hi);
    let top = heights.last().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return lo;
    }
    let mut best = (lo, f64::NEG_INFINITY);
    for k in lo..=hi {
        let applied = n - k;
        let last = if applied == 0 {
            0.0
        } else {
            heights[applied - 1]
        };
        let score = if applied < heights.len() {
            (heights[applied] - last) / top
        } else {
            0.0
        };
        if score > best.1 {
            best = (k, score);
        }
    }
    best.0
}

/// Clusters the context set and mixes the unit-normalized centroids with
/// weights equal to cluster sizes. A single instance yields its pure state.
pub fn context2dm(ctx: &ContextSet, bounds: KBounds) -> SenseResult<DensityMatrix> {
    match ctx.instances.len() {
        0 => Err(SenseError::NoContexts(ctx.word.clone())),
        1 => Ok(DensityMatrix::pure(&ctx.instances[0])?),
        _ => {
            let result = agglomerative_cluster(&ctx.instances, bounds)?;
            let items: Vec<(DVector<f64>, f64)> = result
                .clusters
                .iter()
                .map(|c| unit_or_zero(&c.centroid, c.size as f64))
                .collect();
            Ok(build_density(&items)?)
        }
    }
}

fn unit_or_zero(v: &DVector<f64>, weight: f64) -> (DVector<f64>, f64) {
    let norm = v.norm();
    if norm > 0.0 {
        (v / norm, weight)
    } else {
        (v.clone(), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceMethod {
    /// Mean-centred principal axes.
    #[default]
    Pca,
    /// Right singular vectors of the un-centred data.
    Svd,
}

impl std::str::FromStr for ReduceMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pca" => Ok(ReduceMethod::Pca),
            "svd" => Ok(ReduceMethod::Svd),
            other => Err(format!("unknown reduction method `{other}`")),
        }
    }
}

/// A fitted linear projection to `d_out` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Reducer {
    pub method: ReduceMethod,
    /// Subtracted before projecting; zero for SVD.
    pub mean: DVector<f64>,
    /// `input_dim × d_out`, orthonormal columns (zero columns when the data has too few instances).
    pub axes: DMatrix<f64>,
}

impl Reducer {
    pub fn fit(
        instances: &[DVector<f64>],
        method: ReduceMethod,
        d_out: usize,
    ) -> SenseResult<Self> {
        let first = instances.first().ok_or(SenseError::Empty)?;
        let dim = first.len();
        if d_out == 0 || d_out > dim {
            return Err(SenseError::InvalidReduction { dim, d_out });
        }
        if let Some(v) = instances.iter().find(|v| v.len() != dim) {
            return Err(SenseError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        if instances.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(LinalgError::NonFinite.into());
        }
        let n = instances.len();
        let mean = match method {
            ReduceMethod::Pca => {
                instances.iter().fold(DVector::zeros(dim), |acc, v| acc + v) / n as f64
            }
            ReduceMethod::Svd => DVector::zeros(dim),
        };
        let x = DMatrix::from_fn(n, dim, |i, j| instances[i][j] - mean[j]);
        let svd = x.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors were requested");
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&a, &b| {
            svd.singular_values[b]
                .total_cmp(&svd.singular_values[a])
                .then(a.cmp(&b))
        });

        let mut axes = DMatrix::zeros(dim, d_out);
        for (col, &i) in idx.iter().take(d_out).enumerate() {
            let mut axis = v_t.row(i).transpose();
            let lead =
                axis.iter().enumerate().fold(
                    0,
                    |best, (j, x)| if x.abs() > axis[best].abs() { j } else { best },
                );
            if axis[lead] < 0.0 {
                axis = -axis;
            }
            axes.set_column(col, &axis);
        }
        Ok(Self { method, mean, axes })
    }

    pub fn input_dim(&self) -> usize {
        self.axes.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.axes.ncols()
    }

    pub fn transform(&self, v: &DVector<f64>) -> SenseResult<DVector<f64>> {
        if v.len() != self.input_dim() {
            return Err(SenseError::DimensionMismatch {
                expected: self.input_dim(),
                found: v.len(),
            });
        }
        Ok(self.axes.tr_mul(&(v - &self.mean)))
    }
}

/// Fits a reducer on `instances` and projects them.
pub fn reduce_dimensions(
    instances: &[DVector<f64>],
    method: ReduceMethod,
    d_out: usize,
) -> SenseResult<Vec<DVector<f64>>> {
    let reducer = Reducer::fit(instances, method, d_out)?;
    instances.iter().map(|v| reducer.transform(v)).collect()
}

/// Reduces one word's contextual vectors with its own fitted reducer and
/// mixes the unit-normalized results uniformly.
pub fn contextual2dm(
    instances: &[DVector<f64>],
    method: ReduceMethod,
    d_out: usize,
) -> SenseResult<DensityMatrix> {
    let reducer = Reducer::fit(instances, method, d_out)?;
    contextual2dm_with(&reducer, instances)
}

/// As [`contextual2dm`], with a reducer shared across words so that all
/// matrices live in the same space.
pub fn contextual2dm_with(
    reducer: &Reducer,
    instances: &[DVector<f64>],
) -> SenseResult<DensityMatrix> {
    if instances.is_empty() {
        return Err(SenseError::Empty);
    }
    let items = instances
        .iter()
        .map(|v| reducer.transform(v).map(|r| unit_or_zero(&r, 1.0)))
        .collect::<SenseResult<Vec<_>>>()?;
    Ok(build_density(&items)?)
}

#[derive(Deserialize)]
struct InstanceLine {
    word: String,
    vector: Vec<f64>,
}

/// Reads contextual token vectors, one JSON object `{word, vector}` per line,
/// grouped by word. Words are lowercased like corpus tokens.
pub fn read_contextual(path: &Path) -> Result<BTreeMap<String, Vec<DVector<f64>>>> {
    let text = io::read_to_string(path)?;
    let mut out: BTreeMap<String, Vec<DVector<f64>>> = BTreeMap::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: InstanceLine =
            serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let d = *dim.get_or_insert(rec.vector.len());
        if rec.vector.len() != d || d == 0 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {d} values, found {}", rec.vector.len()),
            ));
        }
        let word = tokenize(&rec.word).join(" ");
        if word.is_empty() {
            return Err(Error::parse(path, i + 1, "empty word"));
        }
        out.entry(word)
            .or_default()
            .push(DVector::from_vec(rec.vector));
    }
    if out.is_empty() {
        return Err(Error::format(path, "no instances"));
    }
    Ok(out)
}
