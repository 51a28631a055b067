//! Pairwise analysis over a dataset: distance matrices, k-nearest-neighbor
//! retrieval, and rank-based accuracy against a ground-truth matrix.

use std::collections::HashSet;
use std::io::Write;

use thiserror::Error;

use crate::baselines::{
    hausdorff_points, lcss_distance_points, positions, BaselineError, LcssParams,
};
use crate::dataset::DatasetError;
use crate::fov::ApproxMethod;
use crate::lcvs::{distance_prepared, prepare_video, GeoVideo, PreparedVideo};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {need} videos, got {got}")]
    NotEnoughVideos { need: usize, got: usize },
    #[error("duplicate video id {0:?}")]
    DuplicateId(String),
    #[error("unknown video id {0:?}")]
    UnknownId(String),
    #[error("k must satisfy 1 <= k < {n}, got {k}")]
    InvalidK { k: usize, n: usize },
    #[error("matrices cover different video ids")]
    IdMismatch,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("thread pool: {0}")]
    Parallel(String),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which distance runs over the dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    LcvsMbs { segment_angle: f64, sigma: u32 },
    LcvsMbt { sigma: u32 },
    LcvsMbr { sigma: u32 },
    LcvsOracle { sigma: u32 },
    Lcss { epsilon: f64, sigma: u32 },
    Hausdorff,
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::LcvsMbs { .. } => "lcvs-mbs",
            MethodSpec::LcvsMbt { .. } => "lcvs-mbt",
            MethodSpec::LcvsMbr { .. } => "lcvs-mbr",
            MethodSpec::LcvsOracle { .. } => "lcvs-oracle",
            MethodSpec::Lcss { .. } => "lcss",
            MethodSpec::Hausdorff => "hausdorff",
        }
    }

    /// Whether the distance lives in `[0, 1]` (Hausdorff is raw meters).
    pub fn is_normalized(&self) -> bool {
        !matches!(self, MethodSpec::Hausdorff)
    }

    fn approx(&self) -> Option<(ApproxMethod, u32)> {
        match *self {
            MethodSpec::LcvsMbs {
                segment_angle,
                sigma,
            } => Some((ApproxMethod::Mbs { segment_angle }, sigma)),
            MethodSpec::LcvsMbt { sigma } => Some((ApproxMethod::Mbt, sigma)),
            MethodSpec::LcvsMbr { sigma } => Some((ApproxMethod::Mbr, sigma)),
            MethodSpec::LcvsOracle { sigma } => Some((ApproxMethod::Oracle, sigma)),
            _ => None,
        }
    }
}

impl std::fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense symmetric distance matrix over an ordered id list.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
    normalized: bool,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn id_index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// CSV with ids on the first row and column; cell (i, j) is the
    /// distance.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "id")?;
        for id in &self.ids {
            write!(w, ",{id}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(w, "{}", self.ids[i])?;
            for j in 0..self.len() {
                write!(w, ",{}", self.get(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

enum PairEvaluator {
    Lcvs {
        prepared: Vec<PreparedVideo>,
        sigma: u32,
    },
    Lcss {
        points: Vec<Vec<crate::geom::Point>>,
        params: LcssParams,
    },
    Hausdorff {
        points: Vec<Vec<crate::geom::Point>>,
    },
}

impl PairEvaluator {
    fn build(videos: &[GeoVideo], spec: &MethodSpec) -> Self {
        if let Some((method, sigma)) = spec.approx() {
            PairEvaluator::Lcvs {
                prepared: videos.iter().map(|v| prepare_video(v, method)).collect(),
                sigma,
            }
        } else if let MethodSpec::Lcss { epsilon, sigma } = *spec {
            PairEvaluator::Lcss {
                points: videos.iter().map(positions).collect(),
                params: LcssParams { epsilon, sigma },
            }
        } else {
            PairEvaluator::Hausdorff {
                points: videos.iter().map(positions).collect(),
            }
        }
    }

    fn distance(&self, i: usize, j: usize) -> Result<f64, AnalysisError> {
        match self {
            PairEvaluator::Lcvs { prepared, sigma } => {
                Ok(distance_prepared(&prepared[i], &prepared[j], *sigma))
            }
            PairEvaluator::Lcss { points, params } => {
                Ok(lcss_distance_points(&points[i], &points[j], params))
            }
            PairEvaluator::Hausdorff { points } => Ok(hausdorff_points(&points[i], &points[j])?),
        }
    }
}

/// Computes every unordered pair (diagonal included) and mirrors the result.
///
/// Results are written by pair index, so the matrix is identical for any
/// thread count; `threads = 1` runs fully serial and is the timing mode.
pub fn distance_matrix(
    videos: &[GeoVideo],
    spec: &MethodSpec,
    threads: usize,
) -> Result<DistanceMatrix, AnalysisError> {
    let n = videos.len();
    if n < 2 {
        return Err(AnalysisError::NotEnoughVideos { need: 2, got: n });
    }
    let mut seen = HashSet::new();
    for v in videos {
        if !seen.insert(v.id()) {
            return Err(AnalysisError::DuplicateId(v.id().to_string()));
        }
    }

    let evaluator = PairEvaluator::build(videos, spec);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();

    let results: Vec<f64> = if threads <= 1 {
        let mut out = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            out.push(evaluator.distance(i, j)?);
        }
        out
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| AnalysisError::Parallel(e.to_string()))?;
        pool.install(|| {
            pairs
                .par_iter()
                .map(|&(i, j)| evaluator.distance(i, j))
                .collect::<Result<Vec<f64>, AnalysisError>>()
        })?
    };

    let mut values = vec![0.0f64; n * n];
    for (&(i, j), &d) in pairs.iter().zip(results.iter()) {
        values[i * n + j] = d;
        values[j * n + i] = d;
    }
    Ok(DistanceMatrix {
        ids: videos.iter().map(|v| v.id().to_string()).collect(),
        values,
        normalized: spec.is_normalized(),
    })
}

/// The `k` nearest ids to `query_id`, self excluded; distance ties break by
/// ascending id.
pub fn knn(
    matrix: &DistanceMatrix,
    query_id: &str,
    k: usize,
) -> Result<Vec<String>, AnalysisError> {
    let n = matrix.len();
    let qi = matrix
        .id_index(query_id)
        .ok_or_else(|| AnalysisError::UnknownId(query_id.to_string()))?;
    if k == 0 || k >= n {
        return Err(AnalysisError::InvalidK { k, n });
    }
    let mut neighbors: Vec<(f64, &str)> = (0..n)
        .filter(|&j| j != qi)
        .map(|j| (matrix.get(qi, j), matrix.ids[j].as_str()))
        .collect();
    neighbors.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    Ok(neighbors
        .into_iter()
        .take(k)
        .map(|(_, id)| id.to_string())
        .collect())
}

/// Mean precision@k of `method` against `oracle`: for each video, the
/// fraction of its k nearest (by the method) that the oracle also ranks in
/// the top k. 1.0 when both matrices induce identical top-k sets.
pub fn accuracy_eval(
    method: &DistanceMatrix,
    oracle: &DistanceMatrix,
    k: usize,
) -> Result<f64, AnalysisError> {
    if method.ids != oracle.ids {
        return Err(AnalysisError::IdMismatch);
    }
    let n = method.len();
    if k == 0 || k >= n {
        return Err(AnalysisError::InvalidK { k, n });
    }
    let mut total = 0.0;
    for id in &method.ids {
        let mine: HashSet<String> = knn(method, id, k)?.into_iter().collect();
        let truth: HashSet<String> = knn(oracle, id, k)?.into_iter().collect();
        total += mine.intersection(&truth).count() as f64 / k as f64;
    }
    Ok(total / n as f64)
}

/// Distance between two videos under a method spec, without building a
/// matrix.
pub fn pairwise_distance(
    a: &GeoVideo,
    b: &GeoVideo,
    spec: &MethodSpec,
) -> Result<f64, AnalysisError> {
    if let Some((method, sigma)) = spec.approx() {
        let params = crate::lcvs::LcvsParams { sigma, method };
        Ok(crate::lcvs::lcvs_distance(a, b, &params))
    } else if let MethodSpec::Lcss { epsilon, sigma } = *spec {
        Ok(crate::baselines::lcss_distance(
            a,
            b,
            &LcssParams { epsilon, sigma },
        ))
    } else {
        Ok(crate::baselines::hausdorff_distance(a, b)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, DirectionMode, SynthConfig};
    use crate::fov::FoV;
    use crate::geom::Point;

    fn small_dataset(n: usize) -> Vec<GeoVideo> {
        synthesize(&SynthConfig {
            n_videos: n,
            frames_per_video: 6,
            direction_mode: DirectionMode::Random,
            extent: 80.0,
            ..SynthConfig::default()
        })
        .unwrap()
    }

    fn matrix_from(ids: &[&str], values: &[f64]) -> DistanceMatrix {
        DistanceMatrix {
            ids: ids.iter().map(|s| s.to_string()).collect(),
            values: values.to_vec(),
            normalized: true,
        }
    }

    #[test]
    fn identical_videos_give_zero_matrix() {
        let v = small_dataset(1).pop().unwrap();
        let videos: Vec<GeoVideo> = (0..3)
            .map(|i| GeoVideo::new(format!("v{i}"), v.fovs().to_vec()).unwrap())
            .collect();
        let spec = MethodSpec::LcvsMbt { sigma: 1 };
        let m = distance_matrix(&videos, &spec, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn two_videos_mirror_one_pair() {
        let videos = small_dataset(2);
        let spec = MethodSpec::LcvsMbs {
            segment_angle: 5.0,
            sigma: 1,
        };
        let m = distance_matrix(&videos, &spec, 1).unwrap();
        assert_eq!(m.get(0, 1).to_bits(), m.get(1, 0).to_bits());
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn thread_count_does_not_change_values() {
        let videos = small_dataset(6);
        for spec in [
            MethodSpec::LcvsMbs {
                segment_angle: 5.0,
                sigma: 1,
            },
            MethodSpec::Lcss {
                epsilon: 10.0,
                sigma: 1,
            },
            MethodSpec::Hausdorff,
        ] {
            let serial = distance_matrix(&videos, &spec, 1).unwrap();
            let parallel = distance_matrix(&videos, &spec, 8).unwrap();
            assert_eq!(serial.to_csv_string(), parallel.to_csv_string());
        }
    }

    #[test]
    fn matrix_rejects_duplicates_and_small_inputs() {
        let videos = small_dataset(2);
        let dup = vec![videos[0].clone(), videos[0].clone()];
        assert!(matches!(
            distance_matrix(&dup, &MethodSpec::Hausdorff, 1),
            Err(AnalysisError::DuplicateId(_))
        ));
        assert!(matches!(
            distance_matrix(&videos[..1], &MethodSpec::Hausdorff, 1),
            Err(AnalysisError::NotEnoughVideos { .. })
        ));
    }

    #[test]
    fn hausdorff_matrix_is_not_normalized() {
        let videos = small_dataset(3);
        let m = distance_matrix(&videos, &MethodSpec::Hausdorff, 1).unwrap();
        assert!(!m.is_normalized());
    }

    #[test]
    fn hausdorff_matrix_propagates_empty_videos() {
        let mut videos = small_dataset(2);
        videos.push(GeoVideo::new("empty", vec![]).unwrap());
        assert!(matches!(
            distance_matrix(&videos, &MethodSpec::Hausdorff, 1),
            Err(AnalysisError::Baseline(BaselineError::EmptyInput))
        ));
    }

    #[test]
    fn knn_finds_duplicate_of_query() {
        let v = small_dataset(1).pop().unwrap();
        let twin = GeoVideo::new("twin", v.fovs().to_vec()).unwrap();
        let far: Vec<FoV> = v
            .fovs()
            .iter()
            .map(|f| {
                FoV::new(
                    f.position() + Point::new(5000.0, 0.0),
                    f.r(),
                    f.theta(),
                    f.delta(),
                    f.t(),
                )
                .unwrap()
            })
            .collect();
        let videos = vec![
            GeoVideo::new("query", v.fovs().to_vec()).unwrap(),
            twin,
            GeoVideo::new("far", far).unwrap(),
        ];
        let m = distance_matrix(&videos, &MethodSpec::LcvsMbt { sigma: 1 }, 1).unwrap();
        assert_eq!(knn(&m, "query", 1).unwrap(), vec!["twin".to_string()]);
    }

    #[test]
    fn knn_breaks_ties_lexicographically() {
        let m = matrix_from(&["b", "a", "d", "c"], &[0.0; 16]);
        assert_eq!(
            knn(&m, "b", 2).unwrap(),
            vec!["a".to_string(), "c".to_string()]
        );
        assert_eq!(
            knn(&m, "b", 3).unwrap(),
            vec!["a".to_string(), "c".to_string(), "d".to_string()]
        );
    }

    #[test]
    fn knn_rejects_unknown_ids_and_bad_k() {
        let m = matrix_from(&["a", "b"], &[0.0; 4]);
        assert!(matches!(knn(&m, "zz", 1), Err(AnalysisError::UnknownId(_))));
        assert!(matches!(
            knn(&m, "a", 2),
            Err(AnalysisError::InvalidK { .. })
        ));
        assert!(matches!(
            knn(&m, "a", 0),
            Err(AnalysisError::InvalidK { .. })
        ));
    }

    #[test]
    fn accuracy_of_oracle_against_itself_is_one() {
        let videos = small_dataset(8);
        let m = distance_matrix(&videos, &MethodSpec::LcvsOracle { sigma: 1 }, 1).unwrap();
        assert_eq!(accuracy_eval(&m, &m, 3).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_of_reversed_ranking_is_zero() {
        // Distances from each video grow with index distance; the method
        // reverses them. With k=2 the top-2 and bottom-2 of every query are
        // disjoint on 6 videos.
        let n = 6;
        let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut oracle = vec![0.0; n * n];
        let mut reversed = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = (i as f64 - j as f64).abs();
                    oracle[i * n + j] = d;
                    reversed[i * n + j] = 100.0 - d;
                }
            }
        }
        let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        let o = matrix_from(&id_refs, &oracle);
        let r = matrix_from(&id_refs, &reversed);
        assert_eq!(accuracy_eval(&r, &o, 2).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_matches_hand_computed_precision() {
        // Independent oracle: recompute precision@k by explicit sorted-set
        // intersection over a seeded random matrix.
        let n = 10;
        let k = 3;
        let ids: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
        let mut rng = crate::rng::SplitMix64::new(77);
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let x = rng.next_f64();
                let y = rng.next_f64();
                a[i * n + j] = x;
                a[j * n + i] = x;
                b[i * n + j] = y;
                b[j * n + i] = y;
            }
        }
        let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        let ma = matrix_from(&id_refs, &a);
        let mb = matrix_from(&id_refs, &b);

        let top = |m: &DistanceMatrix, q: usize| -> Vec<usize> {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != q).collect();
            others.sort_by(|&x, &y| {
                m.get(q, x)
                    .total_cmp(&m.get(q, y))
                    .then_with(|| ids[x].cmp(&ids[y]))
            });
            others.truncate(k);
            others
        };
        let mut expected = 0.0;
        for q in 0..n {
            let ta = top(&ma, q);
            let tb = top(&mb, q);
            expected += ta.iter().filter(|x| tb.contains(x)).count() as f64 / k as f64;
        }
        expected /= n as f64;

        let got = accuracy_eval(&ma, &mb, k).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn accuracy_rejects_mismatched_ids() {
        let a = matrix_from(&["a", "b", "c"], &[0.0; 9]);
        let b = matrix_from(&["a", "b", "x"], &[0.0; 9]);
        assert!(matches!(
            accuracy_eval(&a, &b, 1),
            Err(AnalysisError::IdMismatch)
        ));
    }

    #[test]
    fn pairwise_distance_matches_matrix_cell() {
        let videos = small_dataset(3);
        for spec in [
            MethodSpec::LcvsMbr { sigma: 1 },
            MethodSpec::Lcss {
                epsilon: 10.0,
                sigma: 1,
            },
            MethodSpec::Hausdorff,
        ] {
            let m = distance_matrix(&videos, &spec, 1).unwrap();
            let d = pairwise_distance(&videos[0], &videos[2], &spec).unwrap();
            assert_eq!(d.to_bits(), m.get(0, 2).to_bits());
        }
    }
}
