//! Dataset generation and the line-delimited dataset file format.
//!
//! One record per line, fields space-separated in this order:
//!
//! ```text
//! class_id  pose[10]  12 x (uL vL uR vR vis)  12 x (x y z)
//! ```
//!
//! `pose[10]` is `[t(3), r6(6), articulation]`; `vis` is `0`/`1`; floats are
//! decimal with 9 significant digits. The header line carries schema
//! version, rig, seed, record count, and the noise configuration. Records
//! are generated from per-index RNG streams, so any worker count produces
//! the same bytes.

use super::{DatasetRecord, NoiseConfig, PoseSampler, SynthError};
use crate::rng::{domain, stream};
use crate::{CameraRig, InstrumentModel, Pose7D, StereoObservation, KEYPOINT_COUNT};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const MAGIC: &str = "stereopose-dataset v1";
const WRITE_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub seed: u64,
    pub n: usize,
    pub class_count: usize,
    pub rig: CameraRig,
    pub noise: Option<NoiseConfig>,
}

/// Builds one record: pose from the sampler stream, exact projection, then
/// optional corruption from the record stream.
pub fn record_from_pose(
    pose: &Pose7D,
    model: &InstrumentModel,
    rig: &CameraRig,
    noise: Option<&NoiseConfig>,
    class_count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DatasetRecord, SynthError> {
    let (mut observation, keypoints3d) = super::observe(pose, model, rig)?;
    if let Some(noise) = noise {
        observation = perturb_observation(&observation, noise, class_count, rng);
    }
    Ok(DatasetRecord {
        class_id: model.class_id,
        pose: *pose,
        observation,
        keypoints3d,
    })
}

/// Generates `n` records (classes drawn uniformly) and writes the dataset
/// file. Parallelizes over records; output is independent of worker count.
pub fn generate_dataset(
    models: &[InstrumentModel],
    rig: &CameraRig,
    sampler: &PoseSampler,
    n: usize,
    noise: Option<&NoiseConfig>,
    path: &Path,
) -> Result<(), SynthError> {
    assert!(n >= 1, "dataset must have at least one record");
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "{MAGIC} seed={} n={n} classes={} rig={} noise={}",
        sampler.seed,
        models.len(),
        fmt_rig(rig),
        fmt_noise(noise)
    )?;

    let mut start = 0usize;
    while start < n {
        let end = (start + WRITE_CHUNK).min(n);
        let lines: Vec<Result<String, SynthError>> = (start..end)
            .into_par_iter()
            .map(|index| {
                let record = generate_record(models, rig, sampler, noise, index as u64)?;
                Ok(format_record(&record))
            })
            .collect();
        for line in lines {
            writeln!(w, "{}", line?)?;
        }
        start = end;
    }
    w.flush()?;
    Ok(())
}

fn generate_record(
    models: &[InstrumentModel],
    rig: &CameraRig,
    sampler: &PoseSampler,
    noise: Option<&NoiseConfig>,
    index: u64,
) -> Result<DatasetRecord, SynthError> {
    let mut rng = stream(sampler.seed, domain::DATASET_RECORD, index);
    let class = rng.random_range(0..models.len());
    let pose = sampler.sample(index, &models[class], rig)?;
    record_from_pose(&pose, &models[class], rig, noise, models.len(), &mut rng)
}

/// Applies the mock detector: Gaussian pixel noise on visible keypoints,
/// per-keypoint dropout, class relabeling (uniform over the other
/// `class_count − 1` classes), and a detector score.
pub fn perturb_observation(
    obs: &StereoObservation,
    noise: &NoiseConfig,
    class_count: usize,
    rng: &mut ChaCha8Rng,
) -> StereoObservation {
    let mut out = obs.clone();
    let normal = Normal::new(0.0, noise.keypoint_sigma.max(f64::MIN_POSITIVE)).unwrap();
    for kp in out.keypoints.iter_mut() {
        if !kp.visible {
            continue;
        }
        if noise.keypoint_sigma > 0.0 {
            kp.u_left += normal.sample(rng);
            kp.v_left += normal.sample(rng);
            kp.u_right += normal.sample(rng);
            kp.v_right += normal.sample(rng);
        }
        if noise.dropout_prob > 0.0 && rng.random::<f64>() < noise.dropout_prob {
            *kp = Default::default();
        }
    }
    if class_count > 1 && noise.misclass_prob > 0.0 && rng.random::<f64>() < noise.misclass_prob {
        let shift = rng.random_range(1..class_count);
        out.class_id = (out.class_id + shift) % class_count;
    }
    let (lo, hi) = noise.score_range;
    out.score = if hi > lo { rng.random_range(lo..hi) } else { lo };
    out.refresh_boxes(super::BOX_PAD_PX);
    out
}

pub(super) fn fmt_rig(rig: &CameraRig) -> String {
    format!(
        "{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
        rig.fx, rig.fy, rig.cx, rig.cy, rig.image_width, rig.image_height, rig.baseline
    )
}

pub(super) fn parse_rig(s: &str) -> Result<CameraRig, SynthError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.parse().map_err(|_| SynthError::Parse("bad rig".into())))
        .collect::<Result<_, _>>()?;
    if v.len() != 7 {
        return Err(SynthError::Parse("rig needs 7 fields".into()));
    }
    Ok(CameraRig {
        fx: v[0],
        fy: v[1],
        cx: v[2],
        cy: v[3],
        image_width: v[4],
        image_height: v[5],
        baseline: v[6],
    })
}

pub(super) fn fmt_noise(noise: Option<&NoiseConfig>) -> String {
    match noise {
        None => "none".into(),
        Some(n) => format!(
            "{:?},{:?},{:?},{:?},{:?}",
            n.keypoint_sigma, n.dropout_prob, n.misclass_prob, n.score_range.0, n.score_range.1
        ),
    }
}

pub(super) fn parse_noise(s: &str) -> Result<Option<NoiseConfig>, SynthError> {
    if s == "none" {
        return Ok(None);
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.parse().map_err(|_| SynthError::Parse("bad noise".into())))
        .collect::<Result<_, _>>()?;
    if v.len() != 5 {
        return Err(SynthError::Parse("noise needs 5 fields".into()));
    }
    Ok(Some(NoiseConfig {
        keypoint_sigma: v[0],
        dropout_prob: v[1],
        misclass_prob: v[2],
        score_range: (v[3], v[4]),
    }))
}

/// 9-significant-digit decimal, the dataset float format.
pub(super) fn fmt_f(x: f64) -> String {
    format!("{x:.8e}")
}

pub(super) fn format_record(r: &DatasetRecord) -> String {
    let mut s = String::with_capacity(1600);
    s.push_str(&r.class_id.to_string());
    for v in r.pose.to_array() {
        s.push(' ');
        s.push_str(&fmt_f(v));
    }
    for kp in &r.observation.keypoints {
        for v in [kp.u_left, kp.v_left, kp.u_right, kp.v_right] {
            s.push(' ');
            s.push_str(&fmt_f(v));
        }
        s.push(' ');
        s.push(if kp.visible { '1' } else { '0' });
    }
    for p in &r.keypoints3d {
        for v in p {
            s.push(' ');
            s.push_str(&fmt_f(*v));
        }
    }
    s
}

pub(super) fn parse_record(line: &str) -> Result<DatasetRecord, SynthError> {
    let mut it = line.split_ascii_whitespace();
    let next_f = |it: &mut std::str::SplitAsciiWhitespace| -> Result<f64, SynthError> {
        it.next()
            .ok_or_else(|| SynthError::Parse("record truncated".into()))?
            .parse()
            .map_err(|_| SynthError::Parse("bad float".into()))
    };
    let class_id: usize = it
        .next()
        .ok_or_else(|| SynthError::Parse("empty record".into()))?
        .parse()
        .map_err(|_| SynthError::Parse("bad class id".into()))?;
    let mut pose = [0.0; 10];
    for v in pose.iter_mut() {
        *v = next_f(&mut it)?;
    }
    let mut keypoints = [crate::StereoKeypoint::default(); KEYPOINT_COUNT];
    for kp in keypoints.iter_mut() {
        let u_left = next_f(&mut it)?;
        let v_left = next_f(&mut it)?;
        let u_right = next_f(&mut it)?;
        let v_right = next_f(&mut it)?;
        let vis = it
            .next()
            .ok_or_else(|| SynthError::Parse("record truncated".into()))?;
        *kp = crate::StereoKeypoint {
            u_left,
            v_left,
            u_right,
            v_right,
            visible: vis == "1",
        };
    }
    let mut keypoints3d = [[0.0; 3]; KEYPOINT_COUNT];
    for p in keypoints3d.iter_mut() {
        for v in p.iter_mut() {
            *v = next_f(&mut it)?;
        }
    }
    let mut observation = StereoObservation {
        class_id,
        keypoints,
        box_left: Default::default(),
        box_right: Default::default(),
        score: 1.0,
    };
    observation.refresh_boxes(super::BOX_PAD_PX);
    Ok(DatasetRecord {
        class_id,
        pose: Pose7D::from_array(&pose),
        observation,
        keypoints3d,
    })
}

pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, Vec<DatasetRecord>), SynthError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| SynthError::Parse("empty file".into()))??;
    let header = parse_header(&header_line)?;
    let mut records = Vec::with_capacity(header.n);
    for line in lines {
        records.push(parse_record(&line?)?);
    }
    if records.len() != header.n {
        return Err(SynthError::Parse(format!(
            "header claims {} records, file has {}",
            header.n,
            records.len()
        )));
    }
    Ok((header, records))
}

fn parse_header(line: &str) -> Result<DatasetHeader, SynthError> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| SynthError::Parse("bad dataset magic".into()))?;
    let mut seed = None;
    let mut n = None;
    let mut classes = None;
    let mut rig = None;
    let mut noise = None;
    for kv in rest.split_ascii_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| SynthError::Parse("bad header field".into()))?;
        match k {
            "seed" => seed = Some(v.parse().map_err(|_| SynthError::Parse("seed".into()))?),
            "n" => n = Some(v.parse().map_err(|_| SynthError::Parse("n".into()))?),
            "classes" => {
                classes = Some(v.parse().map_err(|_| SynthError::Parse("classes".into()))?)
            }
            "rig" => rig = Some(parse_rig(v)?),
            "noise" => noise = Some(parse_noise(v)?),
            _ => return Err(SynthError::Parse(format!("unknown header key {k}"))),
        }
    }
    Ok(DatasetHeader {
        seed: seed.ok_or_else(|| SynthError::Parse("missing seed".into()))?,
        n: n.ok_or_else(|| SynthError::Parse("missing n".into()))?,
        class_count: classes.ok_or_else(|| SynthError::Parse("missing classes".into()))?,
        rig: rig.ok_or_else(|| SynthError::Parse("missing rig".into()))?,
        noise: noise.ok_or_else(|| SynthError::Parse("missing noise".into()))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project_point, Eye};
    use crate::instruments::make_instrument_set;

    fn setup() -> (Vec<InstrumentModel>, CameraRig, PoseSampler) {
        (
            make_instrument_set(7, 5),
            CameraRig::vr_default(),
            PoseSampler::new(5),
        )
    }

    #[test]
    fn noise_free_records_reproject_exactly() {
        let (models, rig, sampler) = setup();
        for i in 0..50 {
            let r = generate_record(&models, &rig, &sampler, None, i).unwrap();
            for (kp, p) in r.observation.keypoints.iter().zip(&r.keypoints3d) {
                let (ul, vl) = project_point(&rig, Eye::Left, p).unwrap();
                let (ur, vr) = project_point(&rig, Eye::Right, p).unwrap();
                assert!((ul - kp.u_left).abs() < 1e-6);
                assert!((vl - kp.v_left).abs() < 1e-6);
                assert!((ur - kp.u_right).abs() < 1e-6);
                assert!((vr - kp.v_right).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn dataset_file_round_trips() {
        let (models, rig, sampler) = setup();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.ds");
        generate_dataset(&models, &rig, &sampler, 64, None, &path).unwrap();
        let (header, records) = read_dataset(&path).unwrap();
        assert_eq!(header.n, 64);
        assert_eq!(header.class_count, 5);
        assert_eq!(header.rig, rig);
        assert_eq!(header.noise, None);
        assert_eq!(records.len(), 64);
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        let (models, rig, sampler) = setup();
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("one.ds");
        let eight = dir.path().join("eight.ds");
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        single.install(|| generate_dataset(&models, &rig, &sampler, 200, None, &one).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap();
        many.install(|| generate_dataset(&models, &rig, &sampler, 200, None, &eight).unwrap());
        assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&eight).unwrap());
    }

    #[test]
    fn identity_noise_is_a_noop() {
        let (models, rig, sampler) = setup();
        let clean = generate_record(&models, &rig, &sampler, None, 3).unwrap();
        let noise = NoiseConfig {
            keypoint_sigma: 0.0,
            dropout_prob: 0.0,
            misclass_prob: 0.0,
            score_range: (1.0, 1.0),
        };
        let mut rng = crate::rng::stream(1, 2, 3);
        let out = perturb_observation(&clean.observation, &noise, 5, &mut rng);
        assert_eq!(out, clean.observation);
    }

    #[test]
    fn full_dropout_hides_everything() {
        let (models, rig, sampler) = setup();
        let clean = generate_record(&models, &rig, &sampler, None, 3).unwrap();
        let noise = NoiseConfig {
            dropout_prob: 1.0,
            ..Default::default()
        };
        let mut rng = crate::rng::stream(1, 2, 3);
        let out = perturb_observation(&clean.observation, &noise, 5, &mut rng);
        assert_eq!(out.visible_count(), 0);
    }

    #[test]
    fn gaussian_noise_has_the_configured_spread() {
        let (models, rig, sampler) = setup();
        let clean = generate_record(&models, &rig, &sampler, None, 9).unwrap();
        let noise = NoiseConfig {
            keypoint_sigma: 2.0,
            dropout_prob: 0.0,
            misclass_prob: 0.0,
            score_range: (1.0, 1.0),
        };
        let mut deltas = Vec::new();
        let mut rng = crate::rng::stream(1, 2, 4);
        while deltas.len() < 10_000 {
            let out = perturb_observation(&clean.observation, &noise, 5, &mut rng);
            for (a, b) in out.keypoints.iter().zip(&clean.observation.keypoints) {
                deltas.push(a.u_left - b.u_left);
                deltas.push(a.v_left - b.v_left);
                deltas.push(a.u_right - b.u_right);
                deltas.push(a.v_right - b.v_right);
            }
        }
        let n = deltas.len() as f64;
        let mean = deltas.iter().sum::<f64>() / n;
        let var = deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        assert!((1.9..2.1).contains(&std), "std {std}");
    }

    #[test]
    fn class_histogram_is_uniform_within_3_sigma() {
        let (models, rig, sampler) = setup();
        let n = 20_000usize;
        let mut counts = vec![0usize; models.len()];
        for i in 0..n {
            let r = generate_record(&models, &rig, &sampler, None, i as u64).unwrap();
            counts[r.class_id] += 1;
        }
        let p = 1.0 / models.len() as f64;
        let expect = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (c, &count) in counts.iter().enumerate() {
            assert!(
                (count as f64 - expect).abs() < 3.0 * sigma,
                "class {c}: {count} vs {expect}±{sigma}"
            );
        }
    }
}
