//! Deterministic procedural generation of the instrument set.
//!
//! Two shape families alternate by class id: scissor-like (hinge mid-shaft,
//! blades forward, handles back) and forceps-like (hinge at the rear, two
//! bowed arms). With four or more classes, the last class is a 1.1x scaled
//! copy of the one before it, so the set contains a deliberately confusable
//! near-duplicate pair.

use super::{InstrumentModel, Keypoint, Part, SurfacePoint};
use crate::math::{self, Vec3};
use crate::rng::{domain, stream};
use crate::KEYPOINT_COUNT;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Builds `count` models, deterministic in `seed`. Class ids are `0..count`.
pub fn make_instrument_set(seed: u64, count: usize) -> Vec<InstrumentModel<f64>> {
    assert!(
        (1..=32).contains(&count),
        "instrument count must be in 1..=32"
    );
    let dup_class = if count >= 4 { Some(count - 1) } else { None };
    (0..count)
        .map(|class| {
            if dup_class == Some(class) {
                scaled_copy(build_class(seed, class - 1), 1.1, class)
            } else {
                build_class(seed, class)
            }
        })
        .collect()
}

fn build_class(seed: u64, class: usize) -> InstrumentModel<f64> {
    let mut rng = stream(seed, domain::INSTRUMENT, class as u64);
    let total_len = rng.random_range(110.0..240.0);
    let thickness = rng.random_range(2.0..4.0);
    if class % 2 == 0 {
        scissors(class, total_len, thickness, &mut rng)
    } else {
        forceps(class, total_len, thickness, &mut rng)
    }
}

fn scissors(
    class: usize,
    total_len: f64,
    thickness: f64,
    rng: &mut ChaCha8Rng,
) -> InstrumentModel<f64> {
    let blade_frac = rng.random_range(0.50..0.62);
    let bend_frac = rng.random_range(0.02..0.12);
    let drop_frac = rng.random_range(0.20..0.45);
    let blade_len = total_len * blade_frac;
    let handle_len = total_len - blade_len;
    let tz = thickness * 0.5;

    let half = |sign: f64, rng: &mut ChaCha8Rng| -> (Vec<Vec3<f64>>, Vec<usize>) {
        // Blade forward along +x, gentle quadratic bend; handle back along
        // -x with a drop on the opposite side, ending in a small ring bump.
        let mut pts = Vec::new();
        let n_blade = 9;
        for i in 0..n_blade {
            let s = blade_len * i as f64 / (n_blade - 1) as f64;
            let y = sign * bend_frac * s * s / blade_len + jitter(rng);
            pts.push([s, y, sign * tz + jitter(rng)]);
        }
        let n_handle = 6;
        for i in 1..=n_handle {
            let s = handle_len * i as f64 / n_handle as f64;
            let y = -sign * drop_frac * s + jitter(rng);
            pts.push([-s, y, sign * tz + jitter(rng)]);
        }
        let ring = [
            -handle_len * 0.95,
            -sign * (drop_frac * handle_len + 0.12 * handle_len),
            sign * tz,
        ];
        pts.push(ring);
        // Keypoints: blade tip, blade mid, hinge-adjacent, handle end,
        // handle mid, ring bump.
        let kp = vec![
            n_blade - 1,
            n_blade / 2,
            1,
            n_blade + n_handle - 1,
            n_blade + n_handle / 2 - 1,
            pts.len() - 1,
        ];
        (pts, kp)
    };

    let (part_a, kp_a) = half(1.0, rng);
    let (part_b, kp_b) = half(-1.0, rng);
    assemble(
        class,
        format!("scissors-{class:02}"),
        part_a,
        kp_a,
        part_b,
        kp_b,
        thickness,
        rng,
    )
}

fn forceps(
    class: usize,
    total_len: f64,
    thickness: f64,
    rng: &mut ChaCha8Rng,
) -> InstrumentModel<f64> {
    let spread = rng.random_range(8.0..22.0);
    let pad = rng.random_range(2.0..5.0);
    let tz = thickness * 0.5;

    let arm = |sign: f64, rng: &mut ChaCha8Rng| -> (Vec<Vec3<f64>>, Vec<usize>) {
        // Bowed arm from the rear hinge to the tip; tips nearly meet.
        let mut pts = Vec::new();
        let n = 11;
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let s = total_len * t;
            let y = sign * spread * (std::f64::consts::PI * t).sin() + jitter(rng);
            pts.push([s, y, sign * tz + jitter(rng)]);
        }
        let pad_pt = [total_len * 0.97, sign * pad, sign * tz];
        pts.push(pad_pt);
        // Keypoints: tip, 3/4, mid, 1/4, hinge-adjacent, gripping pad.
        let kp = vec![n - 1, (3 * (n - 1)) / 4, (n - 1) / 2, (n - 1) / 4, 1, n];
        (pts, kp)
    };

    let (part_a, kp_a) = arm(1.0, rng);
    let (part_b, kp_b) = arm(-1.0, rng);
    assemble(
        class,
        format!("forceps-{class:02}"),
        part_a,
        kp_a,
        part_b,
        kp_b,
        thickness,
        rng,
    )
}

fn jitter(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-0.6..0.6)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    class: usize,
    name: String,
    part_a: Vec<Vec3<f64>>,
    kp_a: Vec<usize>,
    part_b: Vec<Vec3<f64>>,
    kp_b: Vec<usize>,
    thickness: f64,
    rng: &mut ChaCha8Rng,
) -> InstrumentModel<f64> {
    // Hinge at the origin, axis near +z with a small deterministic tilt.
    let tilt_x = rng.random_range(-0.08..0.08);
    let tilt_y = rng.random_range(-0.08..0.08);
    let axis = [tilt_x, tilt_y, 1.0];
    let hinge_axis = math::scale(&axis, 1.0 / math::norm(&axis));

    let keypoints: [Keypoint<f64>; KEYPOINT_COUNT] = std::array::from_fn(|i| {
        if i < 6 {
            Keypoint {
                part: Part::A,
                position: part_a[kp_a[i]],
            }
        } else {
            Keypoint {
                part: Part::B,
                position: part_b[kp_b[i - 6]],
            }
        }
    });

    let surface = sample_surface(&part_a, &part_b, thickness, rng);
    let mut model = InstrumentModel {
        class_id: class,
        name,
        part_a,
        part_b,
        hinge_point: [0.0; 3],
        hinge_axis,
        keypoints,
        surface,
        diameter: 0.0,
    };
    model.diameter = super::diameter(&model).expect("generated surface non-empty");
    model
}

/// 512 surface samples along the part polylines with a small cross-section
/// spread, split between parts by polyline length.
fn sample_surface(
    part_a: &[Vec3<f64>],
    part_b: &[Vec3<f64>],
    thickness: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<SurfacePoint<f64>> {
    const SURFACE_SAMPLES: usize = 512;
    let len_a = polyline_length(part_a);
    let len_b = polyline_length(part_b);
    let n_a = ((SURFACE_SAMPLES as f64 * len_a / (len_a + len_b)).round() as usize)
        .clamp(1, SURFACE_SAMPLES - 1);
    let n_b = SURFACE_SAMPLES - n_a;

    let mut out = Vec::with_capacity(SURFACE_SAMPLES);
    for (part, pts, n) in [(Part::A, part_a, n_a), (Part::B, part_b, n_b)] {
        for _ in 0..n {
            let seg = rng.random_range(0..pts.len() - 1);
            let t: f64 = rng.random();
            let p = math::add(
                &math::scale(&pts[seg], 1.0 - t),
                &math::scale(&pts[seg + 1], t),
            );
            let w = thickness * 0.4;
            let position = [
                p[0],
                p[1] + rng.random_range(-w..w),
                p[2] + rng.random_range(-w..w),
            ];
            out.push(SurfacePoint { part, position });
        }
    }
    out
}

fn polyline_length(pts: &[Vec3<f64>]) -> f64 {
    pts.windows(2).map(|w| math::dist(&w[0], &w[1])).sum()
}

fn scaled_copy(base: InstrumentModel<f64>, scale: f64, class: usize) -> InstrumentModel<f64> {
    let s = |p: &Vec3<f64>| math::scale(p, scale);
    let mut model = InstrumentModel {
        class_id: class,
        name: format!("{}-large", base.name),
        part_a: base.part_a.iter().map(&s).collect(),
        part_b: base.part_b.iter().map(&s).collect(),
        hinge_point: s(&base.hinge_point),
        hinge_axis: base.hinge_axis,
        keypoints: std::array::from_fn(|i| Keypoint {
            part: base.keypoints[i].part,
            position: s(&base.keypoints[i].position),
        }),
        surface: base
            .surface
            .iter()
            .map(|sp| SurfacePoint {
                part: sp.part,
                position: s(&sp.position),
            })
            .collect(),
        diameter: 0.0,
    };
    model.diameter = super::diameter(&model).expect("scaled surface non-empty");
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = make_instrument_set(7, 13);
        let b = make_instrument_set(7, 13);
        assert_eq!(a, b);
        let c = make_instrument_set(8, 13);
        assert_ne!(a, c);
    }

    #[test]
    fn thirteen_distinct_contiguous_classes() {
        let set = make_instrument_set(7, 13);
        assert_eq!(set.len(), 13);
        for (i, m) in set.iter().enumerate() {
            assert_eq!(m.class_id, i);
        }
    }

    #[test]
    fn models_validate_and_diameters_in_range() {
        for m in make_instrument_set(3, 13) {
            m.validate().unwrap();
            assert!(
                (100.0..=400.0).contains(&m.diameter),
                "{} diameter {}",
                m.name,
                m.diameter
            );
        }
    }

    #[test]
    fn last_class_is_a_scaled_duplicate() {
        let set = make_instrument_set(7, 13);
        let base = &set[11];
        let dup = &set[12];
        assert!((dup.diameter / base.diameter - 1.1).abs() < 1e-6);
        for (kb, kd) in base.keypoints.iter().zip(&dup.keypoints) {
            let scaled = math::scale(&kb.position, 1.1);
            assert!(math::dist(&scaled, &kd.position) < 1e-9);
        }
    }

    #[test]
    fn small_sets_have_no_duplicate_pair() {
        let set = make_instrument_set(7, 2);
        assert_eq!(set.len(), 2);
        assert_ne!(set[0].name, set[1].name);
    }
}
