//! Model set file format.
//!
//! Versioned plain text, one document per set. Floats are written in Rust's
//! shortest round-trip form so serialization is bit-exact. Layout:
//!
//! ```text
//! stereopose-models v1
//! seed <u64>
//! count <n>
//! model <class_id> <name>
//! hinge_point <x> <y> <z>
//! hinge_axis <x> <y> <z>
//! diameter <d>
//! part_a <n>
//! <x> <y> <z>            (n lines)
//! part_b <n>
//! <x> <y> <z>            (n lines)
//! keypoints 12
//! <A|B> <x> <y> <z>      (12 lines)
//! surface <n>
//! <A|B> <x> <y> <z>      (n lines)
//! end
//! ```

use super::{InstrumentError, InstrumentModel, Keypoint, Part, SurfacePoint};
use crate::math::Vec3;
use crate::KEYPOINT_COUNT;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const MAGIC: &str = "stereopose-models v1";

pub fn write_model_set(
    path: &Path,
    seed: u64,
    models: &[InstrumentModel<f64>],
) -> Result<(), InstrumentError> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "seed {seed}")?;
    writeln!(w, "count {}", models.len())?;
    for m in models {
        writeln!(w, "model {} {}", m.class_id, m.name)?;
        writeln!(w, "hinge_point {}", fmt3(&m.hinge_point))?;
        writeln!(w, "hinge_axis {}", fmt3(&m.hinge_axis))?;
        writeln!(w, "diameter {:?}", m.diameter)?;
        writeln!(w, "part_a {}", m.part_a.len())?;
        for p in &m.part_a {
            writeln!(w, "{}", fmt3(p))?;
        }
        writeln!(w, "part_b {}", m.part_b.len())?;
        for p in &m.part_b {
            writeln!(w, "{}", fmt3(p))?;
        }
        writeln!(w, "keypoints {}", m.keypoints.len())?;
        for kp in &m.keypoints {
            writeln!(w, "{} {}", part_tag(kp.part), fmt3(&kp.position))?;
        }
        writeln!(w, "surface {}", m.surface.len())?;
        for sp in &m.surface {
            writeln!(w, "{} {}", part_tag(sp.part), fmt3(&sp.position))?;
        }
        writeln!(w, "end")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_model_set(path: &Path) -> Result<(u64, Vec<InstrumentModel<f64>>), InstrumentError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let mut next = || -> Result<String, InstrumentError> {
        lines
            .next()
            .ok_or_else(|| InstrumentError::Parse("unexpected end of file".into()))?
            .map_err(InstrumentError::Io)
    };

    if next()? != MAGIC {
        return Err(InstrumentError::Parse("bad magic line".into()));
    }
    let seed: u64 = field(&next()?, "seed")?;
    let count: usize = field(&next()?, "count")?;

    let mut models = Vec::with_capacity(count);
    for _ in 0..count {
        let header = next()?;
        let mut it = header.splitn(3, ' ');
        if it.next() != Some("model") {
            return Err(InstrumentError::Parse("expected model header".into()));
        }
        let class_id = parse(it.next())?;
        let name = it
            .next()
            .ok_or_else(|| InstrumentError::Parse("model name missing".into()))?
            .to_string();
        let hinge_point = vec3_field(&next()?, "hinge_point")?;
        let hinge_axis = vec3_field(&next()?, "hinge_axis")?;
        let diameter: f64 = field(&next()?, "diameter")?;

        let n_a: usize = field(&next()?, "part_a")?;
        let part_a = (0..n_a).map(|_| vec3_line(&next()?)).collect::<Result<_, _>>()?;
        let n_b: usize = field(&next()?, "part_b")?;
        let part_b = (0..n_b).map(|_| vec3_line(&next()?)).collect::<Result<_, _>>()?;

        let n_kp: usize = field(&next()?, "keypoints")?;
        if n_kp != KEYPOINT_COUNT {
            return Err(InstrumentError::Parse(format!(
                "expected {KEYPOINT_COUNT} keypoints, got {n_kp}"
            )));
        }
        let mut keypoints = [Keypoint {
            part: Part::A,
            position: [0.0; 3],
        }; KEYPOINT_COUNT];
        for kp in keypoints.iter_mut() {
            let (part, position) = tagged_vec3(&next()?)?;
            *kp = Keypoint { part, position };
        }

        let n_s: usize = field(&next()?, "surface")?;
        let mut surface = Vec::with_capacity(n_s);
        for _ in 0..n_s {
            let (part, position) = tagged_vec3(&next()?)?;
            surface.push(SurfacePoint { part, position });
        }
        if next()? != "end" {
            return Err(InstrumentError::Parse("expected end marker".into()));
        }
        models.push(InstrumentModel {
            class_id,
            name,
            part_a,
            part_b,
            hinge_point,
            hinge_axis,
            keypoints,
            surface,
            diameter,
        });
    }
    Ok((seed, models))
}

fn fmt3(v: &Vec3<f64>) -> String {
    format!("{:?} {:?} {:?}", v[0], v[1], v[2])
}

fn part_tag(p: Part) -> &'static str {
    match p {
        Part::A => "A",
        Part::B => "B",
    }
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, InstrumentError> {
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| InstrumentError::Parse(format!("expected `{key}` line, got `{line}`")))?;
    parse(Some(rest.trim()))
}

fn vec3_field(line: &str, key: &str) -> Result<Vec3<f64>, InstrumentError> {
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| InstrumentError::Parse(format!("expected `{key}` line")))?;
    vec3_line(rest.trim())
}

fn vec3_line(line: &str) -> Result<Vec3<f64>, InstrumentError> {
    let mut it = line.split_whitespace();
    Ok([parse(it.next())?, parse(it.next())?, parse(it.next())?])
}

fn tagged_vec3(line: &str) -> Result<(Part, Vec3<f64>), InstrumentError> {
    let mut it = line.split_whitespace();
    let part = match it.next() {
        Some("A") => Part::A,
        Some("B") => Part::B,
        other => {
            return Err(InstrumentError::Parse(format!(
                "expected part tag, got {other:?}"
            )))
        }
    };
    Ok((
        part,
        [parse(it.next())?, parse(it.next())?, parse(it.next())?],
    ))
}

fn parse<T: std::str::FromStr>(tok: Option<&str>) -> Result<T, InstrumentError> {
    tok.ok_or_else(|| InstrumentError::Parse("missing token".into()))?
        .parse()
        .map_err(|_| InstrumentError::Parse("unparseable token".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::make_instrument_set;

    #[test]
    fn model_set_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("models.txt");
        let set = make_instrument_set(42, 5);
        write_model_set(&path, 42, &set).unwrap();
        let (seed, back) = read_model_set(&path).unwrap();
        assert_eq!(seed, 42);
        assert_eq!(set, back);

        // A second write of the parsed set is byte-identical.
        let path2 = dir.path().join("models2.txt");
        write_model_set(&path2, seed, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }
}
