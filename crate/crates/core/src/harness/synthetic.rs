//! Small labeled datasets of jittered primitive meshes for smoke runs and tests.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{write_off, Mesh};
use crate::Error;

/// Class names written by [`write_primitive_dataset`], in order.
pub const PRIMITIVE_CLASSES: [&str; 3] = ["box", "pyramid", "pole"];

fn cuboid(sx: f64, sy: f64, sz: f64) -> Mesh<f64> {
    let mut v = Vec::with_capacity(8);
    for &z in &[-sz, sz] {
        for &(x, y) in &[(-sx, -sy), (sx, -sy), (sx, sy), (-sx, sy)] {
            v.push([x, y, z]);
        }
    }
    let faces = vec![
        vec![0, 3, 2, 1],
        vec![4, 5, 6, 7],
        vec![0, 1, 5, 4],
        vec![1, 2, 6, 5],
        vec![2, 3, 7, 6],
        vec![3, 0, 4, 7],
    ];
    Mesh::new(v, faces).expect("valid cuboid")
}

fn pyramid(sx: f64, sy: f64, h: f64) -> Mesh<f64> {
    let v = vec![
        [-sx, -sy, 0.0],
        [sx, -sy, 0.0],
        [sx, sy, 0.0],
        [-sx, sy, 0.0],
        [0.0, 0.0, h],
    ];
    let faces = vec![
        vec![0, 3, 2, 1],
        vec![0, 1, 4],
        vec![1, 2, 4],
        vec![2, 3, 4],
        vec![3, 0, 4],
    ];
    Mesh::new(v, faces).expect("valid pyramid")
}

/// Mesh of class `class` (index into [`PRIMITIVE_CLASSES`]) with every extent
/// scaled by an independent factor in `[1 - jitter, 1 + jitter]`.
pub fn primitive(class: usize, jitter: f64, rng: &mut impl Rng) -> Mesh<f64> {
    let mut j = || 1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0);
    match class {
        0 => cuboid(j(), 0.8 * j(), 0.6 * j()),
        1 => pyramid(j(), j(), 1.6 * j()),
        2 => cuboid(0.15 * j(), 0.15 * j(), 1.5 * j()),
        _ => panic!("unknown primitive class {class}"),
    }
}

/// Writes `per_class` meshes per class to `root/<class>/<split>/<class>_<i>.off`.
pub fn write_primitive_dataset(
    root: &Path,
    split: &str,
    per_class: usize,
    seed: u64,
) -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (c, name) in PRIMITIVE_CLASSES.iter().enumerate() {
        let dir = root.join(name).join(split);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for i in 0..per_class {
            let path = dir.join(format!("{name}_{i:03}.off"));
            let mesh = primitive(c, 0.15, &mut rng);
            fs::write(&path, write_off(&mesh)).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scan_dataset;

    #[test]
    fn dataset_scans_back() {
        let dir = tempfile::tempdir().unwrap();
        write_primitive_dataset(dir.path(), "test", 2, 0).unwrap();
        let m = scan_dataset(dir.path(), "test").unwrap();
        assert_eq!(m.classes, vec!["box", "pole", "pyramid"]);
        assert_eq!(m.items.len(), 6);
    }
}
