//! Low-dimensional synthetic problems: the 8×8 checkerboard, the k-armed
//! spiral and uniformly random labels.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{Dense2, Rng};

use super::Dataset;

/// Train and test split sizes of the toy problems.
pub const TOY_SPLIT_SIZE: usize = 800;
pub const CHECKERBOARD_CELLS: usize = 8;
pub const CHECKERBOARD_CLASSES: usize = 4;
pub const SPIRAL_DEFAULT_NOISE: f64 = 0.02;
/// Angle swept by every spiral arm (1.5 turns).
pub const SPIRAL_SWEEP: f64 = 3.0 * PI;

/// Cell index of a coordinate in `[-1, 1]`.
pub fn checkerboard_cell(coord: f64) -> usize {
    let cell = ((coord + 1.0) * (CHECKERBOARD_CELLS as f64 / 2.0)).floor();
    (cell.max(0.0) as usize).min(CHECKERBOARD_CELLS - 1)
}

/// Cyclic class assignment `(ix + iy) mod 4`.
pub fn cyclic_class(ix: usize, iy: usize) -> usize {
    (ix + iy) % CHECKERBOARD_CLASSES
}

fn checkerboard_split(n: usize, rng: &mut Rng, rule: &impl Fn(usize, usize) -> usize) -> Result<Dataset> {
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.uniform_range(-1.0, 1.0);
        let b = rng.uniform_range(-1.0, 1.0);
        data.extend([a, b]);
        labels.push(rule(checkerboard_cell(a), checkerboard_cell(b)));
    }
    Dataset::new(Dense2::new(n, 2, data)?, labels, CHECKERBOARD_CLASSES)
}

/// Uniform points on `[-1, 1]²`, labelled by cell with [`cyclic_class`].
pub fn gen_checkerboard(n_per_split: usize, rng: &mut Rng) -> Result<(Dataset, Dataset)> {
    gen_checkerboard_with(n_per_split, rng, cyclic_class)
}

/// Checkerboard with a custom `(ix, iy) → class` rule; classes must be below 4.
pub fn gen_checkerboard_with(
    n_per_split: usize,
    rng: &mut Rng,
    rule: impl Fn(usize, usize) -> usize,
) -> Result<(Dataset, Dataset)> {
    if n_per_split == 0 {
        return Err(Error::InvalidArgument("split size must be positive".into()));
    }
    let train = checkerboard_split(n_per_split, rng, &rule)?;
    let test = checkerboard_split(n_per_split, rng, &rule)?;
    Ok((train, test))
}

/// Noise-free point of arm `class` at curve parameter `t ∈ [0, 1]`.
pub fn spiral_point(t: f64, class: usize, arms: usize) -> [f64; 2] {
    let theta = SPIRAL_SWEEP * t + 2.0 * PI * class as f64 / arms as f64;
    [t * theta.cos(), t * theta.sin()]
}

fn spiral_split(n: usize, arms: usize, noise_sd: f64, rng: &mut Rng) -> Result<Dataset> {
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % arms;
        let t = rng.uniform();
        let [a, b] = spiral_point(t, class, arms);
        data.push(a + noise_sd * rng.normal());
        data.push(b + noise_sd * rng.normal());
        labels.push(class);
    }
    Dataset::new(Dense2::new(n, 2, data)?, labels, arms)
}

/// `arms`-class spiral; every class gets exactly `n_per_split / arms` points.
pub fn gen_spiral(n_per_split: usize, arms: usize, noise_sd: f64, rng: &mut Rng) -> Result<(Dataset, Dataset)> {
    if arms < 2 {
        return Err(Error::InvalidArgument(format!("spiral needs at least 2 arms, got {arms}")));
    }
    if n_per_split == 0 || n_per_split % arms != 0 {
        return Err(Error::InvalidArgument(format!(
            "split size {n_per_split} must be a positive multiple of {arms} arms"
        )));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise sd {noise_sd} must be non-negative")));
    }
    let train = spiral_split(n_per_split, arms, noise_sd, rng)?;
    let test = spiral_split(n_per_split, arms, noise_sd, rng)?;
    Ok((train, test))
}

/// Uniform points on `[-1, 1]^d` with uniformly random labels.
pub fn gen_random_labels(n: usize, d: usize, classes: usize, rng: &mut Rng) -> Result<Dataset> {
    if classes == 0 {
        return Err(Error::InvalidArgument("need at least one class".into()));
    }
    let data = (0..n * d).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
    let labels = (0..n).map(|_| rng.below(classes)).collect();
    Dataset::new(Dense2::new(n, d, data)?, labels, classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_corner_cells() {
        let (a, b) = (checkerboard_cell(0.99), checkerboard_cell(0.99));
        assert_eq!((a, b), (7, 7));
        assert_eq!(cyclic_class(a, b), 2);
        assert_eq!(checkerboard_cell(-1.0), 0);
        assert_eq!(cyclic_class(0, 0), 0);
        assert_eq!(checkerboard_cell(1.0), 7);
    }

    #[test]
    fn checkerboard_labels_follow_rule() {
        let (train, test) = gen_checkerboard(TOY_SPLIT_SIZE, &mut Rng::new(1)).unwrap();
        assert_eq!((train.len(), test.len()), (800, 800));
        for d in [&train, &test] {
            for (row, &l) in d.x().row_iter().zip(d.labels()) {
                assert!(row.iter().all(|v| (-1.0..1.0).contains(v)));
                assert_eq!(l, cyclic_class(checkerboard_cell(row[0]), checkerboard_cell(row[1])));
            }
        }
    }

    #[test]
    fn checkerboard_rule_is_pluggable() {
        let (train, _) = gen_checkerboard_with(50, &mut Rng::new(1), |ix, _| ix % 4).unwrap();
        for (row, &l) in train.x().row_iter().zip(train.labels()) {
            assert_eq!(l, checkerboard_cell(row[0]) % 4);
        }
    }

    #[test]
    fn spiral_geometry() {
        for k in 0..4 {
            assert_eq!(spiral_point(0.0, k, 4), [0.0, 0.0]);
        }
        let [x, y] = spiral_point(1.0, 0, 4);
        assert!((x + 1.0).abs() < 1e-15 && y.abs() < 1e-15);
        // a quarter turn maps arm k onto arm k+1
        for k in 0..4 {
            for t in [0.1, 0.37, 0.8] {
                let [a, b] = spiral_point(t, k, 4);
                let rotated = [-b, a];
                let next = spiral_point(t, (k + 1) % 4, 4);
                assert!((rotated[0] - next[0]).abs() < 1e-12);
                assert!((rotated[1] - next[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spiral_is_balanced_and_validated() {
        let (train, test) = gen_spiral(800, 4, SPIRAL_DEFAULT_NOISE, &mut Rng::new(2)).unwrap();
        assert_eq!(train.class_counts(), vec![200; 4]);
        assert_eq!(test.class_counts(), vec![200; 4]);
        assert!(gen_spiral(801, 4, 0.0, &mut Rng::new(2)).is_err());
        assert!(gen_spiral(800, 1, 0.0, &mut Rng::new(2)).is_err());
    }

    #[test]
    fn random_labels_have_no_duplicate_points() {
        let d = gen_random_labels(800, 2, 4, &mut Rng::new(3)).unwrap();
        let mut rows: Vec<(u64, u64)> = d
            .x()
            .row_iter()
            .map(|r| (r[0].to_bits(), r[1].to_bits()))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        assert_eq!(rows.len(), 800);
        assert_eq!(d, gen_random_labels(800, 2, 4, &mut Rng::new(3)).unwrap());
    }
}
