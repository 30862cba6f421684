//! Datasets: toy generators, MNIST ingestion, label encodings and noise
//! injection.

mod dataset;
mod idx;
mod noise;
mod toy;

pub use dataset::{one_hot, Dataset};
pub use idx::{
    load_mnist, load_mnist_dir, mnist_dataset, parse_idx_images, parse_idx_labels, IdxImages,
    IMAGE_MAGIC, LABEL_MAGIC, MNIST_CLASSES, TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS,
};
pub use noise::{add_input_noise, corrupt_labels, NoiseScale};
pub use toy::{
    checkerboard_cell, cyclic_class, gen_checkerboard, gen_checkerboard_with, gen_random_labels,
    gen_spiral, spiral_point, CHECKERBOARD_CLASSES, SPIRAL_DEFAULT_NOISE, SPIRAL_SWEEP,
    TOY_SPLIT_SIZE,
};
