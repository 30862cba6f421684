use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::Dense2;

/// Features with integer class labels in `0..classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Dense2,
    labels: Vec<usize>,
    classes: usize,
}

impl Dataset {
    pub fn new(x: Dense2, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::ShapeMismatch {
                op: "dataset",
                left: x.shape(),
                right: (labels.len(), 1),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        Ok(Dataset { x, labels, classes })
    }

    pub fn x(&self) -> &Dense2 {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::new(self.x.clone(), labels, self.classes)
    }

    pub fn with_features(&self, x: Dense2) -> Result<Dataset> {
        Dataset::new(x, self.labels.clone(), self.classes)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// First `n` rows (or all of them).
    pub fn head(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }

    pub fn one_hot(&self) -> Dense2 {
        one_hot(&self.labels, self.classes)
    }

    /// `2·one_hot − 1`.
    pub fn sign_encoding(&self) -> Dense2 {
        self.one_hot().map(|v| 2.0 * v - 1.0)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// CSV with header `x0,...,x{d-1},label`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim()).map(|j| format!("x{j}")).collect();
        writeln!(w, "{},label", header.join(","))?;
        for (row, label) in self.x.row_iter().zip(&self.labels) {
            for v in row {
                write!(w, "{v},")?;
            }
            writeln!(w, "{label}")?;
        }
        w.flush()
    }
}

pub fn one_hot(labels: &[usize], classes: usize) -> Dense2 {
    let mut y = Dense2::zeros(labels.len(), classes);
    for (r, &l) in labels.iter().enumerate() {
        y.set(r, l, 1.0);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        let x = Dense2::from_rows(&[[0.5, -1.0], [0.25, 2.0], [0.0, 0.0]]).unwrap();
        Dataset::new(x, vec![2, 0, 1], 3).unwrap()
    }

    #[test]
    fn encodings() {
        let d = tiny();
        let y = d.one_hot();
        for row in y.row_iter() {
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
        assert_eq!(y.row(0), &[0.0, 0.0, 1.0]);
        assert!(d.sign_encoding().as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
        assert_eq!(d.sign_encoding().row(1), &[1.0, -1.0, -1.0]);
    }

    #[test]
    fn invalid_datasets() {
        let x = Dense2::zeros(2, 1);
        assert!(Dataset::new(x.clone(), vec![0], 2).is_err());
        assert!(Dataset::new(x, vec![0, 2], 2).is_err());
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        tiny().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x0,x1,label\n0.5,-1,2\n0.25,2,0\n0,0,1\n");
    }

    #[test]
    fn subset_and_counts() {
        let d = tiny();
        let s = d.subset(&[2, 0]);
        assert_eq!(s.labels(), &[1, 2]);
        assert_eq!(s.x().row(1), &[0.5, -1.0]);
        assert_eq!(d.class_counts(), vec![1, 1, 1]);
        assert_eq!(d.head(10).len(), 3);
    }
}
