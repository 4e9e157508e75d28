//! Big-endian IDX files (MNIST layout).

use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn header<'a>(path: &Path, bytes: &'a [u8], magic: u32, dims: usize) -> Result<(Vec<usize>, &'a [u8])> {
    let head = 4 + 4 * dims;
    let found = be_u32(bytes, 0).ok_or(Error::IdxTruncated {
        path: path.into(),
        declared: head,
        found: bytes.len(),
    })?;
    if found != magic {
        return Err(Error::IdxMagic {
            path: path.into(),
            expected: magic,
            found,
        });
    }
    if bytes.len() < head {
        return Err(Error::IdxTruncated {
            path: path.into(),
            declared: head,
            found: bytes.len(),
        });
    }
    let shape: Vec<usize> = (0..dims).map(|d| be_u32(bytes, 4 + 4 * d).unwrap() as usize).collect();
    let payload = &bytes[head..];
    let declared = shape.iter().product::<usize>();
    if payload.len() < declared {
        return Err(Error::IdxTruncated {
            path: path.into(),
            declared,
            found: payload.len(),
        });
    }
    if payload.len() > declared {
        return Err(Error::IdxTrailing {
            path: path.into(),
            extra: payload.len() - declared,
        });
    }
    Ok((shape, payload))
}

/// Images as row-major pixel vectors plus (rows, cols).
pub fn parse_idx_images(path: &Path, bytes: &[u8]) -> Result<(Vec<Vec<f64>>, usize, usize)> {
    let (shape, payload) = header(path, bytes, IDX_IMAGES_MAGIC, 3)?;
    let (rows, cols) = (shape[1], shape[2]);
    let size = rows * cols;
    let images = if size == 0 {
        vec![Vec::new(); shape[0]]
    } else {
        payload
            .chunks_exact(size)
            .map(|px| px.iter().map(|&p| p as f64).collect())
            .collect()
    };
    Ok((images, rows, cols))
}

pub fn parse_idx_labels(path: &Path, bytes: &[u8]) -> Result<Vec<usize>> {
    let (_, payload) = header(path, bytes, IDX_LABELS_MAGIC, 1)?;
    Ok(payload.iter().map(|&b| b as usize).collect())
}

/// Loads an image/label file pair; pixels stay in [0, 255].
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    let image_bytes = std::fs::read(images).map_err(|e| Error::io(images, e))?;
    let label_bytes = std::fs::read(labels).map_err(|e| Error::io(labels, e))?;
    let (features, _, _) = parse_idx_images(images, &image_bytes)?;
    let y = parse_idx_labels(labels, &label_bytes)?;
    if features.len() != y.len() {
        return Err(Error::IdxCountMismatch {
            images: features.len(),
            labels: y.len(),
        });
    }
    let classes = y.iter().max().map_or(0, |&m| m + 1).max(10);
    Dataset::new(features, y, classes, format!("{} + {}", images.display(), labels.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn images(n: u32, rows: u32, cols: u32, payload: usize) -> Vec<u8> {
        let mut b = IDX_IMAGES_MAGIC.to_be_bytes().to_vec();
        for d in [n, rows, cols] {
            b.extend(d.to_be_bytes());
        }
        b.extend((0..payload).map(|i| (i % 256) as u8));
        b
    }

    fn labels(values: &[u8]) -> Vec<u8> {
        let mut b = IDX_LABELS_MAGIC.to_be_bytes().to_vec();
        b.extend((values.len() as u32).to_be_bytes());
        b.extend(values);
        b
    }

    #[test]
    fn parses_images_and_labels() {
        let p = Path::new("x");
        let (img, r, c) = parse_idx_images(p, &images(2, 2, 3, 12)).unwrap();
        assert_eq!((r, c), (2, 3));
        assert_eq!(img[1], vec![6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);
        assert_eq!(parse_idx_labels(p, &labels(&[3, 9])).unwrap(), vec![3, 9]);
    }

    #[test]
    fn distinct_errors() {
        let p = Path::new("x");
        assert!(matches!(parse_idx_images(p, &labels(&[1])), Err(Error::IdxMagic { .. })));
        assert!(matches!(parse_idx_images(p, &images(2, 2, 3, 11)), Err(Error::IdxTruncated { .. })));
        assert!(matches!(parse_idx_images(p, &images(2, 2, 3, 13)), Err(Error::IdxTrailing { extra: 1, .. })));
        assert!(matches!(parse_idx_images(p, &[0, 0]), Err(Error::IdxTruncated { .. })));
        assert!(matches!(parse_idx_labels(p, &IDX_LABELS_MAGIC.to_be_bytes()), Err(Error::IdxTruncated { .. })));
    }

    #[test]
    fn load_pairs_and_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        std::fs::write(&ip, images(3, 2, 2, 12)).unwrap();
        std::fs::write(&lp, labels(&[0, 7, 2])).unwrap();
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.classes, 10);
        assert_eq!(ds.feature_count, 4);
        std::fs::write(&lp, labels(&[0, 7])).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(Error::IdxCountMismatch { images: 3, labels: 2 })));
    }
}
