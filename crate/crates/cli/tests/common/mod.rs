//! Shared fixture loading for the integration tests.
#![allow(dead_code)]

use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use glyph_core::preprocess::GrayImage;

pub const DIGIT_SIDE: usize = 28;
const MAGIC: &[u8] = b"GLYPHDIGITS1";

pub fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mnist-digits.bin.gz")
}

/// The vendored digits, indexed by class 0..=9, as white-background gray images.
pub fn load_digits() -> Vec<Vec<GrayImage>> {
    let file = std::fs::File::open(fixture_path()).expect("digit fixture is present");
    let mut bytes = Vec::new();
    GzDecoder::new(file).read_to_end(&mut bytes).expect("fixture decompresses");
    assert_eq!(&bytes[..MAGIC.len()], MAGIC, "fixture magic");
    let mut pos = MAGIC.len();
    let area = DIGIT_SIDE * DIGIT_SIDE;
    let mut classes = Vec::with_capacity(10);
    for _ in 0..10 {
        let count = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4;
        let images = (0..count)
            .map(|i| {
                let start = pos + i * area;
                GrayImage::new(DIGIT_SIDE, DIGIT_SIDE, bytes[start..start + area].to_vec()).unwrap()
            })
            .collect();
        pos += count * area;
        classes.push(images);
    }
    assert_eq!(pos, bytes.len(), "no trailing bytes in fixture");
    classes
}

pub fn save_png(img: &GrayImage, path: &Path) {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.samples().to_vec())
        .expect("sample count matches");
    buf.save(path).expect("png written");
}

/// Writes a NIST-style digit tree: `<root>/<d>/F####_hsf_0_##.png`, one
/// image per writer, writers `first..first + count` for every class.
pub fn write_digit_tree(root: &Path, digits: &[Vec<GrayImage>], writers: std::ops::Range<u32>, offset: usize) {
    for (d, images) in digits.iter().enumerate() {
        let dir = root.join(d.to_string());
        std::fs::create_dir_all(&dir).unwrap();
        for (i, w) in writers.clone().enumerate() {
            save_png(&images[offset + i], &dir.join(format!("F{w:04}_hsf_0_{d}.png")));
        }
    }
}
