mod common;

use common::rng;
use handcorr::raster::{binary_to_gray, decode_pgm, encode_pgm, resize_nearest};
use handcorr::segmentation::binarize;
use handcorr::{BinaryImage, Error, GrayImage};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn pgm_round_trips_seeded_images() {
    let mut r = rng(3);
    for _ in 0..100 {
        let (w, h) = (r.random_range(1..40), r.random_range(1..40));
        let img = GrayImage::from_fn(w, h, |_, _| r.random()).unwrap();
        let bytes = encode_pgm(&img);
        assert!(bytes.starts_with(format!("P5\n{w} {h}\n255\n").as_bytes()));
        assert_eq!(bytes.len(), format!("P5\n{w} {h}\n255\n").len() + w * h);
        assert_eq!(decode_pgm(&bytes).unwrap(), img);
    }
}

#[test]
fn ascii_pgm_with_comments_decodes_and_reencodes_as_binary() {
    let text = b"P2\n# made by hand\n3 2\n# max\n255\n0 128 255\n1 2 3\n";
    let img = decode_pgm(text).unwrap();
    assert_eq!(img.pixels(), &[0, 128, 255, 1, 2, 3]);
    assert_eq!(encode_pgm(&img), b"P5\n3 2\n255\n\x00\x80\xff\x01\x02\x03".to_vec());
}

#[test]
fn truncated_and_foreign_inputs_fail_with_an_offset() {
    for bad in [&b"P6\n1 1\n255\n\x00"[..], b"P5\n2 2\n255\n\x00\x01", b"P5\n0 2\n255\n", b"", b"P5\n2"] {
        match decode_pgm(bad) {
            Err(Error::Parse { offset, .. }) => assert!(offset <= bad.len()),
            other => panic!("{bad:?} gave {other:?}"),
        }
    }
}

#[test]
fn binary_to_gray_then_threshold_recovers_mask() {
    let mut r = rng(4);
    for _ in 0..50 {
        let m = BinaryImage::from_fn(9, 7, |_, _| r.random_bool(0.4)).unwrap();
        let (bg, fg) = (r.random_range(0..100u8), r.random_range(150..=255u8));
        let gray = binary_to_gray(&m, fg, bg).unwrap();
        assert_eq!(binarize(&gray, r.random_range(bg..fg)), m);
    }
    assert!(binary_to_gray(&BinaryImage::zeros(2, 2).unwrap(), 9, 9).is_err());
}

#[test]
fn resize_identity_and_upscale() {
    let m = BinaryImage::from_fn(4, 4, |x, y| (x + y) % 3 == 0).unwrap();
    assert_eq!(resize_nearest(&m, 4, 4).unwrap(), m);
    let up = resize_nearest(&m, 8, 8).unwrap();
    for y in 0..8 {
        for x in 0..8 {
            assert_eq!(up.get(x, y), m.get(x / 2, y / 2));
        }
    }
    assert!(resize_nearest(&m, 0, 3).is_err());
}

proptest! {
    #[test]
    fn resize_matches_index_formula(
        w in 1usize..30, h in 1usize..30, ow in 1usize..40, oh in 1usize..40, seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let m = BinaryImage::from_fn(w, h, |_, _| r.random_bool(0.5)).unwrap();
        let out = resize_nearest(&m, ow, oh).unwrap();
        prop_assert_eq!((out.width(), out.height()), (ow, oh));
        for y in 0..oh {
            for x in 0..ow {
                prop_assert_eq!(out.get(x, y), m.get(x * w / ow, y * h / oh));
            }
        }
    }

    #[test]
    fn binary_images_hold_only_zero_and_one(data in prop::collection::vec(0u8..=3, 12)) {
        let ok = data.iter().all(|&v| v <= 1);
        prop_assert_eq!(BinaryImage::new(4, 3, data).is_ok(), ok);
    }
}
