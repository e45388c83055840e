mod common;

use common::{mse_direct, random_margin_mask, rng};
use handcorr::classifier::{load_registry, preprocess, save_registry, score};
use handcorr::correlation::autocorrelation_map;
use handcorr::morphology::StructuringElement;
use handcorr::raster::{binary_to_gray, resize_nearest};
use handcorr::synthgest::{class_specs, render, RenderParams, DEFAULT_FRAME};
use handcorr::{BinaryImage, Error, GestureTemplate, TemplateRegistry, TemplateRegistryF32};
use proptest::prelude::*;
use rand::Rng;

fn gesture_masks(n: usize, seed: u64) -> Vec<BinaryImage> {
    class_specs(n, seed, DEFAULT_FRAME)
        .unwrap()
        .iter()
        .map(|s| render(s, &RenderParams::clean(255, 0)).unwrap().1)
        .collect()
}

#[test]
fn stored_auto_map_equals_recomputation() {
    let mut r = rng(30);
    for _ in 0..10 {
        let side = r.random_range(20..48);
        let m = random_margin_mask(&mut r, side, side, 3);
        if m.is_empty() {
            continue;
        }
        let t: GestureTemplate = GestureTemplate::from_canonical("x", m.clone(), 0.5).unwrap();
        let want = autocorrelation_map(&m.to_grid::<f64>(), 0.5).unwrap();
        assert!(t.auto_map().max_abs_diff(&want).unwrap() <= 1e-12);
    }
    for m in gesture_masks(3, 42) {
        let canonical = resize_nearest(&m, 128, 128).unwrap();
        let t: GestureTemplate = GestureTemplate::from_canonical("g", canonical.clone(), 0.5).unwrap();
        assert_eq!((t.auto_map().width(), t.auto_map().height()), (65, 65));
        let want = autocorrelation_map(&canonical.to_grid::<f64>(), 0.5).unwrap();
        assert!(t.auto_map().max_abs_diff(&want).unwrap() <= 1e-12);
    }
}

#[test]
fn score_matches_brute_force_mse() {
    let mut r = rng(31);
    for _ in 0..30 {
        let side = r.random_range(12..28);
        let a = random_margin_mask(&mut r, side, side, 2);
        let b = random_margin_mask(&mut r, side, side, 2);
        let fraction = r.random_range(0.3..=0.5);
        let Ok(t) = GestureTemplate::from_canonical("t", a.clone(), fraction) else { continue };
        let got = score(&b, &t).unwrap();
        assert!((got - mse_direct(&b, &a, fraction)).abs() <= 1e-12);
        assert_eq!(score(&a, &t).unwrap(), 0.0);
    }
}

#[test]
fn clean_render_preprocesses_to_resized_ground_truth() {
    let se = StructuringElement::default();
    for spec in class_specs(6, 7, DEFAULT_FRAME).unwrap() {
        let (img, truth) = render(&spec, &RenderParams::clean(200, 30)).unwrap();
        assert_eq!(preprocess(&img, &se, 128).unwrap(), resize_nearest(&truth, 128, 128).unwrap());
    }
}

#[test]
fn specks_are_removed_by_preprocessing() {
    let se = StructuringElement::default();
    for spec in class_specs(6, 8, DEFAULT_FRAME).unwrap() {
        let clean = render(&spec, &RenderParams::clean(200, 30)).unwrap().0;
        let specky = RenderParams { speck_prob: 0.005, seed: 3, ..RenderParams::clean(200, 30) };
        let noisy = render(&spec, &specky).unwrap().0;
        assert_ne!(clean, noisy);
        assert_eq!(preprocess(&noisy, &se, 128).unwrap(), preprocess(&clean, &se, 128).unwrap());
    }
}

#[test]
fn every_template_recognizes_itself() {
    let mut reg: TemplateRegistry = TemplateRegistry::default();
    let masks = gesture_masks(24, 42);
    for (i, m) in masks.iter().enumerate() {
        reg.enroll(&format!("g{i}"), &binary_to_gray(m, 200, 30).unwrap()).unwrap();
    }
    for (i, m) in masks.iter().enumerate() {
        let res = reg.recognize(&binary_to_gray(m, 200, 30).unwrap()).unwrap();
        assert_eq!(res.label, format!("g{i}"));
        assert!(res.mse <= 1e-12);
        assert_eq!(res.per_class_scores.len(), 24);
        assert!(res.per_class_scores.iter().all(|(_, s)| *s >= 0.0));
    }
}

#[test]
fn single_precision_registry_agrees_on_labels() {
    let masks = gesture_masks(5, 9);
    let mut r64: TemplateRegistry = TemplateRegistry::default();
    let mut r32: TemplateRegistryF32 = TemplateRegistryF32::default();
    for (i, m) in masks.iter().enumerate() {
        let img = binary_to_gray(m, 200, 30).unwrap();
        r64.enroll(&format!("g{i}"), &img).unwrap();
        r32.enroll(&format!("g{i}"), &img).unwrap();
    }
    for m in &masks {
        let img = binary_to_gray(m, 200, 30).unwrap();
        let (a, b) = (r64.recognize(&img).unwrap(), r32.recognize(&img).unwrap());
        assert_eq!(a.label, b.label);
        for ((_, x), (_, y)) in a.per_class_scores.iter().zip(&b.per_class_scores) {
            assert!((x - *y as f64).abs() < 1e-5);
        }
    }
}

#[test]
fn saved_registry_recognizes_identically() {
    let masks = gesture_masks(4, 5);
    let mut reg: TemplateRegistry = TemplateRegistry::default();
    for (i, m) in masks.iter().enumerate() {
        reg.enroll(&format!("g{i}"), &binary_to_gray(m, 200, 30).unwrap()).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    save_registry(&reg, dir.path()).unwrap();
    let back: TemplateRegistry = load_registry(dir.path()).unwrap();
    assert_eq!(back, reg);
    assert!(matches!(save_registry(&reg, dir.path()), Err(Error::Conflict(_))));
}

#[test]
fn scores_are_not_symmetric_in_general() {
    // kernels differ per template, so swapping roles changes the score
    let masks = gesture_masks(2, 42);
    let c: Vec<BinaryImage> = masks.iter().map(|m| resize_nearest(m, 128, 128).unwrap()).collect();
    let ta: GestureTemplate = GestureTemplate::from_canonical("a", c[0].clone(), 0.5).unwrap();
    let tb: GestureTemplate = GestureTemplate::from_canonical("b", c[1].clone(), 0.5).unwrap();
    let (ab, ba) = (score(&c[0], &tb).unwrap(), score(&c[1], &ta).unwrap());
    assert!(ab > 0.0 && ba > 0.0);
    assert_ne!(ab, ba);
}

#[test]
fn blank_query_reports_empty_foreground() {
    let mut reg: TemplateRegistry = TemplateRegistry::default();
    reg.enroll("a", &binary_to_gray(&gesture_masks(1, 1)[0], 200, 30).unwrap()).unwrap();
    let blank = binary_to_gray(&BinaryImage::zeros(64, 64).unwrap(), 200, 30).unwrap();
    assert!(matches!(reg.recognize(&blank), Err(Error::EmptyForeground)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_are_non_negative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_margin_mask(&mut r, 24, 24, 2);
        let b = random_margin_mask(&mut r, 24, 24, 2);
        let t: GestureTemplate = GestureTemplate::from_canonical("t", a, 0.5).unwrap();
        prop_assert!(score(&b, &t).unwrap() >= 0.0);
    }
}
