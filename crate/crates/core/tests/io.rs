use empf::io::{
    load_charge_image, read_emk1, read_intensities, save_gray_png, save_grid, LoadMode, Render,
    LOAD_PADDING,
};
use empf::Error;
use ndarray::{ArrayD, IxDyn};
use proptest::prelude::*;

#[test]
fn white_png_in_binary_mode_is_all_charge_inside_the_pad() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("white.png");
    save_gray_png(&ArrayD::from_elem(IxDyn(&[6, 9]), 255u8), &path).unwrap();
    let img = load_charge_image(&path, LoadMode::Binary, 128.0).unwrap();
    let p = LOAD_PADDING;
    assert_eq!(img.shape(), &[6 + 2 * p, 9 + 2 * p]);
    for (i, &v) in img.values().indexed_iter() {
        let inside = (p..6 + p).contains(&i[0]) && (p..9 + p).contains(&i[1]);
        assert_eq!(v, if inside { 1.0 } else { 0.0 });
    }
}

#[test]
fn signed_mode_centres_mid_gray() {
    assert_eq!(LoadMode::Signed.map(0.0, 0.0), -1.0);
    assert_eq!(LoadMode::Signed.map(255.0, 0.0), 1.0);
    assert!(LoadMode::Signed.map(128.0, 0.0).abs() < 0.01);
    assert_eq!(LoadMode::Grayscale.map(255.0, 0.0), 1.0);
    assert_eq!(LoadMode::Binary.map(127.0, 128.0), 0.0);
}

#[test]
fn pgm_input_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.pgm");
    std::fs::write(&path, b"P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n").unwrap();
    let g = read_intensities(&path).unwrap();
    assert_eq!(g.shape(), &[2, 3]);
    assert_eq!(g[[1, 2]], 255.0);
    assert_eq!(g[[0, 1]], 10.0);
}

#[test]
fn constant_grid_normalizes_to_zero_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.pgm");
    save_grid(
        &ArrayD::from_elem(IxDyn(&[4, 5]), 3.25),
        &path,
        Render::PgmNorm,
    )
    .unwrap();
    let g = read_intensities(&path).unwrap();
    assert!(g.iter().all(|&v| v == 0.0));
}

#[test]
fn diverging_png_colours_by_sign() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.png");
    let grid = ArrayD::from_shape_vec(IxDyn(&[1, 3]), vec![-2.0, 0.0, 2.0]).unwrap();
    save_grid(&grid, &path, Render::PngDiverging).unwrap();
    let img = image::open(&path).unwrap().to_rgb8();
    assert_eq!(img.get_pixel(0, 0).0, [0, 0, 255]);
    assert_eq!(img.get_pixel(1, 0).0, [255, 255, 255]);
    assert_eq!(img.get_pixel(2, 0).0, [255, 0, 0]);
}

#[test]
fn unknown_formats_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.bmp");
    std::fs::write(&path, b"BM\0\0\0\0").unwrap();
    assert!(matches!(read_intensities(&path), Err(Error::Format(_))));
    assert!("tiff".parse::<Render>().is_err());
    assert!("ternary".parse::<LoadMode>().is_err());
}

#[test]
fn three_dimensional_grids_cannot_become_images() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ArrayD::zeros(IxDyn(&[2, 2, 2]));
    assert!(save_grid(&grid, &dir.path().join("a.png"), Render::PngDiverging).is_err());
    save_grid(&grid, &dir.path().join("a.emk"), Render::Raw).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn emk1_round_trip_is_bit_identical(shape in prop::collection::vec(1usize..6, 1..4), seed in any::<u64>()) {
        let len: usize = shape.iter().product();
        let values: Vec<f64> = (0..len)
            .map(|i| f64::from_bits(seed.rotate_left(i as u32) ^ i as u64))
            .map(|v| if v.is_finite() { v } else { -0.0 })
            .collect();
        let grid = ArrayD::from_shape_vec(IxDyn(&shape), values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.emk");
        save_grid(&grid, &path, Render::Raw).unwrap();
        let back = read_emk1(&path).unwrap();
        prop_assert_eq!(back.shape(), grid.shape());
        prop_assert!(back.iter().zip(grid.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
