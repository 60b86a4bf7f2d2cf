use std::path::Path;

use lgpca::harness::{
    self, container, generate, identify_probes, run_identify_evaluate, run_shift_experiment,
    run_train_enroll, shift_landmarks, write_dataset, Eye, FeatureMode, Manifest, PipelineConfig,
    Sample, SynthParams, SHIFT_DIRECTIONS,
};
use lgpca::imaging::{Landmarks, NormalizationMethod, Point};
use lgpca::{Error, Result};

fn small(identities: usize) -> harness::SynthData {
    generate(&SynthParams {
        identities,
        ..SynthParams::default()
    })
    .unwrap()
}

#[test]
fn three_identities_give_a_rank_bounded_model() {
    let data = small(3);
    let c = run_train_enroll(&data.gallery, &PipelineConfig::default()).unwrap();
    assert_eq!(c.gallery.len(), 3);
    assert!(c.model.components() <= 3);
    assert_eq!(c.model.dim(), 10008);
}

#[test]
fn training_needs_two_images() {
    let data = small(2);
    assert!(run_train_enroll(&data.gallery[..1], &PipelineConfig::default()).is_err());
}

#[test]
fn gallery_images_as_probes_match_themselves() {
    let data = small(5);
    for features in [FeatureMode::LogGabor, FeatureMode::Grayscale] {
        let config = PipelineConfig {
            features,
            ..PipelineConfig::default()
        };
        let c = run_train_enroll(&data.gallery, &config).unwrap();
        let report = run_identify_evaluate(&c, &data.gallery, None).unwrap();
        assert_eq!(report.cmc.first1, 100.0);
        assert_eq!(report.cmc.cmca, 0.0);
    }
}

#[test]
fn three_point_pipeline_runs() {
    let data = small(4);
    let config = PipelineConfig {
        normalization: NormalizationMethod::ThreePoint,
        ..PipelineConfig::default()
    };
    let c = run_train_enroll(&data.gallery, &config).unwrap();
    assert_eq!(c.model.dim(), 9240);
    let report = run_identify_evaluate(&c, &data.probes, None).unwrap();
    assert!(report.cmc.cmc.windows(2).all(|w| w[0] <= w[1]));
    assert!(run_shift_experiment(&c, &data.probes, &[0.0], Eye::Left).is_err());
}

#[test]
fn missing_chin_fails_three_point() {
    let mut data = small(3);
    data.gallery[1].landmarks.chin = None;
    let config = PipelineConfig {
        normalization: NormalizationMethod::ThreePoint,
        ..PipelineConfig::default()
    };
    assert!(run_train_enroll(&data.gallery, &config).is_err());
}

#[test]
fn unenrolled_probe_is_an_error() {
    let data = small(4);
    let c = run_train_enroll(&data.gallery[..3], &PipelineConfig::default()).unwrap();
    let stranger = vec![data.probes[3].clone()];
    assert!(run_identify_evaluate(&c, &stranger, None).is_err());
}

#[test]
fn layout_mismatch_is_reported() {
    let data = small(3);
    let c = run_train_enroll(&data.gallery, &PipelineConfig::default()).unwrap();
    let mut five_scales = PipelineConfig::default();
    five_scales.filter.num_scales = 5;
    let err = run_identify_evaluate(&c, &data.probes, Some(&five_scales)).unwrap_err();
    assert!(matches!(err, Error::LayoutMismatch { .. }));
    let gray = PipelineConfig {
        features: FeatureMode::Grayscale,
        ..PipelineConfig::default()
    };
    assert!(matches!(
        run_identify_evaluate(&c, &data.probes, Some(&gray)),
        Err(Error::LayoutMismatch { .. })
    ));
}

#[test]
fn tau_reports_rejections() {
    let data = small(4);
    let c = run_train_enroll(&data.gallery, &PipelineConfig::default()).unwrap();
    let strict = PipelineConfig {
        tau: Some(-1.0),
        ..PipelineConfig::default()
    };
    let report = run_identify_evaluate(&c, &data.probes, Some(&strict)).unwrap();
    let (tau, counts) = report.rejection.unwrap();
    assert_eq!(tau, -1.0);
    assert_eq!(counts.rejected, 4);
    let outcomes = identify_probes(&c, &data.probes, Some(&strict)).unwrap();
    assert_eq!(outcomes.len(), 4);
    assert!(report.to_key_values().contains("rejected=4\n"));
}

#[test]
fn duplicate_gallery_identities_rank_by_best_entry() {
    let data = small(3);
    let mut gallery = data.gallery.clone();
    gallery.push(data.probes[0].clone());
    let c = run_train_enroll(&gallery, &PipelineConfig::default()).unwrap();
    assert_eq!(c.gallery.len(), 4);
    let outcomes = identify_probes(&c, &data.probes, None).unwrap();
    for o in &outcomes {
        assert_eq!(o.ranking.labels().len(), 3);
    }
}

#[test]
fn container_round_trip_and_corruption() -> Result<()> {
    let data = small(4);
    let c = run_train_enroll(&data.gallery, &PipelineConfig::default())?;
    let bytes = container::encode(&c);
    let loaded = container::decode(&bytes)?;
    assert_eq!(loaded, c);
    assert_eq!(container::encode(&loaded), bytes);
    let before = run_identify_evaluate(&c, &data.probes, None)?;
    let after = run_identify_evaluate(&loaded, &data.probes, None)?;
    assert_eq!(before.to_key_values(), after.to_key_values());

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(
        container::decode(&bad_magic),
        Err(Error::Format(_))
    ));
    let mut bad_version = bytes.clone();
    bad_version[8] = 9;
    assert!(matches!(
        container::decode(&bad_version),
        Err(Error::Format(_))
    ));
    for cut in [4, 20, bytes.len() / 2, bytes.len() - 1] {
        assert!(container::decode(&bytes[..cut]).is_err(), "cut at {cut}");
    }
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(container::decode(&trailing).is_err());

    // Flip one basis entry: orthonormality no longer holds.
    let name = bytes.windows(5).position(|w| w == b"basis").unwrap();
    let mut broken = bytes.clone();
    broken[name + 5 + 8 + 7] ^= 0x40;
    assert!(container::decode(&broken).is_err());
    Ok(())
}

#[test]
fn manifest_driven_run_on_disk() -> Result<()> {
    let dir = tempfile::tempdir().unwrap();
    let data = small(4);
    write_dataset(&data, dir.path())?;
    let manifest = Manifest::read(dir.path().join("manifest.csv"))?;
    assert_eq!(manifest.entries.len(), 8);
    let gallery = harness::load_samples(&manifest.subset(Some("gallery")))?;
    let probes = harness::load_samples(&manifest.subset(Some("probe")))?;
    assert_eq!(gallery.len(), 4);
    let c = run_train_enroll(&gallery, &PipelineConfig::default())?;
    let in_memory = run_train_enroll(&data.gallery, &PipelineConfig::default())?;
    assert_eq!(container::encode(&c), container::encode(&in_memory));
    let path = dir.path().join("model.lgm");
    harness::save(&c, &path)?;
    let report = run_identify_evaluate(&harness::load(&path)?, &probes, None)?;
    assert_eq!(report.cmc.probes, 4);

    let missing = Manifest::parse(
        "path,label,set,lx,ly,rx,ry\nnope.pgm,a,s,1,2,3,4\n",
        dir.path(),
    )?;
    assert!(matches!(
        harness::load_samples(&missing.entries),
        Err(Error::Io { .. })
    ));
    Ok(())
}

#[test]
fn shift_geometry() {
    let lm = Landmarks::two_point(Point::new(50.0, 80.0), Point::new(150.0, 80.0));
    let moved: Vec<Point<f64>> = SHIFT_DIRECTIONS
        .iter()
        .map(|&d| shift_landmarks(&lm, Eye::Left, 4.0, d).left_eye)
        .collect();
    assert_eq!(
        moved,
        vec![
            Point::new(54.0, 80.0),
            Point::new(50.0, 84.0),
            Point::new(46.0, 80.0),
            Point::new(50.0, 76.0),
        ]
    );
    let right = shift_landmarks(&lm, Eye::Right, 4.0, SHIFT_DIRECTIONS[0]);
    assert_eq!(right.left_eye, lm.left_eye);
    assert_eq!(right.right_eye, Point::new(154.0, 80.0));
}

#[test]
fn zero_shift_reproduces_baseline() {
    let data = small(6);
    let c = run_train_enroll(&data.gallery, &PipelineConfig::default()).unwrap();
    let baseline = run_identify_evaluate(&c, &data.probes, None).unwrap();
    let rows = run_shift_experiment(&c, &data.probes, &[0.0, 4.0], Eye::Right).unwrap();
    assert_eq!(rows[0].first1, baseline.cmc.first1);
    assert_eq!(rows[0].eer, baseline.roc.eer);
    assert_eq!((rows[0].first1d, rows[0].eerd), (0.0, 0.0));
    assert!(run_shift_experiment(&c, &data.probes, &[-2.0], Eye::Left).is_err());
}

#[test]
fn shift_outside_the_image_is_an_error() {
    let data = small(3);
    let c = run_train_enroll(&data.gallery, &PipelineConfig::default()).unwrap();
    let mut probes: Vec<Sample> = data.probes.clone();
    probes[0].landmarks.left_eye = Point::new(1.0, 100.0);
    assert!(run_shift_experiment(&c, &probes, &[12.0], Eye::Left).is_err());
}

#[test]
fn reports_are_deterministic() {
    let data = small(5);
    let report = || {
        let c = run_train_enroll(&data.gallery, &PipelineConfig::default()).unwrap();
        run_identify_evaluate(&c, &data.probes, None)
            .unwrap()
            .to_key_values()
    };
    assert_eq!(report(), report());
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pipeline.cfg");
    let mut config = PipelineConfig::default();
    config.filter.num_scales = 3;
    config.components = Some(12);
    std::fs::write(&path, config.to_text()).unwrap();
    assert_eq!(PipelineConfig::read(&path).unwrap(), config);
    assert!(PipelineConfig::read(Path::new("/nonexistent/x.cfg")).is_err());
}
