mod common;

use crossedge::mc::Estimate;
use crossedge::sampling::{
    label_one_probability, poisson_count, sample_fixed_pair, sample_poisson_torus, sample_poissonized_pair,
    sample_pooled_labeled, sample_truncated_normal, Density, LabeledSample, SeededRng,
};
use crossedge::PointCloud;

#[test]
fn poisson_counts_have_matching_mean_and_variance() {
    let mut r = SeededRng::new(1).rng();
    for mean in [3.0, 40.0, 2500.0] {
        let xs: Vec<f64> = (0..20_000).map(|_| poisson_count(mean, &mut r).unwrap() as f64).collect();
        let m = Estimate::from_samples(&xs);
        assert!(m.within(mean, 4.0), "{mean}: {m:?}");
        assert!((common::var(&xs) / mean - 1.0).abs() < 0.05);
    }
}

#[test]
fn pooled_and_separate_constructions_agree() {
    let f = Density::gaussian(vec![0.0, 0.0]);
    let g = Density::uniform_box_at(vec![-1.0, -1.0], 3.0);
    let root = SeededRng::new(2);
    let (mut a1, mut b1, mut ax, mut bx) = (vec![], vec![], vec![], vec![]);
    for i in 0..1000 {
        let a = sample_poissonized_pair(150.0, 100.0, &f, &g, &root.child(i)).unwrap();
        let b = sample_pooled_labeled(150.0, 100.0, &f, &g, &root.child(i).child(1)).unwrap();
        a1.push(a.n1 as f64);
        b1.push(b.n1 as f64);
        ax.push(a.group(2).map(|p| p[0]).sum::<f64>());
        bx.push(b.group(2).map(|p| p[0]).sum::<f64>());
    }
    for (x, y) in [(&a1, &b1), (&ax, &bx)] {
        let (ex, ey) = (Estimate::from_samples(x), Estimate::from_samples(y));
        let se = (ex.se * ex.se + ey.se * ey.se).sqrt();
        assert!((ex.value - ey.value).abs() < 3.0 * se, "{ex:?} vs {ey:?}");
    }
}

#[test]
fn label_probability_is_a_probability() {
    let f = Density::gaussian(vec![0.0]);
    let g = Density::uniform_box(1, 1.0);
    for x in [-3.0, 0.0, 0.5, 0.99, 2.0] {
        let pi = label_one_probability(60.0, 40.0, &f, &g, &[x]);
        assert!((0.0..=1.0).contains(&pi));
        if !(0.0..=1.0).contains(&x) {
            assert_eq!(pi, 1.0);
        }
    }
}

#[test]
fn fixed_pair_has_exact_sizes_and_label_order() {
    let f = Density::uniform_box(3, 1.0);
    let s = sample_fixed_pair(7, 5, &f, &f, &SeededRng::new(3)).unwrap();
    assert_eq!((s.n1, s.n2, s.len()), (7, 5, 12));
    assert_eq!(s.labels, [vec![1u8; 7], vec![2u8; 5]].concat());
}

#[test]
fn torus_process_fills_the_window() {
    let side = 10.0;
    let counts: Vec<f64> = (0..300)
        .map(|i| {
            let c = sample_poisson_torus(2.0, side, 2, &SeededRng::new(i)).unwrap();
            assert!(c.as_flat().iter().all(|&x| (0.0..side).contains(&x)));
            c.len() as f64
        })
        .collect();
    assert!(Estimate::from_samples(&counts).within(200.0, 4.0));
    assert!(sample_poisson_torus(1.0, 0.5, 1, &SeededRng::new(0)).is_err());
}

#[test]
fn truncated_normal_stays_in_the_ball() {
    let c = sample_truncated_normal(&[0.5, 0.0, 0.0], 2.0, 3000.0, &SeededRng::new(4)).unwrap();
    assert!(c.points().all(|p| p.iter().map(|x| x * x).sum::<f64>() <= 4.0));
    // rejection rate would be astronomically small
    assert!(sample_truncated_normal(&[30.0, 0.0], 1.0, 10.0, &SeededRng::new(0)).is_err());
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let f = Density::gaussian(vec![0.0; 4]);
    let a = sample_poissonized_pair(30.0, 30.0, &f, &f, &SeededRng::new(5).child(3)).unwrap();
    let b = sample_poissonized_pair(30.0, 30.0, &f, &f, &SeededRng::new(5).child(3)).unwrap();
    let c = sample_poissonized_pair(30.0, 30.0, &f, &f, &SeededRng::new(5).child(4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = Density::gaussian(vec![0.0, 1.0]);
    let s = sample_poissonized_pair(20.0, 10.0, &f, &f, &SeededRng::new(6)).unwrap();
    let path = dir.path().join("sample.csv");
    s.save(&path).unwrap();
    assert_eq!(LabeledSample::load(&path).unwrap(), s);

    let cloud_path = dir.path().join("cloud.csv");
    s.cloud.save(&cloud_path).unwrap();
    assert_eq!(PointCloud::load(&cloud_path).unwrap(), s.cloud);

    let bad = "x1,label\n0.5,1\n0.1,3\n";
    let err = LabeledSample::read_csv(bad.as_bytes()).unwrap_err();
    assert!(err.to_string().contains("label"), "{err}");
}
