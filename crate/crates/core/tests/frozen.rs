//! Reference values computed independently at 30 digits.

use oneparticle::dynamics::homogeneous_ground_population;
use oneparticle::information::markov_decay_curve;

#[test]
fn decay_curve_values() {
    let pts = markov_decay_curve(1.0, &[1.0, 3.0]).unwrap();
    assert!((pts[0].1 - 0.657_817_430_394_294_5).abs() < 1e-14);
    assert!((pts[1].1 - 0.197_887_801_243_208_3).abs() < 1e-14);
}

#[test]
fn decay_curve_scales_with_rate() {
    let slow = markov_decay_curve(0.5, &[6.0]).unwrap();
    assert!((slow[0].1 - 0.197_887_801_243_208_3).abs() < 1e-14);
}

#[test]
fn sinusoidal_ground_population() {
    let p = homogeneous_ground_population(|t: f64| 1.0 + t.sin(), 0.3, 2.0).unwrap();
    assert!((p - 0.977_012_892_885_985_6).abs() < 1e-11);
}
