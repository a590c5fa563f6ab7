#![allow(clippy::excessive_precision)]

mod common;

use common::*;
use opuc_zeros::ensembles::*;
use proptest::prelude::*;

fn spec(s: &str) -> EnsembleSpec {
    s.parse().unwrap()
}

#[test]
fn point_mass_update_matches_moment_oracle() {
    for base in ["free", "power_decay:0.3:2"] {
        for t in [0.25, 0.5, 0.9] {
            for row in geronimus_check(&spec(base), t, 12).unwrap() {
                assert!(
                    (row.recursion - row.moments).abs() <= 1e-8,
                    "{base} t={t} k={}: {} vs {}",
                    row.k,
                    row.recursion,
                    row.moments
                );
            }
        }
    }
}

#[test]
fn half_mass_on_arclength_is_harmonic() {
    let s = spec("geronimus:0.5:free").sequence().unwrap();
    for n in 1..=2000 {
        let a = s.get(n - 1).unwrap();
        assert!((a - 1.0 / (n as f64 + 1.0)).abs() <= 1e-12, "n={n}: {a}");
    }
}

fn scaled_coefficient(base: &str, t: f64) -> impl Fn(usize) -> f64 {
    let s = EnsembleSpec::Geronimus {
        base: Box::new(spec(base)),
        t,
    }
    .sequence()
    .unwrap();
    move |n| n as f64 * s.get(n - 1).unwrap()
}

#[test]
fn point_mass_coefficients_decay_like_one_over_n() {
    for t in [0.25, 0.5] {
        let f = scaled_coefficient("free", t);
        assert!(rel_err(f(200), f(400)) <= 0.02, "free t={t}");
    }
    for base in ["free", "power_decay:0.3:2"] {
        for t in [0.25, 0.5, 0.9] {
            let f = scaled_coefficient(base, t);
            let (a, b) = (f(2000), f(4000));
            assert!(rel_err(a, b) <= 0.02, "{base} t={t}: {a} vs {b}");
            assert!(a < b && b < 1.0);
        }
    }
}

#[test]
fn point_mass_over_power_decay_reference_values() {
    // n alpha_{n-1} from 50-digit moments of the Bernstein-Szego measure
    let reference = [
        (
            0.25,
            [
                0.631_290_261_914_713_4,
                0.953_051_219_889_564_4,
                0.974_887_951_104_362_1,
            ],
        ),
        (
            0.5,
            [
                0.547_984_232_553_624_2,
                0.938_006_647_670_328_8,
                0.966_930_891_385_592_4,
            ],
        ),
        (
            0.9,
            [
                0.224_440_043_138_925_0,
                0.788_661_440_294_409_3,
                0.880_680_406_380_599_1,
            ],
        ),
    ];
    for (t, values) in reference {
        let f = scaled_coefficient("power_decay:0.3:2", t);
        for (n, v) in [12, 200, 400].into_iter().zip(values) {
            assert!(rel_err(f(n), v) <= 1e-12, "t={t} n={n}: {} vs {v}", f(n));
        }
    }
}

#[test]
fn point_mass_on_arclength_closed_form() {
    // alpha_{n-1} = 1 / (n + t / (1 - t))
    for t in [0.1, 0.25, 0.5, 0.9, 0.99] {
        let s = EnsembleSpec::Geronimus {
            base: Box::new(EnsembleSpec::Free),
            t,
        }
        .sequence()
        .unwrap();
        for n in 1..=1000 {
            let exact = 1.0 / (n as f64 + t / (1.0 - t));
            assert!(
                rel_err(s.get(n - 1).unwrap(), exact) <= 1e-13,
                "t={t} n={n}"
            );
        }
    }
}

#[test]
fn named_generators() {
    let s = spec("power_decay:0.3:2").sequence().unwrap();
    assert_eq!(s.get(0).unwrap(), 0.3);
    assert_eq!(s.get(1).unwrap(), 0.3);
    assert!((s.get(10).unwrap() - 0.003).abs() < 1e-18);
    let s = spec("power_tail:1:2:2").sequence().unwrap();
    assert_eq!(&s.prefix(4).unwrap()[..], &[0.0, 0.0, 0.25, 1.0 / 9.0][..]);
    let s = materialize(&spec("constant:-0.4"), 5).unwrap();
    assert_eq!(&s.prefix(5).unwrap()[..], &[-0.4; 5][..]);
    assert!(s.get(5).is_err());
}

#[test]
fn rejects_invalid_specs() {
    for bad in [
        "constant:1",
        "constant:-1.5",
        "power_decay:0.3:0",
        "power_decay:1:2",
        "power_tail:2:1:1",
        "power_tail:0.5:1:0",
        "explicit:0.1,1.0",
        "geronimus:0:free",
        "geronimus:1:free",
        "geronimus:0.5:constant:2",
        "unknown",
        "free:1",
        "constant:abc",
    ] {
        assert!(bad.parse::<EnsembleSpec>().is_err(), "{bad}");
    }
}

fn any_spec() -> impl Strategy<Value = EnsembleSpec> {
    let leaf = prop_oneof![
        Just(EnsembleSpec::Free),
        (-0.95f64..0.95).prop_map(|a| EnsembleSpec::Constant { a }),
        (-0.95f64..0.95, 0.1f64..4.0).prop_map(|(c, p)| EnsembleSpec::PowerDecay { c, p }),
        (-0.95f64..0.95, 0.1f64..4.0, 1usize..20)
            .prop_map(|(c, p, start)| EnsembleSpec::PowerTail { c, p, start }),
        alphas(0..=10, 0.95).prop_map(EnsembleSpec::Explicit),
    ];
    leaf.prop_recursive(2, 4, 1, |inner| {
        (inner, 0.01f64..0.99).prop_map(|(base, t)| EnsembleSpec::Geronimus {
            base: Box::new(base),
            t,
        })
    })
}

proptest! {
    #![proptest_config(cases(256))]

    #[test]
    fn coefficients_stay_inside_the_disk(s in any_spec()) {
        let seq = s.sequence().unwrap();
        let len = seq.len_hint().map_or(500, |l| l.min(500));
        for &a in seq.prefix(len).unwrap().iter() {
            prop_assert!(a.abs() < 1.0, "{} gave {}", s, a);
        }
    }

    #[test]
    fn text_and_serde_round_trip(s in any_spec()) {
        let text = s.to_string();
        prop_assert_eq!(text.parse::<EnsembleSpec>().unwrap(), s.clone());
        let json = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(serde_json::from_str::<EnsembleSpec>(&json).unwrap(), s);
    }

    #[test]
    fn point_mass_update_matches_moments_for_finite_bases(
        base in alphas(0..=8, 0.6),
        t in 0.1f64..0.95,
    ) {
        let rows = geronimus_check(&EnsembleSpec::Explicit(base), t, 10).unwrap();
        for row in rows {
            prop_assert!((row.recursion - row.moments).abs() <= 1e-8, "{:?}", row);
        }
    }
}
