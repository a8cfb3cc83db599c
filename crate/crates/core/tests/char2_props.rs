use proptest::prelude::*;
use theta4::char2::{
    self, enumerate_characteristics, even_points, kappa_value, parity, translate, weil_pairing,
    Characteristic,
};

fn all(g: usize) -> Vec<Characteristic> {
    enumerate_characteristics(g).unwrap()
}

fn add(a: &Characteristic, b: &Characteristic) -> Characteristic {
    translate(a, b).unwrap()
}

fn arb_char(g: usize) -> impl Strategy<Value = Characteristic> {
    (0..1usize << (2 * g)).prop_map(move |i| Characteristic::from_index(g, i).unwrap())
}

fn arb_triple() -> impl Strategy<Value = (Characteristic, Characteristic, Characteristic)> {
    (3usize..=4).prop_flat_map(|g| (arb_char(g), arb_char(g), arb_char(g)))
}

#[test]
fn pairing_bilinear_exhaustive_small_genus() {
    for g in 1..=2 {
        for a in all(g) {
            for b in all(g) {
                assert_eq!(weil_pairing(&a, &b).unwrap(), weil_pairing(&b, &a).unwrap());
                for x in all(g) {
                    assert_eq!(
                        weil_pairing(&add(&a, &b), &x).unwrap(),
                        weil_pairing(&a, &x).unwrap() * weil_pairing(&b, &x).unwrap()
                    );
                }
            }
        }
    }
}

#[test]
fn quadratic_form_axiom_exhaustive_small_genus() {
    for g in 1..=2 {
        for c in all(g) {
            for a in all(g) {
                for b in all(g) {
                    assert_eq!(
                        kappa_value(&c, &add(&a, &b)).unwrap(),
                        kappa_value(&c, &a).unwrap()
                            * kappa_value(&c, &b).unwrap()
                            * weil_pairing(&a, &b).unwrap()
                    );
                }
            }
        }
    }
}

#[test]
fn translate_even_iff_even_point_exhaustive() {
    for g in 1..=3 {
        for c in all(g).into_iter().filter(Characteristic::is_even) {
            let pts = even_points(&c).unwrap();
            assert_eq!(pts.len(), char2::even_count(g));
            assert!(pts.windows(2).all(|w| w[0] < w[1]));
            for b in all(g) {
                assert_eq!(add(&b, &c).is_even(), pts.contains(&b), "b = {b}, c = {c}");
            }
        }
    }
}

#[test]
fn translate_acts_through_the_pairing_exhaustive() {
    for g in 1..=2 {
        for b in all(g) {
            for c in all(g) {
                let moved = add(&b, &c);
                for x in all(g) {
                    assert_eq!(
                        kappa_value(&moved, &x).unwrap(),
                        weil_pairing(&b, &x).unwrap() * kappa_value(&c, &x).unwrap()
                    );
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn pairing_bilinear_sampled((a, b, x) in arb_triple()) {
        prop_assert_eq!(
            weil_pairing(&add(&a, &b), &x).unwrap(),
            weil_pairing(&a, &x).unwrap() * weil_pairing(&b, &x).unwrap()
        );
    }

    #[test]
    fn quadratic_form_axiom_sampled((c, a, b) in arb_triple()) {
        prop_assert_eq!(
            kappa_value(&c, &add(&a, &b)).unwrap(),
            kappa_value(&c, &a).unwrap() * kappa_value(&c, &b).unwrap() * weil_pairing(&a, &b).unwrap()
        );
    }

    #[test]
    fn index_and_text_roundtrip(c in (1usize..=6).prop_flat_map(arb_char)) {
        prop_assert_eq!(Characteristic::from_index(c.genus(), c.index()).unwrap(), c);
        prop_assert_eq!(c.to_string().parse::<Characteristic>().unwrap(), c);
        let js = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(serde_json::from_str::<Characteristic>(&js).unwrap(), c);
    }

    #[test]
    fn parity_matches_zero_form(c in (1usize..=4).prop_flat_map(arb_char)) {
        let zero = Characteristic::zero(c.genus()).unwrap();
        prop_assert_eq!(kappa_value(&zero, &c).unwrap(), parity(&c));
    }
}

#[test]
fn enumeration_is_deterministic_and_sorted() {
    for g in 1..=6 {
        let a = all(g);
        assert_eq!(a, all(g));
        assert_eq!(a.len(), 1 << (2 * g));
        assert!(a.iter().enumerate().all(|(i, c)| c.index() == i));
    }
}
