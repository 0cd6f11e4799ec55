use proptest::prelude::*;
use reflexgrid::algebra::Symbol;
use reflexgrid::{parse_expression, Atom, Polynomial, Word};

fn atom_pool() -> Vec<Atom> {
    vec![
        Atom::new('T').unwrap(),
        Atom::new('x').unwrap(),
        Atom::new('y').unwrap(),
        Atom::indexed('a', 0).unwrap(),
        Atom::indexed('a', 1).unwrap(),
        Atom::indexed('a', 12).unwrap(),
    ]
}

fn atom() -> impl Strategy<Value = Atom> {
    prop::sample::select(atom_pool())
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(atom(), 0..=4).prop_map(Word::from_atoms)
}

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(word(), 0..=8).prop_map(|ws| ws.into_iter().collect())
}

/// Raw word with unit placeholders sprinkled in.
fn raw_word() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(prop::option::of(atom()), 0..=6).prop_map(|v| {
        v.into_iter()
            .map(|a| a.map_or(Symbol::Unit, Symbol::Atom))
            .collect()
    })
}

fn add(p: &Polynomial, q: &Polynomial) -> Polynomial {
    Polynomial::add(p, q)
}

fn mul(p: &Polynomial, q: &Polynomial) -> Polynomial {
    Polynomial::mul(p, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn add_commutes(p in poly(), q in poly()) {
        prop_assert_eq!(add(&p, &q), add(&q, &p));
    }

    #[test]
    fn add_associates(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(add(&add(&p, &q), &r), add(&p, &add(&q, &r)));
    }

    #[test]
    fn add_is_idempotent_with_zero_identity(p in poly()) {
        prop_assert_eq!(add(&p, &p), p.clone());
        prop_assert_eq!(add(&p, &Polynomial::zero()), p);
    }

    #[test]
    fn mul_associates(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(mul(&mul(&p, &q), &r), mul(&p, &mul(&q, &r)));
    }

    #[test]
    fn mul_distributes_both_sides(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(mul(&add(&p, &q), &r), add(&mul(&p, &r), &mul(&q, &r)));
        prop_assert_eq!(mul(&r, &add(&p, &q)), add(&mul(&r, &p), &mul(&r, &q)));
    }

    #[test]
    fn unit_is_two_sided_identity(p in poly()) {
        prop_assert_eq!(mul(&p, &Polynomial::one()), p.clone());
        prop_assert_eq!(mul(&Polynomial::one(), &p), p);
    }

    #[test]
    fn zeroth_power_is_unit(p in poly()) {
        prop_assert_eq!(p.pow(0), Polynomial::one());
    }

    #[test]
    fn pow_is_repeated_product(p in poly(), n in 0u32..4) {
        let mut expected = Polynomial::one();
        for _ in 0..n {
            expected = mul(&expected, &p);
        }
        prop_assert_eq!(p.pow(n), expected);
    }

    #[test]
    fn product_size_bound(p in poly(), q in poly()) {
        prop_assert!(mul(&p, &q).len() <= p.len() * q.len());
    }

    #[test]
    fn normalize_is_idempotent(raw in prop::collection::vec(raw_word(), 0..=8)) {
        let once = Polynomial::normalize(raw.clone());
        let again = Polynomial::normalize(
            once.words().map(|w| w.atoms().iter().copied().map(Symbol::Atom).collect::<Vec<_>>()),
        );
        prop_assert_eq!(&again, &once);
        // cancelling units by hand gives the same canonical form
        let manual: Polynomial = raw
            .iter()
            .map(|w| {
                Word::from_atoms(w.iter().filter_map(|s| match s {
                    Symbol::Atom(a) => Some(*a),
                    Symbol::Unit => None,
                }))
            })
            .collect();
        prop_assert_eq!(once, manual);
    }

    #[test]
    fn render_parse_round_trip(p in poly()) {
        let text = p.to_canonical_string();
        prop_assert_eq!(parse_expression(&text).unwrap(), p);
    }

    #[test]
    fn canonical_order_is_length_then_lexicographic(p in poly()) {
        let words: Vec<&Word> = p.words().collect();
        for pair in words.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            prop_assert!(a.len() < b.len() || (a.len() == b.len() && a.atoms() < b.atoms()));
        }
    }
}

#[test]
fn product_is_not_commutative() {
    let x: Polynomial = "x".parse().unwrap();
    let y: Polynomial = "y".parse().unwrap();
    assert_ne!(mul(&x, &y), mul(&y, &x));
}
