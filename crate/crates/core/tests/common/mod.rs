//! Strategies shared by the property suite and the acceptance harness.

use opworkbench::expr::{Expr, NAMES};
use proptest::prelude::*;

pub fn leaf() -> BoxedStrategy<Expr> {
    prop_oneof![
        (0.0..1e6f64).prop_map(Expr::Number),
        (0u32..20).prop_map(|k| Expr::Number(k as f64)),
        Just(Expr::ImagUnit),
        prop::sample::select(NAMES.to_vec()).prop_map(|s| Expr::Name(s.to_string())),
        (1u8..=3).prop_map(Expr::Sigma),
        prop::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), 2..6)
            .prop_map(|v| Expr::Word(v.into_iter().collect())),
    ]
    .boxed()
}

/// Trees the parser can produce: binary chains associate left, `-` leads an
/// expression only, and lower-precedence children sit inside `Paren`.
pub fn canonical_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 48, 3, |inner| {
        let atom = prop_oneof![2 => leaf(), 1 => inner.prop_map(|e| Expr::Paren(Box::new(e)))];
        let factor = (atom, any::<bool>(), prop::option::of(0u32..6)).prop_map(|(a, adj, pow)| {
            let mut e = if adj { Expr::Adjoint(Box::new(a)) } else { a };
            if let Some(k) = pow {
                e = Expr::Power(Box::new(e), k);
            }
            e
        });
        let term = prop::collection::vec((factor, any::<bool>()), 1..4).prop_map(|fs| {
            let mut it = fs.into_iter();
            let (mut acc, _) = it.next().unwrap();
            for (f, tensor) in it {
                acc = if tensor {
                    Expr::Tensor(Box::new(acc), Box::new(f))
                } else {
                    Expr::Mul(Box::new(acc), Box::new(f))
                };
            }
            acc
        });
        (any::<bool>(), prop::collection::vec((term, any::<bool>()), 1..4)).prop_map(|(neg, ts)| {
            let mut it = ts.into_iter();
            let (first, _) = it.next().unwrap();
            let mut acc = if neg { Expr::Neg(Box::new(first)) } else { first };
            for (t, plus) in it {
                acc = if plus {
                    Expr::Add(Box::new(acc), Box::new(t))
                } else {
                    Expr::Sub(Box::new(acc), Box::new(t))
                };
            }
            acc
        })
    })
}


/// Strings biased toward grammar tokens so the fuzzer reaches deep states.
pub fn token_soup() -> impl Strategy<Value = String> {
    let tok = prop::sample::select(vec![
        "X", "Y", "Z", "I", "H", "CNOT", "E01", "sigma[", "]", "2", "0.5", "i", "+", "-", "*", "ox", "⊗", "'",
        "^", "(", ")", " ", "IXZZX", "9999999999", ".", "..", "^7", "[", "é", "\0",
    ]);
    prop::collection::vec(tok, 0..24).prop_map(|v| v.concat())
}
