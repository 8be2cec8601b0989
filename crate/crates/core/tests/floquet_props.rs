mod common;

use floqcert::floquet::{apply_symbol, coefficient_norm_sqr, transform_at};
use floqcert::{inverse_transform, symbol, transform, VertexSite};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn inverse_undoes_transform((a, f) in common::operator_and_function(3, 6)) {
        let ft = transform(&f, a.domain_size()).unwrap();
        prop_assert_eq!(inverse_transform(&ft), f);
    }

    #[test]
    fn transform_intertwines_operator_and_symbol((a, f) in common::operator_and_function(3, 6)) {
        let m = symbol(&a).unwrap();
        let lhs = transform(&a.apply(&f).unwrap(), a.domain_size()).unwrap();
        let rhs = apply_symbol(&m, &transform(&f, a.domain_size()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn coefficient_parseval((a, f) in common::operator_and_function(3, 6)) {
        let ft = transform(&f, a.domain_size()).unwrap();
        prop_assert_eq!(coefficient_norm_sqr(&ft), f.norm_sqr());
    }

    #[test]
    fn translation_is_multiplication_by_a_monomial(
        (a, f) in common::operator_and_function(2, 5),
        g in proptest::collection::vec(-2i64..=2, 2),
    ) {
        let dim = a.dimension();
        let g = floqcert::Shift(g[..dim].to_vec());
        let shifted = transform(&f.translate(&g), a.domain_size()).unwrap();
        let neg: Vec<i64> = g.0.iter().map(|x| -x).collect();
        prop_assert_eq!(shifted, transform(&f, a.domain_size()).unwrap().mul_monomial(&neg));
    }

    #[test]
    fn transform_at_a_translate_is_a_monomial_multiple((a, f) in common::operator_and_function(2, 5), v in 0usize..3) {
        let dim = a.dimension();
        let v = v % a.domain_size();
        let g = floqcert::Shift::unit(dim, 0);
        let at = transform_at(&f, &VertexSite { vertex: v, cell: g.clone() });
        let base = transform(&f, a.domain_size()).unwrap().components[v].mul_monomial(&g.0);
        prop_assert_eq!(at, base);
    }
}
