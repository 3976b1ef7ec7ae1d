use nilfix::jets::{
    algebra_lcs, example_basis, example_generators, group_class_stabilized, jet_exp, jet_log, span_contains, Jet2,
    JetError,
};
use nilfix::poly::rat;

fn gens(kk: u32, p: u32, l: u32) -> impl Fn(u32) -> Result<Vec<Jet2>, JetError> {
    move |k| Ok(example_generators(kk, p, l, &rat(1, 1), k).expect("valid parameters"))
}

#[test]
fn class_two_family() {
    let s = group_class_stabilized(gens(1, 2, 2), 3, 12, 6).unwrap();
    assert_eq!(s.class, Some(2));
    assert_eq!(s.stable_k, Some(5));
}

#[test]
fn class_three_family() {
    let s = group_class_stabilized(gens(1, 3, 3), 3, 12, 6).unwrap();
    assert_eq!(s.class, Some(3));
    assert_eq!(s.stable_k, Some(7));
}

/// With basis `X1, aX1, ..., a^(l-1) X1, Y1` only `[Y1, a^j X1] = j a^(j-1) X1`
/// survives, so each layer drops the top power of `alpha`.
#[test]
fn algebra_series_dimensions() {
    for (l, p, k, want) in [(2u32, 2u32, 9u32, vec![3usize, 1, 0]), (3, 3, 11, vec![4, 2, 1, 0])] {
        let basis = example_basis(1, p, l, k).unwrap();
        let lcs = algebra_lcs(&basis, 10).unwrap();
        assert_eq!(lcs.dims, want, "l = {l}");
        assert_eq!(lcs.step(), l as usize);
        // Layer j is spanned by X1, ..., a^(l-1-j) X1.
        for (j, layer) in lcs.layers.iter().enumerate().skip(1) {
            for (i, b) in basis.iter().enumerate().take(l as usize - j) {
                assert!(span_contains(layer, b), "l = {l}, layer {j}, power {i}");
            }
            assert!(!span_contains(layer, &basis[l as usize - j]));
        }
    }
}

#[test]
fn exp_and_log_invert_each_other_on_the_basis() {
    for z in example_basis(1, 3, 3, 9).unwrap() {
        assert_eq!(jet_log(&jet_exp(&z).unwrap()).unwrap(), z);
    }
}
