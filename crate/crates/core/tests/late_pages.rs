//! A cocycle whose first nonzero differential lands after the page `q + m + 2`
//! predicted for the target row. E_inf is read from the stable page instead.

use supersheaf::cech::{cohomology, ParityDims, WindowSpec};
use supersheaf::gluing::{elementary_cochain, exp, order, twisted_complex, Order};
use supersheaf::sheaf::SheafDescriptor;
use supersheaf::spectral::{converge, theorem8_check, SpectralSequence};

fn order_three() -> (SheafDescriptor, supersheaf::gluing::GluingCocycle) {
    let d = SheafDescriptor::on(1, 3, &[0], &[0]);
    let a = exp(&elementary_cochain(&d, 0, 1, -1, &[1, 2, 3]).unwrap());
    (d, a)
}

#[test]
fn order_three_differential_is_d3() {
    let (d, a) = order_three();
    assert_eq!(order(&d, &a), Order::Order(3));
    let fc = twisted_complex(&d, &a, WindowSpec::Auto).unwrap().filtered();
    let mut ss = SpectralSequence::new(&fc);
    assert!(ss.differential(1).is_zero());
    assert!(ss.differential(2).is_zero());
    let d3 = ss.differential(3);
    assert!(!d3.is_zero());
    let live: Vec<_> = d3.maps.iter().filter(|(_, m)| !m.is_zero()).map(|(k, _)| *k).collect();
    assert_eq!(live, vec![(0, 0)]);
    assert_eq!(d3.target((0, 0)), (3, -2));
    let t = theorem8_check(&d, &a).unwrap();
    assert_eq!((t.k, t.first_nonzero_page, t.symbol_match), (Some(3), Some(3), Some(true)));
}

#[test]
fn row_bound_undershoots_but_totals_agree() {
    let (d, a) = order_three();
    let cx = twisted_complex(&d, &a, WindowSpec::Auto).unwrap();
    let rep = converge(&cx.filtered());
    // Target row q = -2 with m = 3 predicts stability from page 3, yet d_3 is nonzero there.
    assert!(!rep.r0_bound_ok);
    assert!(rep.all_ok());
    let h = cohomology(&cx).h;
    assert_eq!(h, vec![ParityDims { even: 1, odd: 0 }, ParityDims { even: 5, odd: 4 }]);
    assert_eq!(rep.e_infinity_totals(), h);
}
