use qfano::catalog::{group_names, load_group, ExpectedOutcome};
use qfano::grassmannian::GrassmannianIndex;
use qfano::group_action::orbits_on;
use qfano::kramer_mesner::{feasibility_screen, reduce_km, KmMatrix, ScreenKind};

#[test]
fn signatures_sizes_and_screens() {
    let lines = GrassmannianIndex::new(7, 2).unwrap();
    let planes = GrassmannianIndex::new(7, 3).unwrap();
    let mut failures = Vec::new();
    for name in group_names().unwrap() {
        let spec = load_group(&name).unwrap();
        let row = spec.expected.clone().unwrap();
        let g = spec.group().unwrap();
        assert_eq!(g.iso_label().as_deref(), Some(spec.iso_type.as_str()), "{name}");
        let m = KmMatrix::from_orbits(
            &name,
            &lines,
            &planes,
            orbits_on(&g, &lines).unwrap(),
            orbits_on(&g, &planes).unwrap(),
        );
        let r = reduce_km(&m, 1).unwrap();
        let screen = feasibility_screen(&r).unwrap().kind;
        let got = (m.row_orbits.signature(), m.col_orbits.signature(), r.signature(), r.size());
        let want = (row.t_orbits.clone(), row.k_orbits.clone(), row.reduced_k_orbits.clone(), row.size);
        if got != want {
            failures.push(format!("{name}: got {got:?}, table {want:?}"));
        }
        let expected_screen = match row.outcome {
            ExpectedOutcome::ZeroRow => ScreenKind::ZeroRow,
            ExpectedOutcome::OrbitSum => ScreenKind::OrbitSum,
            _ => ScreenKind::Unknown,
        };
        if screen != expected_screen {
            failures.push(format!("{name}: screen {screen:?}, expected {expected_screen:?}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
