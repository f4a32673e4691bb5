use quadalloc::oracle::{brute_force_empty_pixel, Grid, Oracle, DEFAULT_BUDGET};
use quadalloc::realloc::make_empty_pixel;
use quadalloc::worst_case::build_worst_case;
use quadalloc::{Configuration, CostLedger, Dyadic, ModuleId, PixelPath, DEFAULT_MAX_DEPTH};

fn path(q: &[u8]) -> PixelPath {
    PixelPath::from_quadrants(q.iter().copied())
}

const THREE_PER_QUARTER: &str = "((O:0O:1O:2E)(O:3O:4O:5E)(O:6O:7O:8E)(O:9O:10O:11E))";

#[test]
fn canonical_form_of_three_squares_per_quarter() {
    let t = build_worst_case::<Dyadic>(1).unwrap();
    assert_eq!(t.to_canonical(), THREE_PER_QUARTER);
    let parsed = Configuration::from_canonical(THREE_PER_QUARTER, DEFAULT_MAX_DEPTH).unwrap();
    assert!(parsed == t);
    assert_eq!(parsed.position(ModuleId(4)), Some(path(&[1, 1])));
}

#[test]
fn merging_four_holes_into_a_quarter() {
    let mut t = Configuration::from_canonical(THREE_PER_QUARTER, 2).unwrap();
    let grid = Grid::from_tree(&t).unwrap();
    assert_eq!(
        brute_force_empty_pixel(&grid, 1, DEFAULT_BUDGET).unwrap(),
        Some(3)
    );
    assert_eq!(Oracle::default().min_moves(&grid, 1).unwrap(), Some(3));

    let mut ledger = CostLedger::traced(1);
    let p = make_empty_pixel(&mut t, 1, &mut ledger).unwrap();
    assert_eq!(p, path(&[0]));
    assert_eq!(ledger.moves, 3);
    assert_eq!(ledger.total_volume, Dyadic::new(3, -2));
    let moves: Vec<(PixelPath, PixelPath)> = ledger
        .trace
        .unwrap()
        .iter()
        .map(|r| (r.from, r.to))
        .collect();
    assert_eq!(
        moves,
        vec![
            (path(&[0, 0]), path(&[1, 3])),
            (path(&[0, 1]), path(&[2, 3])),
            (path(&[0, 2]), path(&[3, 3])),
        ]
    );
    assert_eq!(
        t.to_canonical(),
        "(E(O:3O:4O:5O:0)(O:6O:7O:8O:1)(O:9O:10O:11O:2))"
    );
}

#[test]
fn oracle_reports_unreachable_layers() {
    let t = Configuration::from_canonical(THREE_PER_QUARTER, 2).unwrap();
    let grid = Grid::from_tree(&t).unwrap();
    assert_eq!(
        brute_force_empty_pixel(&grid, 0, DEFAULT_BUDGET).unwrap(),
        None
    );
    assert_eq!(
        brute_force_empty_pixel(&grid, 2, DEFAULT_BUDGET).unwrap(),
        Some(0)
    );
}
