use hpqc_core::geometry::LatticeDims;
use hpqc_core::runner::verify::{
    cut_rank_identity, oracle_equivalence, retained_link, severing, sub_regions, z_deletion,
};
use hpqc_core::stabilizer::{
    cut_rank, graph_state_tableau, GraphAdjacency, Statevector, ORACLE_CAP,
};

fn fixture(name: &str) -> GraphAdjacency {
    let path = format!("{}/tests/fixtures/{name}.edges", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    GraphAdjacency::from_edge_list(&text, None).unwrap()
}

#[test]
fn fixture_cut_entropies() {
    let cases: &[(&str, &[usize], usize)] = &[
        ("path4", &[0, 1], 1),
        ("path4", &[0, 2], 2),
        ("ring5", &[0, 1], 2),
        ("ring5", &[0, 2], 2),
        ("star6", &[0], 1),
        ("star6", &[1, 2], 1),
        ("star6", &[0, 1], 1),
        ("grid2x3", &[0, 1, 2], 3),
        ("grid2x3", &[0, 3], 2),
    ];
    for &(name, subset, want) in cases {
        let g = fixture(name);
        let tab = graph_state_tableau(&g, None);
        let oracle = Statevector::graph_state(&g, None, ORACLE_CAP).unwrap();
        assert_eq!(cut_rank(&g, subset), want, "{name} {subset:?} cut rank");
        assert_eq!(tab.entanglement_entropy(subset).unwrap(), want, "{name} {subset:?} tableau");
        assert_eq!(oracle.stabilizer_entropy(subset), want, "{name} {subset:?} oracle");
    }
}

#[test]
fn fixtures_round_trip() {
    for name in ["path4", "ring5", "star6", "grid2x3"] {
        let g = fixture(name);
        let back = GraphAdjacency::from_edge_list(&g.to_edge_list(), Some(g.vertex_count())).unwrap();
        assert_eq!(back, g);
    }
}

#[test]
fn oracle_equivalence_over_200_graphs() {
    let c = oracle_equivalence(200, 7);
    assert_eq!(c.cases, 200);
    assert!(c.passed(), "{:?}", c.detail);
}

#[test]
fn cut_rank_over_500_pairs() {
    let c = cut_rank_identity(500, 7);
    assert_eq!(c.cases, 500);
    assert!(c.passed(), "{:?}", c.detail);
}

#[test]
fn z_measurement_deletes_the_vertex() {
    let c = z_deletion(300, 3);
    assert!(c.passed(), "{:?}", c.detail);
}

#[test]
fn severing_every_sub_region() {
    let expected = sub_regions(LatticeDims::new(4, 4, 1).unwrap()).len()
        + sub_regions(LatticeDims::new(3, 3, 2).unwrap()).len();
    for seed in 0..5 {
        let c = severing(seed);
        assert_eq!(c.cases as usize, expected);
        assert!(c.passed(), "{:?}", c.detail);
    }
}

#[test]
fn one_retained_cell_keeps_a_link() {
    let c = retained_link(5);
    assert!(c.cases > 0);
    assert!(c.passed(), "{:?}", c.detail);
}
