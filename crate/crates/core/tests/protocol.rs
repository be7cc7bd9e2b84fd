use hpqc_core::allocator::SessionMode;
use hpqc_core::geometry::{CellCoord, LatticeDims};
use hpqc_core::protocol::{
    decode_stream, encode_stream, run_secure_with_record, MeasurementInstruction,
};
use hpqc_core::runner::verify::{
    codec_roundtrip, cross_mode, descriptor_purity, desk_mainframe, eigenvalue_statistics,
    eve_no_signaling,
};
use hpqc_core::stabilizer::{Outcome, PauliBasis};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn basis() -> impl Strategy<Value = PauliBasis> {
    prop::sample::select(PauliBasis::ALL.to_vec())
}

fn instruction() -> impl Strategy<Value = MeasurementInstruction> {
    (any::<u64>(), any::<u64>(), any::<u64>(), basis())
        .prop_map(|(x, y, z, b)| MeasurementInstruction::new(CellCoord::new(x, y, z), b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stream_round_trip(stream in prop::collection::vec(instruction(), 0..64)) {
        let bytes = encode_stream(&stream);
        let back = decode_stream(&bytes).unwrap();
        prop_assert_eq!(&back, &stream);
        prop_assert_eq!(encode_stream(&back), bytes);
    }
}

#[test]
fn seeded_codec_round_trip() {
    let c = codec_roundtrip(1000, 9);
    assert!(c.passed(), "{:?}", c.detail);
}

#[test]
fn descriptors_ignore_the_algorithm() {
    let c = descriptor_purity(50, 4);
    assert!(c.passed(), "{:?}", c.detail);
}

#[test]
fn trusted_and_secure_agree_on_50_scenarios() {
    let c = cross_mode(50, 12);
    assert_eq!(c.cases, 50);
    assert!(c.passed(), "{:?}", c.detail);
}

#[test]
fn eigenvalues_are_balanced_over_10000_seeds() {
    let c = eigenvalue_statistics(10_000, 1);
    assert!(c.passed(), "{:?}", c.detail);
}

#[test]
fn eve_sees_nothing_of_later_bases() {
    let c = eve_no_signaling(10_000, 2);
    assert!(c.passed(), "{:?}", c.detail);
}

/// Measuring the centre of a 5x5 region in X and its four neighbours in Z
/// measures one stabilizer generator; with the true record the corrected
/// product is always +1, and flipping that generator's sign flips it.
#[test]
fn corrupted_record_flips_stabilizer_product() {
    for seed in 0..20 {
        let mut m = desk_mainframe(seed, LatticeDims::new(5, 5, 1).unwrap(), 1).unwrap();
        let id = m.admit("eve-free", SessionMode::SecureQuantum, 1).unwrap();
        m.allocate(id, 1).unwrap();
        m.sever(id).unwrap();
        m.start(id).unwrap();
        let routed = m.route_partition(id).unwrap().clone();
        let o = routed.region().origin;
        let centre = CellCoord::new(o.x + 2, o.y + 2, 0);
        let mut stream = vec![MeasurementInstruction::new(centre, PauliBasis::X)];
        for (dx, dy) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
            stream.push(MeasurementInstruction::new(
                CellCoord::new(o.x + dx, o.y + dy, 0),
                PauliBasis::Z,
            ));
        }
        let product = |out: &[Outcome]| out.iter().map(|o| o.value()).product::<i8>();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut honest = routed.clone();
        let out = run_secure_with_record(&mut honest, &routed.record, &stream, &mut rng).unwrap();
        assert_eq!(product(&out), 1, "seed {seed}");

        let mut bad = routed.record.clone();
        let k = routed.local_index(centre).unwrap();
        let sign = bad.sign_of(k).unwrap();
        bad.set(k, sign.flipped_if(true));
        let mut corrupted = routed.clone();
        let out = run_secure_with_record(&mut corrupted, &bad, &stream, &mut rng).unwrap();
        assert_eq!(product(&out), -1, "seed {seed}");
    }
}
