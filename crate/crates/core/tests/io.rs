mod common;

use common::{asymmetric, ground_state};
use fracnls::coupled::{solve_min_rayleigh, RayleighOpts};
use fracnls::io::{load_coupled, load_scalar, read_field, save_coupled, save_scalar, write_field, FieldFormat};
use fracnls::thresholds::beta2;
use fracnls::{Field, Grid};
use proptest::prelude::*;

fn bits(f: &Field) -> Vec<u64> {
    f.values().iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn field_dumps_round_trip_bit_exactly(
        values in prop::collection::vec(-1e3f64..1e3, 64),
        l in 1.0f64..100.0,
        csv in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(1, 64, l).unwrap();
        let f = Field::new(grid, values).unwrap();
        let format = if csv { FieldFormat::Csv } else { FieldFormat::Bin };
        let header = write_field(dir.path(), "u", &f, 0.45, format).unwrap();
        let (back, h) = read_field(&header).unwrap();
        prop_assert_eq!(bits(&back), bits(&f));
        prop_assert_eq!(back.grid().l.to_bits(), l.to_bits());
        prop_assert_eq!(h.s, 0.45);
    }
}

#[test]
fn scalar_artifact_round_trip() {
    let gs = ground_state(2048, 60.0);
    for format in [FieldFormat::Csv, FieldFormat::Bin] {
        let dir = tempfile::tempdir().unwrap();
        let back = load_scalar(&save_scalar(dir.path(), &gs, format).unwrap()).unwrap();
        assert_eq!(bits(&back.w0), bits(&gs.w0));
        assert_eq!(back.c0.to_bits(), gs.c0.to_bits());
        assert_eq!(back.c1.to_bits(), gs.c1.to_bits());
        assert_eq!(back.copt.to_bits(), gs.copt.to_bits());
        assert_eq!(back.residual_pohozaev.to_bits(), gs.residual_pohozaev.to_bits());
        assert_eq!(back.params, gs.params);
    }
}

#[test]
fn coupled_artifact_round_trip() {
    let base = asymmetric(0.0);
    let sys = base.with_beta(1.5 * beta2(&base).unwrap());
    let sol = solve_min_rayleigh(&sys, Grid::new(1, 2048, 300.0).unwrap(), RayleighOpts::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let back = load_coupled(&save_coupled(dir.path(), &sol, FieldFormat::Bin).unwrap()).unwrap();
    assert_eq!(bits(&back.u), bits(&sol.u));
    assert_eq!(bits(&back.v), bits(&sol.v));
    for (a, b) in [
        (back.lambda1, sol.lambda1),
        (back.lambda2, sol.lambda2),
        (back.energy, sol.energy),
        (back.g_defect, sol.g_defect),
        (back.el_residual, sol.el_residual),
    ] {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(back.sys, sol.sys);
    assert_eq!(back.regime, sol.regime);
    assert_eq!(back.diagnostics, sol.diagnostics);
}
