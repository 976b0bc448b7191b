use pts_core::littlewood_paley::{analysis_with, basis_for_bands, synthesis_with, DyadicSystem, Variant};
use pts_core::numerics::{FunctionSample, Grid, KQuadrature};
use pts_core::scattering::{bound_states, transmission, Potential, Side};
use pts_core::spaces::{battery, NormContext, NormSpec};
use pts_core::spectral::{build_band_kernel, MultiplierKernel, SpectralBasis};
use pts_core::Error;

#[test]
fn bands_rebuild_the_battery_and_carry_the_l2_norm() {
    let grid = Grid::desk();
    let pot = Potential::integer(2);
    let basis = basis_for_bands(&pot, &grid, 6).unwrap();
    let system = DyadicSystem::new(Variant::ShiftedSqrt);
    let partition = DyadicSystem::new(Variant::SqrtPartition);
    // only the square-root partition has squared windows summing to one
    let ctx = NormContext::new(&basis, &partition);
    for t in battery(&grid) {
        let bands = analysis_with(&basis, &system, &t.sample, 6).unwrap();
        let back = synthesis_with(&basis, &system, &bands).unwrap();
        assert!(back.relative_l2_error(&t.sample).unwrap() < 1e-4, "{}", t.id);
        let l2 = ctx.norm(&t.sample, &NormSpec::tl(0.0, 2.0, 2.0)).unwrap();
        assert!(l2 <= t.sample.l2_norm() * (1.0 + 1e-9), "{}", t.id);
        assert!(l2 >= t.sample.l2_norm() * (1.0 - 1e-3), "{}", t.id);
    }
}

#[test]
fn transform_sees_bound_states_as_point_masses() {
    let grid = Grid::desk();
    let pot = Potential::integer(3);
    let basis = SpectralBasis::new(&pot, &grid, &KQuadrature::for_grid(&grid, 8.0).unwrap()).unwrap();
    let states = bound_states(&pot, &grid).unwrap();
    assert_eq!(states.len(), 3);
    for b in &states {
        let c = basis.forward(&b.samples).unwrap();
        let back = basis.inverse(&c).unwrap();
        assert!(back.relative_l2_error(&b.samples).unwrap() < 1e-8);
    }
    assert!((transmission(3, 0.7, Side::Minus).unwrap().norm() - 1.0).abs() < 1e-14);
}

#[test]
fn kernel_binary_round_trip_is_exact() {
    let grid = Grid::new(-30.0, 30.0, 241).unwrap();
    let kernel = build_band_kernel(&DyadicSystem::new(Variant::SqrtPartition), 2, &Potential::integer(1), &grid, true).unwrap();
    let mut bytes = Vec::new();
    kernel.write_binary(&mut bytes).unwrap();
    let again = MultiplierKernel::read_binary(bytes.as_slice()).unwrap();
    let mut bytes2 = Vec::new();
    again.write_binary(&mut bytes2).unwrap();
    assert_eq!(bytes, bytes2);
    let f = FunctionSample::from_real_fn(grid, |x| (-x * x).exp());
    assert_eq!(kernel.apply(&f).unwrap(), again.apply(&f).unwrap());
    assert!(MultiplierKernel::read_binary(&bytes[..bytes.len() / 2]).is_err());
}

#[test]
fn continuous_strength_is_refused_by_the_transform() {
    let grid = Grid::desk();
    let pot = Potential::continuous(2.5).unwrap();
    let q = KQuadrature::for_grid(&grid, 4.0).unwrap();
    assert!(matches!(SpectralBasis::new(&pot, &grid, &q), Err(Error::Precondition(_))));
}
