use std::collections::BTreeMap;

use proptest::prelude::*;

use dhcosim::building::{constant_climate, BuildingSimulator, BuildingSpec};
use dhcosim::cosim::protocol::{decode_message, encode_message, Frame};
use dhcosim::cosim::{master_run, MasterConfig, Simulator};
use dhcosim::dhnet::{
    network_solve, pipe_outlet, substation_step, Node, NodeKind, NetworkTopology, Pipe, PidController, PidGains,
    SourceSpec, SubstationFlow, SubstationSpec, SubstationState,
};
use dhcosim::envelope::{
    derive_conductances, power_for_air_temperature, air_temperature_after, split_gains, step_thermal, Boundary,
    BuildingParams, EquipmentFlags, SurfaceKind, SurfaceSpec, ThermalState,
};
use dhcosim::equipment::{buffer_tank_step, ApplianceRatios, BufferTank, RadiatorSpec, AcSpec};
use dhcosim::hiu::{buffer_demand, hx_transfer, DemandLaw, HxSpec};
use dhcosim::report::building_indicators;
use dhcosim::units::{c_to_k, CP_WATER};

fn params() -> impl Strategy<Value = BuildingParams> {
    (
        prop::collection::vec((0usize..4, 2.0..150.0f64, 0.1..3.5f64), 1..8),
        60.0..300.0f64,
        1u32..4,
        0.3..1.0f64,
        0.0..0.2f64,
        0.0..2.0f64,
        1e6..1e8f64,
    )
        .prop_map(|(surfaces, floor_area, storeys, f_red, tbr, n_air, cm)| {
            let kinds = [SurfaceKind::Roof, SurfaceKind::Wall, SurfaceKind::Floor, SurfaceKind::Window];
            BuildingParams {
                surfaces: surfaces
                    .into_iter()
                    .map(|(k, a, u)| SurfaceSpec::new(kinds[k], a, u))
                    .collect(),
                floor_area,
                storeys,
                f_ms: 2.5,
                f_red,
                delta_u_tbr: tbr,
                n_air_rate: n_air,
                ceiling_height: 2.5,
                heat_capacity: cm,
                flags: EquipmentFlags::default(),
            }
        })
}

proptest! {
    #[test]
    fn conductances_nonnegative_and_reconstruct(p in params()) {
        // degenerate networks are rejected, never returned
        let Ok(c) = derive_conductances(&p) else { return Ok(()) };
        for h in [c.h_win, c.h_op, c.h_tra, c.h_mas, c.h_the, c.h_ve] {
            prop_assert!(h >= 0.0);
        }
        if c.h_op > 0.0 {
            let lhs = 1.0 / c.h_tra + 1.0 / c.h_mas;
            prop_assert!((lhs - 1.0 / c.h_op).abs() <= 1e-12 * (1.0 / c.h_op));
        }
    }

    #[test]
    fn floor_adjustment_is_half(kind in 0usize..4) {
        let kinds = [SurfaceKind::Roof, SurfaceKind::Wall, SurfaceKind::Floor, SurfaceKind::Window];
        let k = kinds[kind];
        prop_assert_eq!(k.adjustment(), if k == SurfaceKind::Floor { 0.5 } else { 1.0 });
    }

    #[test]
    fn gain_split_conserves_power(p in params(), internal in 0.0..5000.0f64, solar in 0.0..5000.0f64) {
        let Ok(c) = derive_conductances(&p) else { return Ok(()) };
        let inj = split_gains(internal, solar, &c);
        prop_assert!((inj.total() - (internal + solar)).abs() <= 1e-9 * (1.0 + internal + solar));
        prop_assert!(inj.phi_ia >= 0.0 && inj.phi_st >= 0.0 && inj.phi_m >= 0.0);
    }

    #[test]
    fn mass_node_energy_balance(
        p in params(),
        t_out in -20.0..35.0f64,
        q in -3000.0..8000.0f64,
        t0 in 10.0..30.0f64,
        dt in 1.0..3600.0f64,
    ) {
        let Ok(c) = derive_conductances(&p) else { return Ok(()) };
        let b = Boundary { t_ext: c_to_k(t_out), t_sup_air: c_to_k(t_out), injections: split_gains(300.0, 200.0, &c), q_space: q };
        let s0 = ThermalState::uniform(c_to_k(t0), p.heat_capacity);
        let (s1, flows) = step_thermal(&s0, &c, &b, dt).unwrap();
        prop_assert_eq!(s1.c_m, s0.c_m);
        prop_assert!(s1.in_band());
        let stored = s1.c_m * (s1.t_mas - s0.t_mas);
        prop_assert!((flows.mass_net * dt - stored).abs() <= 1e-6 * (1.0 + stored.abs()));
    }

    #[test]
    fn ideal_power_hits_target(p in params(), t_out in -20.0..35.0f64, target in 15.0..26.0f64, h in 1.0..60.0f64) {
        let Ok(c) = derive_conductances(&p) else { return Ok(()) };
        let s = ThermalState::uniform(c_to_k(18.0), p.heat_capacity);
        let b = Boundary { t_ext: c_to_k(t_out), t_sup_air: c_to_k(t_out), injections: split_gains(0.0, 0.0, &c), q_space: 0.0 };
        let q = power_for_air_temperature(&s, &c, &b, h, c_to_k(target));
        let reached = air_temperature_after(&s, &c, &Boundary { q_space: q, ..b }, h);
        prop_assert!((reached - c_to_k(target)).abs() < 1e-8);
    }

    #[test]
    fn ratios_outside_unit_interval_rejected(v in prop_oneof![-10.0..-1e-9f64, 1.0 + 1e-9..10.0f64]) {
        let m = BTreeMap::from([("light".to_string(), v)]);
        prop_assert!(ApplianceRatios::new(m).is_err());
    }

    #[test]
    fn exchanger_never_reverses(
        t_sup in 40.0..110.0f64,
        m in 0.0..2.0f64,
        t_req in 20.0..100.0f64,
        t_buf in 40.0..90.0f64,
        approach in 0.5..10.0f64,
    ) {
        let tank = BufferTank { t_buffer: c_to_k(t_buf), ..BufferTank::default() };
        let hx = HxSpec { approach };
        let r = hx_transfer(c_to_k(t_sup), m, c_to_k(t_req), &tank, &hx);
        prop_assert!(r.q_hx >= 0.0);
        prop_assert!(r.t_ret <= c_to_k(t_sup));
    }

    #[test]
    fn demand_nonnegative(t_buf in 20.0..100.0f64, discharge in 0.0..20_000.0f64, kp in 0.0..3.0f64, tau in 60.0..7200.0f64) {
        let tank = BufferTank { t_buffer: c_to_k(t_buf), ..BufferTank::default() };
        let law = DemandLaw { k_p: kp, tau };
        prop_assert!(buffer_demand(&tank, discharge, &law) >= 0.0);
    }

    #[test]
    fn tank_energy_balance(q_in in 0.0..20_000.0f64, q_out in 0.0..20_000.0f64, dt in 1.0..900.0f64) {
        let tank = BufferTank::default();
        let next = buffer_tank_step(&tank, q_in, q_out, c_to_k(20.0), dt);
        let loss = tank.standby_loss(c_to_k(20.0));
        let expected = (q_in - q_out - loss) * dt;
        let stored = tank.heat_capacity() * (next.t_buffer - tank.t_buffer);
        prop_assert!((stored - expected).abs() <= 1e-6 * (1.0 + expected.abs()));
    }

    #[test]
    fn substation_flow_bounded(
        demands in prop::collection::vec((0.0..60_000.0f64, 60.0..110.0f64), 1..60),
        m_max in 0.05..3.0f64,
    ) {
        let spec = SubstationSpec { m_max, ..SubstationSpec::default() };
        let mut state = SubstationState::new(&spec);
        for (q, t) in demands {
            let out = substation_step(q, c_to_k(t), &mut state, &spec, 900.0);
            prop_assert!(out.m_flow >= 0.0 && out.m_flow <= m_max);
            prop_assert!(out.t_ret_request <= c_to_k(t));
        }
    }

    #[test]
    fn pid_integral_stays_clamped(
        errors in prop::collection::vec(-50.0..50.0f64, 1..200),
        kp in 0.0..0.1f64,
        ki in 1e-7..1e-2f64,
        hi in 0.1..5.0f64,
    ) {
        let mut pid = PidController::new(PidGains { kp, ki, kd: 0.0 }, 0.0, hi);
        for e in errors {
            let out = pid.update(0.0, -e, 900.0);
            prop_assert!((0.0..=hi).contains(&out));
            let i = pid.integral_term();
            prop_assert!(i >= -1e-12 && i <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pipe_outlet_between_ground_and_inlet(
        t_in in 30.0..120.0f64,
        m in 0.0..5.0f64,
        t_g in 0.0..20.0f64,
        u in 0.05..1.0f64,
        l in 1.0..2000.0f64,
    ) {
        let out = pipe_outlet(c_to_k(t_in), m, c_to_k(t_g), u, l);
        prop_assert!(out <= c_to_k(t_in) + 1e-9 && out >= c_to_k(t_g) - 1e-9);
    }

    #[test]
    fn network_energy_balance(
        flows in prop::collection::vec((0.0..0.5f64, 40.0..80.0f64), 2),
        t_supply in 70.0..110.0f64,
    ) {
        let topo = small_tree();
        let flows: Vec<_> = flows
            .into_iter()
            .map(|(m, t)| SubstationFlow { m_flow: m, t_ret: c_to_k(t) })
            .collect();
        let source = SourceSpec {
            supply: dhcosim::dhnet::SupplySchedule::Constant { t_supply: c_to_k(t_supply) },
            ..SourceSpec::default()
        };
        let s = network_solve(&topo, &flows, c_to_k(8.0), &source, 0.0, c_to_k(0.0)).unwrap();
        let scale = 1.0 + s.q_plant.abs();
        prop_assert!((s.q_plant - s.q_substations - s.q_pipe_loss).abs() <= 1e-6 * scale);
        let m_total: f64 = flows.iter().map(|f| f.m_flow).sum();
        prop_assert!((s.m_plant - m_total).abs() <= 1e-12 * (1.0 + m_total));
    }

    #[test]
    fn step_frames_round_trip_bytewise(
        t in any::<f64>().prop_filter("finite", |v| v.is_finite()),
        dt in 0.0..1e6f64,
        inputs in prop::collection::btree_map("[A-Za-z_][A-Za-z0-9_.]{0,12}", any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..6),
    ) {
        let f = Frame::Step { t, dt, inputs };
        let bytes = encode_message(&f).unwrap();
        let back = decode_message(&bytes).unwrap();
        prop_assert_eq!(encode_message(&back).unwrap(), bytes);
        prop_assert_eq!(back, f);
    }
}

fn small_tree() -> NetworkTopology {
    let node = |id: &str, kind: NodeKind| Node {
        id: id.into(),
        kind,
        x: 0.0,
        y: 0.0,
        depth: 1.0,
    };
    let pipe = |from: &str, to: &str, length: f64| Pipe {
        id: format!("{from}-{to}"),
        from: from.into(),
        to: to.into(),
        length,
        diameter: 0.05,
        u_prime: 0.25,
        roughness: 1e-4,
    };
    NetworkTopology::new(
        vec![
            node("plant", NodeKind::Source),
            node("J", NodeKind::Junction),
            node("S1", NodeKind::Substation { building: "a".into() }),
            node("S2", NodeKind::Substation { building: "b".into() }),
        ],
        vec![pipe("plant", "J", 300.0), pipe("J", "S1", 80.0), pipe("J", "S2", 120.0)],
    )
    .unwrap()
}

fn test_building(id: &str) -> BuildingSpec {
    BuildingSpec {
        id: id.into(),
        params: BuildingParams {
            surfaces: vec![
                SurfaceSpec::new(SurfaceKind::Roof, 90.0, 0.3),
                SurfaceSpec::new(SurfaceKind::Wall, 150.0, 0.4),
                SurfaceSpec::new(SurfaceKind::Floor, 70.0, 0.4),
                SurfaceSpec::new(SurfaceKind::Window, 25.0, 1.3).with_aperture(0.4),
            ],
            floor_area: 60.0,
            storeys: 2,
            f_ms: 2.5,
            f_red: 0.9,
            delta_u_tbr: 0.05,
            n_air_rate: 0.6,
            ceiling_height: 2.5,
            heat_capacity: 165_000.0 * 120.0,
            flags: EquipmentFlags::default(),
        },
        radiator: RadiatorSpec::default(),
        ac: AcSpec::default(),
        tank: BufferTank::default(),
        hx: HxSpec::default(),
        demand: DemandLaw::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn total_loss_is_sum_of_parts(t_out in -15.0..30.0f64, ghi in 0.0..600.0f64) {
        let mut sims: Vec<Box<dyn Simulator>> =
            vec![Box::new(BuildingSimulator::new(test_building("b"), constant_climate(t_out, ghi)).unwrap())];
        let log = master_run(&mut sims, &Default::default(), &MasterConfig::new(0.0, 86_400.0, 900.0)).unwrap();
        let ind = building_indicators(&log, "b").unwrap();
        prop_assert_eq!(ind.q_ht_total, ind.q_ht_ven + ind.q_ht_tr);
    }
}

#[test]
fn default_ratios_cover_the_fifteen_categories() {
    let r = ApplianceRatios::default();
    assert_eq!(r.categories().count(), 15);
    assert!(r.categories().all(|c| (0.0..=1.0).contains(&r.get(c).unwrap())));
}

#[test]
fn mode_one_flow_identity_is_exact_at_cp() {
    let spec = SubstationSpec::default();
    let mut state = SubstationState::new(&spec);
    let out = substation_step(12_345.0, spec.supply_level + 5.0, &mut state, &spec, 900.0);
    assert!((out.m_flow * CP_WATER * spec.delta_t1 - 12_345.0).abs() < 1e-9);
}
