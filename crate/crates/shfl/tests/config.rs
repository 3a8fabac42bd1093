use std::path::Path;

use shfl::config::{parse_config, RunConfig};
use shfl::Error;
use shfl_core::radio::dbm_to_watts;
use shfl_core::sim::{EdgeUpdate, Selection};

fn parse(text: &str) -> Result<RunConfig, Error> {
    parse_config(text, Path::new("test.json"))
}

fn invalid_field(text: &str) -> String {
    match parse(text) {
        Err(Error::Invalid { field, .. }) => field,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn empty_file_gives_defaults() {
    for text in ["", "  \n", "{}"] {
        let cfg = parse(text).unwrap();
        assert_eq!(cfg, RunConfig::default());
        let sim = cfg.to_sim_config().unwrap();
        assert_eq!(sim.topology.edges, 10);
        assert_eq!(sim.topology.devices_per_edge, 2);
        assert_eq!(sim.topology.cpu_freq_hz, (2e9, 4e9));
        assert_eq!(sim.rho, 0.8);
        assert_eq!(sim.network.total_bandwidth, 20e6);
        assert_eq!(sim.network.edge_tier_bandwidth, 15e6);
        assert_eq!(sim.network.cloud_tier_bandwidth, 5e6);
        assert_eq!(sim.network.device_ul_power, dbm_to_watts(10.0));
        assert_eq!(sim.network.edge_ul_power, dbm_to_watts(24.0));
        assert_eq!(sim.network.payload_bits, 21.0 * 16.0);
        assert_eq!(sim.hyper.local_steps, 10, "one pass over 500 samples in batches of 50");
        assert_eq!(sim.policy.selection, Selection::Proposed);
        assert_eq!(sim.policy.edge_update, EdgeUpdate::Elastic);
    }
}

#[test]
fn dbm_fields_convert_to_watts() {
    let cfg = parse(r#"{"network": {"device_ul_power_dbm": 20, "noise_density_dbm_per_hz": -170}}"#).unwrap();
    let net = cfg.to_sim_config().unwrap().network;
    assert!((net.device_ul_power - 0.1).abs() < 1e-15);
    assert!((net.noise_density - 1e-20).abs() < 1e-33);
}

#[test]
fn out_of_range_values_name_their_field() {
    assert_eq!(invalid_field(r#"{"solver": {"rho": 1.3}}"#), "solver.rho");
    assert_eq!(invalid_field(r#"{"network": {"cloud_tier_bandwidth_hz": 4e6}}"#), "network");
    assert_eq!(invalid_field(r#"{"training": {"learning_rate": -1}}"#), "training.learning_rate");
    assert_eq!(invalid_field(r#"{"solver": {"nu": 0}}"#), "solver.nu");
    assert_eq!(invalid_field(r#"{"policy": {"selection": "random-11"}}"#), "policy.m");
    assert_eq!(invalid_field(r#"{"policy": {"selection": "slowest-2"}}"#), "policy.selection");
    assert_eq!(invalid_field(r#"{"topology": {"edges": 0}}"#), "topology");
    assert_eq!(invalid_field(r#"{"topology": {"edges": 11}}"#), "data");
}

#[test]
fn syntax_and_unknown_keys_report_their_line() {
    match parse("{\n  \"seed\": 1,\n  \"colour\": 2\n}") {
        Err(Error::Parse { line, msg, .. }) => {
            assert_eq!(line, 3);
            assert!(msg.contains("colour"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
    match parse("{\n \"network\": {\"payload_bits\": \"many\"}\n}") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse("{ \"seed\": 1,"), Err(Error::Parse { .. })));
}

#[test]
fn round_trip_is_identity() {
    let mut cfg = RunConfig::default();
    cfg.seed = 42;
    cfg.rounds = 7;
    cfg.network.payload_bits = Some(1.6e6);
    cfg.training.local_steps = Some(3);
    cfg.policy.selection = "random-5".into();
    cfg.policy.edge_update = EdgeUpdate::Normal;
    cfg.solver.rho = 0.55;
    cfg.divergence_layers = vec!["weights".into()];
    let back = parse(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(parse(&RunConfig::default().to_json()).unwrap(), RunConfig::default());
}

#[test]
fn unknown_divergence_layer_is_rejected() {
    assert_eq!(invalid_field(r#"{"divergence_layers": ["conv1"]}"#), "topology");
}
