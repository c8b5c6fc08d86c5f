use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thz_iqi::beamforming::{digital_beamformers, EffectiveChannels, PowerAllocation};
use thz_iqi::config::Subcarrier;
use thz_iqi::experiments::{
    band_rate, place_users, place_users_seeded, run, sweep_nulling, sweep_rate_vs_snr,
    sweep_se_vs_ebn0, sweep_slope_vs_g, trial_channels, Band, FileNaming, PlacementConfig, Scenario,
    Study, SweepRange,
};
use thz_iqi::impairments::mismatch_matrices;
use thz_iqi::metrics::{low_snr_metrics, se_approx};
use thz_iqi::{Error, SystemConfig};

fn small(band: Band) -> Scenario {
    let mut s = Scenario::reference();
    s.band = band;
    s.trials = 8;
    s.system.half_subcarriers = 8;
    s
}

#[test]
fn placement_separation_over_a_thousand_draws() {
    let cfg = SystemConfig::default();
    let spec = PlacementConfig::default();
    let min = 5f64.to_radians();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let p = place_users(&cfg, &spec, &mut rng).unwrap();
        for n in 0..cfg.tx_subarrays {
            for a in 0..cfg.users {
                for b in 0..a {
                    let (da, db) = (p.link(a, n).departure, p.link(b, n).departure);
                    assert!(da.separation(&db) >= min);
                }
            }
        }
        for m in 0..cfg.users {
            for a in 0..cfg.tx_subarrays {
                for b in 0..a {
                    let (aa, ab) = (p.link(m, a).arrival, p.link(m, b).arrival);
                    assert!(aa.separation(&ab) >= min);
                }
            }
        }
    }
}

#[test]
fn placement_depends_only_on_seed() {
    let cfg = SystemConfig::default();
    let spec = PlacementConfig::default();
    assert_eq!(
        place_users_seeded(&cfg, &spec, 5).unwrap(),
        place_users_seeded(&cfg, &spec, 5).unwrap()
    );
    assert_ne!(
        place_users_seeded(&cfg, &spec, 5).unwrap(),
        place_users_seeded(&cfg, &spec, 6).unwrap()
    );
}

#[test]
fn normalized_channel_has_unit_mean_diagonal_power() {
    for band in [Band::Thz, Band::Rayleigh] {
        let scn = small(band);
        let hc = trial_channels(&scn, 0).unwrap();
        let total: f64 = hc
            .values()
            .iter()
            .flat_map(|h| (0..h.nrows()).map(move |m| h[(m, m)].norm_sqr()))
            .sum();
        let mean = total / (hc.len() * scn.system.users) as f64;
        assert!((mean - 1.0).abs() < 1e-12, "{band:?}: {mean}");
    }
}

#[test]
fn toggles_off_give_the_single_user_waterfall() {
    let mut scn = small(Band::Rayleigh);
    scn.interference.iqi = false;
    scn.interference.iui = false;
    scn.trials = 1;
    scn.sweeps.snr_db = SweepRange::new(0.0, 30.0, 10.0);
    let t = sweep_nulling(&scn).unwrap();
    let hc = trial_channels(&scn, 0).unwrap();
    for (row, db) in t.rows.iter().zip([0.0, 10.0, 20.0, 30.0]) {
        let p = 10f64.powf(db / 10.0);
        let direct: f64 = hc
            .values()
            .iter()
            .flat_map(|h| (0..h.nrows()).map(move |m| (1.0 + p * h[(m, m)].norm_sqr()).log2()))
            .sum();
        assert!((row[1] - direct).abs() <= 1e-12 * direct, "{} vs {direct}", row[1]);
    }
}

#[test]
fn rate_table_iqi_free_columns_ignore_the_imbalance() {
    let scn = small(Band::Thz);
    let mut perfect = scn.clone();
    perfect.iqi.irr_db = None;
    perfect.iqi.phase_deg = 0.0;
    let a = sweep_rate_vs_snr(&scn).unwrap();
    let b = sweep_rate_vs_snr(&perfect).unwrap();
    assert_eq!(a.column("rate_noint"), b.column("rate_noint"));
    assert_eq!(a.column("rate_iui"), b.column("rate_iui"));
    // and with perfect IQ the IQI columns collapse onto them
    let close = |x: Vec<f64>, y: Vec<f64>| x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= 1e-9 * q);
    assert!(close(b.column("rate_iqi").unwrap(), b.column("rate_noint").unwrap()));
    assert!(close(b.column("rate_iqi_iui").unwrap(), b.column("rate_iui").unwrap()));
}

#[test]
fn pooled_nulling_radiates_the_same_total_power() {
    let cfg = SystemConfig::default();
    let p = 0.7;
    let energy = |alloc: &PowerAllocation| -> f64 {
        digital_beamformers(&cfg, alloc)
            .values()
            .iter()
            .map(|d| d.w_t.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum()
    };
    let full = energy(&PowerAllocation::full_band(cfg.half_subcarriers, p));
    let nulled = energy(&PowerAllocation::image_nulled(cfg.half_subcarriers, 2.0 * p));
    assert!((full - nulled).abs() <= 1e-12 * full);
}

#[test]
fn nulled_mode_sees_no_image_power() {
    let alloc = PowerAllocation::image_nulled(16, 3.0);
    for k in Subcarrier::all(16).filter(|k| alloc.is_active(*k)) {
        assert_eq!(alloc.power(k.mirror()), 0.0);
    }
    // so the rate with and without the image channel agrees exactly
    let scn = small(Band::Rayleigh);
    let hc = trial_channels(&scn, 0).unwrap();
    let mm = mismatch_matrices(&scn.iqi.params(3, 3).unwrap()).unwrap();
    let eff = EffectiveChannels::compute(&hc, &mm).unwrap();
    let alloc = PowerAllocation::image_nulled(scn.system.half_subcarriers, 100.0);
    let z = [1.0; 3];
    assert_eq!(
        band_rate(&eff.hd, Some(&eff.hi), &alloc, &z),
        band_rate(&eff.hd, None, &alloc, &z)
    );
}

#[test]
fn slope_sweep_endpoint_equals_no_iqi_slope() {
    let scn = small(Band::Thz);
    let t = sweep_slope_vs_g(&scn).unwrap();
    let last = t.rows.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12);
    let mut expected = 0.0;
    for trial in 0..scn.trials {
        let hc = trial_channels(&scn, trial).unwrap();
        expected += low_snr_metrics(&hc, None, None).unwrap().slope;
    }
    expected /= scn.trials as f64;
    assert!((last[1] - expected).abs() <= 1e-12 * expected);
    assert_eq!(last[3], scn.trials as f64);
}

#[test]
fn se_curves_cross_zero_at_their_intercept_with_slope_s0() {
    let mut scn = small(Band::Rayleigh);
    scn.sweeps.ebn0_db = SweepRange::new(-2.0, 10.0, 3.0);
    let se = sweep_se_vs_ebn0(&scn).unwrap();
    assert_eq!(se.table.columns, ["ebn0_db", "se_g0.9", "se_g0.8", "se_g0.7"]);
    for s in &se.summaries {
        assert_eq!(se_approx(s.ebn0_min_db, s.ebn0_min_db, s.slope), 0.0);
        let up = se_approx(s.ebn0_min_db + 3.0, s.ebn0_min_db, s.slope);
        assert!((up - s.slope).abs() <= 1e-12 * s.slope);
    }
    // intercepts move right as g drops
    assert!(se.summaries.windows(2).all(|w| w[1].ebn0_min_db > w[0].ebn0_min_db));
}

#[test]
fn doubling_trials_moves_the_mean_less_than_one_standard_error() {
    let mut scn = small(Band::Rayleigh);
    scn.trials = 50;
    let a = sweep_slope_vs_g(&scn).unwrap();
    scn.trials = 100;
    let b = sweep_slope_vs_g(&scn).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let se = rb[2] / (rb[3]).sqrt();
        assert!((ra[1] - rb[1]).abs() < se, "g={} moved {} (se {se})", ra[0], (ra[1] - rb[1]).abs());
    }
}

#[test]
fn empty_sweep_is_rejected_before_any_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut scn = small(Band::Thz);
    scn.sweeps.snr_db = SweepRange::new(10.0, 0.0, 1.0);
    let err = run(&scn, Study::RateVsSnr, dir.path(), FileNaming::Deterministic).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter { .. }));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn csv_files_are_complete_and_match_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let scn = small(Band::Rayleigh);
    let (table, path) = run(&scn, Study::Nulling, dir.path(), FileNaming::Deterministic).unwrap();
    assert_eq!(path.file_name().unwrap(), "nulling_rayleigh.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, table.to_csv());
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, ["nulling_rayleigh.csv"]);
    // the echoed scenario parses back to the one that ran
    let header = text.lines().next().unwrap();
    let json = header
        .strip_prefix("# scenario=")
        .and_then(|s| s.rsplit_once(" seed="))
        .unwrap()
        .0;
    let back: Scenario = serde_json::from_str(json).unwrap();
    assert_eq!(back, scn);
    // every value survives the 9-digit round trip
    for (line, row) in text.lines().skip(2).zip(&table.rows) {
        for (cell, v) in line.split(',').zip(row) {
            let parsed: f64 = cell.parse().unwrap();
            assert!((parsed - v).abs() <= 1e-8 * v.abs());
        }
    }
}

