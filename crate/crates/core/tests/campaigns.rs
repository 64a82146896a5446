use std::fs;

use defectlab::experiments::{run, Campaign, EnergySpec, ExperimentSpec, Manifest};
use defectlab::LdosMethod;

fn small(campaign: Campaign, dir: &std::path::Path) -> ExperimentSpec {
    let mut spec = ExperimentSpec::preset(campaign, dir);
    if campaign != Campaign::PhaseDiagram {
        spec.r_max = vec![8.0];
    }
    spec
}

#[test]
fn phase_diagram_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(Campaign::PhaseDiagram, dir.path());
    spec.mass = vec![2.0, 3.0, 4.0];
    spec.winding_grid = 16;
    spec.gap_grid = 20;
    let m = run(&spec).unwrap();
    assert!(m.all_ok());
    let rows = &m.phase_diagram;
    assert_eq!(rows[0].winding, Some(1));
    assert!(rows[1].winding.is_none() && rows[1].skipped.is_some());
    assert_eq!(rows[2].winding, Some(0));
    let csv = fs::read_to_string(dir.path().join("phase_diagram/phase_diagram.csv")).unwrap();
    assert!(csv.starts_with("M,gap,raw,winding\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn m_sweep_writes_radial_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(Campaign::MSweep, dir.path());
    spec.mass = vec![4.0, 2.0];
    spec.ldos.energies = EnergySpec::Range {
        min: -1.0,
        max: 1.0,
        count: 5,
    };
    let m = run(&spec).unwrap();
    assert!(m.all_ok());
    assert_eq!(m.jobs.len(), 2);
    for job in &m.jobs {
        let name = &job.outputs[0];
        let text = fs::read_to_string(dir.path().join("m_sweep").join(name)).unwrap();
        assert!(text.starts_with("E,R_bin,ldos_mean,count\n"));
        assert!(dir.path().join("m_sweep").join(format!("{name}.json")).exists());
    }
    let top = m.job(0.75, 2.0, 8.0).unwrap().core_weight.unwrap();
    let triv = m.job(0.75, 4.0, 8.0).unwrap().core_weight.unwrap();
    assert!(top > triv);
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m_sweep/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest, m);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        run(&small(Campaign::CoreRemoval, dir)).unwrap();
    }
    let names: Vec<_> = fs::read_dir(a.path().join("core_removal"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    assert_eq!(names.len(), 2);
    for n in names {
        let x = fs::read(a.path().join("core_removal").join(&n)).unwrap();
        let y = fs::read(b.path().join("core_removal").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?}");
    }
}

#[test]
fn core_removal_map_has_empty_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(Campaign::CoreRemoval, dir.path());
    spec.mass = vec![2.0];
    let m = run(&spec).unwrap();
    let path = dir.path().join("core_removal").join(&m.jobs[0].outputs[0]);
    let mut rdr = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["E", "site_id", "radius", "x1", "x2", "ldos"]
    );
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let radius: f64 = rec[2].parse().unwrap();
        assert!(radius >= 2.5);
    }
}

#[test]
fn failing_job_does_not_stop_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(Campaign::DefectSequence, dir.path());
    spec.r_max = vec![3.0, 12.0];
    spec.alpha = vec![0.75];
    spec.ldos.method = LdosMethod::DenseEig;
    spec.ldos.dense_cap = 400;
    let m = run(&spec).unwrap();
    assert_eq!(m.jobs.len(), 2);
    assert!(m.jobs[0].ok);
    assert!(!m.jobs[1].ok);
    assert!(m.jobs[1].error.as_deref().unwrap().contains("400"));
    assert!(!m.all_ok());
    assert!(dir.path().join("defect_sequence/manifest.json").exists());
}
