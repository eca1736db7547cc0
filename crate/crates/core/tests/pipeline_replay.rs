use std::path::{Path, PathBuf};

use litmap_core::pipeline::{read_manifest, Pipeline, PipelineConfig, PipelineError, StageName};
use litmap_core::screening::Pass;

fn bundled(out: &Path) -> PipelineConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/migration/litmap.toml");
    let mut cfg = PipelineConfig::load(&path).unwrap();
    cfg.output.dir = out.to_path_buf();
    cfg
}

#[test]
fn bundled_run_reproduces_flow_and_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(bundled(dir.path())).unwrap();
    let m = p.run(false).unwrap();
    let f = &m.flow;
    assert_eq!((f.scoping, f.pruned, f.eligible, f.notable_added, f.seeds), (760, 100, 660, 4, 664));
    assert_eq!(f.passes[&Pass::Title].groups, [223, 81, 137, 212, 107]);
    assert_eq!(f.passes[&Pass::Abstract].decided() + f.passes[&Pass::Fulltext].decided(), 441);
    assert_eq!(f.passes[&Pass::Abstract].decided(), 237);
    assert_eq!(f.passes[&Pass::Fulltext].decided(), 204);
    let q = &m.summary.queries;
    assert_eq!((q.total_memberships, q.unique_docs, q.max_overlap, q.docs_at_max), (1100, 760, 6, 2));
    assert_eq!(m.summary.max_overlap_docs.len(), 2);
    assert_eq!(m.summary.query_groups.unique_docs, 760);
    assert!(f.citation_corpus > f.seeds);
    assert!(m.summary.near_duplicates >= 1);
    assert_eq!(read_manifest(dir.path()).unwrap(), m);
    for a in m.reports.iter().chain([&m.snapshot]) {
        assert!(dir.path().join(&a.path).is_file(), "{}", a.path);
    }
}

#[test]
fn reruns_and_resume_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = Pipeline::new(bundled(a.path())).unwrap().run(false).unwrap();
    let pb = Pipeline::new(bundled(b.path())).unwrap();
    // stop after screening, then resume the rest
    let (mut store, mut state) = pb.open(false).unwrap();
    pb.harvest(&mut store, &mut state).unwrap();
    pb.screen(&mut store, &mut state).unwrap();
    drop(store);
    let mb = pb.run(true).unwrap();
    assert_eq!(ma.snapshot, mb.snapshot);
    assert_eq!(ma.reports, mb.reports);
    let again = Pipeline::new(bundled(a.path())).unwrap().run(true).unwrap();
    assert_eq!(again, ma);
}

#[test]
fn analyze_leaves_the_snapshot_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(bundled(dir.path())).unwrap();
    let m = p.run(false).unwrap();
    let before = std::fs::read(p.snapshot_path()).unwrap();
    let again = p.analyze().unwrap();
    assert_eq!(std::fs::read(p.snapshot_path()).unwrap(), before);
    assert_eq!(again, m);
}

#[test]
fn snowball_waits_for_screening() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = bundled(dir.path());
    cfg.screening.decisions = None;
    let p = Pipeline::new(cfg).unwrap();
    let (mut store, mut state) = p.open(false).unwrap();
    p.harvest(&mut store, &mut state).unwrap();
    assert!(state.completed.contains(&StageName::Harvest));
    let err = p.snowball(&mut store, &mut state).unwrap_err();
    assert!(matches!(err, PipelineError::Invariant(_)), "{err}");
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn zero_queries_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = bundled(dir.path());
    cfg.queries.clear();
    let err = Pipeline::new(cfg).err().unwrap();
    assert_eq!(err.exit_code(), 2);
}
