use std::fmt::Write;

use exitspec::mesh::{disk, load_mesh, verify_mesh, MeshFormat, PoleSelector};
use exitspec::Error;

fn as_obj(mesh: &exitspec::mesh::SurfaceMesh) -> String {
    let mut s = String::from("# generated disk\n");
    for v in mesh.vertices() {
        writeln!(s, "v {} {} {}", v[0], v[1], v[2]).unwrap();
    }
    for f in mesh.faces() {
        writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    s
}

#[test]
fn obj_file_reproduces_generated_disk() {
    let mesh = disk(1.25, 24).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.obj");
    std::fs::write(&path, as_obj(&mesh)).unwrap();
    let loaded = load_mesh(&path, None, PoleSelector::Nearest([0.0, 0.0, 0.0])).unwrap();
    assert!(loaded.warnings.is_empty());
    assert_eq!(loaded.mesh.pole(), mesh.pole());
    let a = verify_mesh(&mesh, 1.0, 2, 1e-12, None).unwrap();
    let b = verify_mesh(&loaded.mesh, 1.0, 2, 1e-12, None).unwrap();
    for k in 0..=2 {
        assert!((a.mesh_spectrum[k] - b.mesh_spectrum[k]).abs() < 1e-12);
    }
    assert!(b.all_hold);
    assert!((b.mesh_spectrum[0] - 0.5).abs() < 5e-3);
}

#[test]
fn broken_files_are_rejected_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.off");
    std::fs::write(&path, "OFF\n3 1 0\n0 0 0\n1 0 0\nnot a vertex\n3 0 1 2\n").unwrap();
    match load_mesh(&path, Some(MeshFormat::Off), PoleSelector::Index(0)) {
        Err(Error::Parse { position, .. }) => assert_eq!(position, 5),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        load_mesh(&dir.path().join("missing.off"), None, PoleSelector::Index(0)),
        Err(Error::Io(_))
    ));
}
