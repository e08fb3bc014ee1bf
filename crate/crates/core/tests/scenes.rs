use catsurf_core::corpus;
use catsurf_core::triangulation::{check_tiling, intersect_convex, replay_matches, ve_refine, Owner};

#[test]
fn random_scenes_refine_cleanly() {
    let mut nonempty = 0;
    for seed in 0..200 {
        let scene = corpus::random_scene(seed, 4, 6);
        let parent = scene.parent_polygon().unwrap();
        let family = scene.family_polygons().unwrap();
        nonempty += usize::from(!family.is_empty());
        let out = ve_refine(&parent, &family).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        check_tiling(&parent, &out.triangles).unwrap();
        assert!(replay_matches(&parent, &out.certificate, &out.triangles).unwrap(), "seed {seed}");
        for (i, a) in family.iter().enumerate() {
            let owned = out.owned_by(i);
            assert!(replay_matches(a, &out.family_certificates[i], &owned).unwrap(), "seed {seed} family {i}");
        }
        for i in 0..out.triangles.len() {
            for j in i + 1..out.triangles.len() {
                let a = intersect_convex(&out.triangles[i], &out.triangles[j]).unwrap().area();
                assert!(a <= 1e-12, "seed {seed}: overlap {a}");
            }
        }
        assert_eq!(out.owner.len(), out.triangles.len());
        assert!(out.owner.iter().filter(|o| **o == Owner::Background).count() >= 1);
    }
    assert!(nonempty > 150, "{nonempty}");
}
