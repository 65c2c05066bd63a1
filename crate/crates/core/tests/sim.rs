use proptest::prelude::*;
use pushgrasp::geometry::{Pose2, Shape, Vec2};
use pushgrasp::sim::*;

fn palette_for(holdout: bool) -> Vec<ObjectSpec> {
    if holdout {
        holdout_palette()
    } else {
        block_palette()
    }
}

fn spawn(n: usize, seed: u64) -> Scene {
    spawn_random(n, &block_palette(), DropRegion::default(), seed).unwrap()
}

fn names(scene: &Scene) -> Vec<&str> {
    scene.objects.iter().map(|o| o.spec.name.as_str()).collect()
}

/// A grasp centred on `obj` along one of `k` axes that succeeds, if any does.
fn successful_grasp(scene: &Scene, index: usize, k: usize) -> Option<(GraspCommand, StepOutcome)> {
    let c = scene.objects[index].world_centroid();
    (0..k).find_map(|r| {
        let cmd = GraspCommand::new(c, r, k);
        let out = step_grasp(scene, &cmd).ok()?;
        out.grasp_success.then_some((cmd, out))
    })
}

#[test]
fn spawned_scenes_stay_inside_the_drop_region() {
    let region = DropRegion::default();
    for seed in 0..20 {
        let scene = spawn(8, seed);
        assert_eq!(scene.object_count(), 8);
        assert!(scene.max_penetration() <= OVERLAP_TOLERANCE);
        for o in &scene.objects {
            let lo = region.margin.max(o.spec.shape.bounding_radius());
            let p = o.pose.translation();
            assert!(p.x >= lo && p.x <= region.workspace_side - lo, "{p:?}");
            assert!(p.y >= lo && p.y <= region.workspace_side - lo, "{p:?}");
        }
    }
}

#[test]
fn ten_object_scene_loses_exactly_the_grasped_object() {
    let scene = spawn(10, 3);
    let (index, out) = (0..scene.object_count())
        .find_map(|i| successful_grasp(&scene, i, 16).map(|(_, out)| (i, out)))
        .expect("some object in the drop is graspable");
    assert_eq!(out.objects_removed, 1);
    assert_eq!(out.scene_after.object_count(), 9);
    let mut expected = scene.objects.clone();
    expected.remove(index);
    assert_eq!(out.scene_after.objects, expected);
}

#[test]
fn grasp_on_empty_table_makes_no_contact() {
    let scene = Scene::empty(WORKSPACE_SIDE);
    let out = step_grasp(&scene, &GraspCommand::new(scene.center(), 0, 16)).unwrap();
    assert!(!out.grasp_success && !out.contact_made);
    assert!(step_grasp(&scene, &GraspCommand::new(Vec2::new(-0.01, 0.2), 0, 16)).is_err());
}

#[test]
fn shipped_scenarios_are_overlap_free_and_round_trip() {
    for name in [
        "packed_row_3",
        "packed_row_4",
        "block_2x2",
        "l_cluster",
        "wall_pair",
        "isolated",
    ] {
        let path = format!("{}/scenarios/{name}.txt", env!("CARGO_MANIFEST_DIR"));
        let scene = load_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(scene.object_count() >= 1, "{name}");
        assert!(scene.max_penetration() <= OVERLAP_TOLERANCE, "{name}");
        assert_eq!(load_scenario(&save_scenario(&scene)).unwrap(), scene, "{name}");
    }
}

#[test]
fn malformed_scenarios_are_rejected() {
    let header = format!("{SCENARIO_MAGIC} v1 workspace_side=0.448 seed=0\n");
    for body in [
        "a disc:0.02 0.1 0.1 0 1\n",
        "a disc:-0.02 0.1 0.1 0 1 0.03\n",
        "a blob:0.02 0.1 0.1 0 1 0.03\n",
        "a disc:0.02 0.1 nan 0 1 0.03\n",
        "a disc:0.03 0.1 0.1 0 1 0.03\nb disc:0.03 0.12 0.1 0 1 0.03\n",
    ] {
        assert!(load_scenario(&format!("{header}{body}")).is_err(), "{body:?}");
    }
    assert!(load_scenario("not-a-scenario v1\n").is_err());
}

#[test]
fn push_into_a_row_moves_every_block_it_reaches() {
    let block = |i: usize, x: f64| PlacedObject {
        spec: ObjectSpec::new(format!("b{i}"), Shape::rectangle(0.03, 0.03).unwrap(), 0.03, 1).unwrap(),
        pose: Pose2::new(x, 0.224, 0.0),
    };
    let scene = Scene {
        workspace_side: WORKSPACE_SIDE,
        objects: vec![block(0, 0.15), block(1, 0.18), block(2, 0.21)],
        seed: 0,
    };
    let out = step_push(&scene, &PushCommand::new(Vec2::new(0.11, 0.224), 0, 16)).unwrap();
    assert!(out.contact_made);
    for (a, b) in scene.objects.iter().zip(&out.scene_after.objects) {
        assert!(
            b.pose.x > a.pose.x + 0.01,
            "{} moved only {}",
            a.spec.name,
            b.pose.x - a.pose.x
        );
        assert!((b.pose.y - a.pose.y).abs() < 0.01);
    }
    assert!(out.scene_after.max_penetration() <= OVERLAP_TOLERANCE);
}

fn scene_strategy() -> impl Strategy<Value = Scene> {
    (0usize..9, any::<u64>(), any::<bool>())
        .prop_map(|(n, seed, holdout)| spawn_random(n, &palette_for(holdout), DropRegion::default(), seed).unwrap())
}

fn table_point() -> impl Strategy<Value = Vec2> {
    (0.0..WORKSPACE_SIDE, 0.0..WORKSPACE_SIDE).prop_map(|(x, y)| Vec2::new(x, y))
}

/// Points on or near an object of the scene, where grasps are interesting.
fn near_object(scene: &Scene, pick: usize, jitter: (f64, f64)) -> Vec2 {
    if scene.is_cleared() {
        return scene.center();
    }
    let c = scene.objects[pick % scene.object_count()].world_centroid();
    let p = Vec2::new(c.x + jitter.0, c.y + jitter.1);
    Vec2::new(p.x.clamp(0.0, WORKSPACE_SIDE), p.y.clamp(0.0, WORKSPACE_SIDE))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spawn_is_a_pure_function(n in 0usize..12, seed in any::<u64>(), holdout in any::<bool>()) {
        let palette = palette_for(holdout);
        let a = spawn_random(n, &palette, DropRegion::default(), seed).unwrap();
        let b = spawn_random(n, &palette, DropRegion::default(), seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.object_count(), n);
        prop_assert!(a.max_penetration() <= OVERLAP_TOLERANCE);
        prop_assert!(a.validate().is_ok());
    }

    #[test]
    fn scenario_text_round_trips(scene in scene_strategy()) {
        let text = save_scenario(&scene);
        prop_assert_eq!(load_scenario(&text).unwrap(), scene);
    }

    #[test]
    fn push_conserves_objects_and_separates_them(scene in scene_strategy(), start in table_point(), dir in 0usize..16) {
        let cmd = PushCommand::new(start, dir, 16);
        let out = step_push(&scene, &cmd).unwrap();
        prop_assert_eq!(out.scene_after.object_count() + out.objects_expelled, scene.object_count());
        prop_assert_eq!(out.objects_removed, 0);
        prop_assert!(!out.grasp_success);
        prop_assert!(out.scene_after.max_penetration() <= OVERLAP_TOLERANCE);
        let before = names(&scene);
        prop_assert!(names(&out.scene_after).iter().all(|n| before.contains(n)));
        prop_assert_eq!(step_push(&scene, &cmd).unwrap(), out);
    }

    #[test]
    fn grasp_removes_at_most_one_object(
        scene in scene_strategy(),
        pick in any::<usize>(),
        jitter in (-0.02..0.02f64, -0.02..0.02f64),
        r in 0usize..16,
    ) {
        let cmd = GraspCommand::new(near_object(&scene, pick, jitter), r, 16);
        let out = step_grasp(&scene, &cmd).unwrap();
        prop_assert_eq!(out.objects_expelled, 0);
        if out.grasp_success {
            prop_assert_eq!(out.objects_removed, 1);
            prop_assert_eq!(out.scene_after.object_count() + 1, scene.object_count());
            let after = names(&out.scene_after);
            let gone: Vec<_> = scene.objects.iter().filter(|o| !after.contains(&o.spec.name.as_str())).collect();
            prop_assert_eq!(gone.len(), 1);
            // the removed object lies between the open jaws, narrower than the opening
            let strip = grasp_strip_interval(gone[0], cmd.center, cmd.closing_axis(), cmd.jaw_width / 2.0);
            let half = cmd.max_opening / 2.0;
            prop_assert!(strip.is_some_and(|s| s.lo >= -half && s.hi <= half));
        } else {
            prop_assert_eq!(out.objects_removed, 0);
            prop_assert_eq!(&out.scene_after, &scene);
        }
        prop_assert_eq!(step_grasp(&scene, &cmd).unwrap(), out);
    }

    /// Opening the jaws wider keeps a successful grasp successful, unless the
    /// wider jaws land on something or the wider gap takes in another object.
    #[test]
    fn wider_opening_keeps_success_when_nothing_new_intrudes(
        scene in scene_strategy(),
        pick in any::<usize>(),
        jitter in (-0.01..0.01f64, -0.01..0.01f64),
        r in 0usize..16,
        extra in 0.0..0.03f64,
    ) {
        let narrow = GraspCommand::new(near_object(&scene, pick, jitter), r, 16);
        let out = step_grasp(&scene, &narrow).unwrap();
        prop_assume!(out.grasp_success);
        let wide = GraspCommand { max_opening: narrow.max_opening + extra, ..narrow };

        let jaws = wide.jaws().unwrap();
        let jaws_hit = scene.objects.iter().any(|o| {
            jaws.iter().any(|(s, p)| pushgrasp::geometry::shapes_overlap(s, p, &o.spec.shape, &o.pose))
        });
        let half = wide.max_opening / 2.0;
        let in_gap = scene
            .objects
            .iter()
            .filter(|o| {
                grasp_strip_interval(o, wide.center, wide.closing_axis(), wide.jaw_width / 2.0)
                    .is_some_and(|s| s.hi >= -half && s.lo <= half)
            })
            .count();
        prop_assume!(!jaws_hit && in_gap == 1);
        let wide_out = step_grasp(&scene, &wide).unwrap();
        prop_assert!(wide_out.grasp_success);
        prop_assert_eq!(wide_out.scene_after, out.scene_after);
    }
}
