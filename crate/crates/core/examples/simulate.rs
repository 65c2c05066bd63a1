//! Drops random blocks, pushes one of them and tries a grasp on each.

use pushgrasp::geometry::Vec2;
use pushgrasp::sim::*;

fn main() -> pushgrasp::Result<()> {
    let scene = spawn_random(6, &block_palette(), DropRegion::default(), 7)?;
    println!("{}", save_scenario(&scene));

    let first = scene.objects[0].world_centroid();
    let start = first - Vec2::new(0.06, 0.0);
    let pushed = step_push(&scene, &PushCommand::new(start, 0, 16))?;
    let moved = pushed.scene_after.objects[0].world_centroid() - first;
    println!(
        "push from ({:.3}, {:.3}): contact {}, first object moved ({:.3}, {:.3}), expelled {}",
        start.x, start.y, pushed.contact_made, moved.x, moved.y, pushed.objects_expelled
    );

    for obj in &scene.objects {
        let c = obj.world_centroid();
        let hit = (0..16).find(|&r| step_grasp(&scene, &GraspCommand::new(c, r, 16)).is_ok_and(|o| o.grasp_success));
        match hit {
            Some(r) => println!("{:<14} graspable at rotation {r}", obj.spec.name),
            None => println!("{:<14} not graspable from its centre", obj.spec.name),
        }
    }
    Ok(())
}
