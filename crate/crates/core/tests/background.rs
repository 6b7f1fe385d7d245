mod common;

use common::*;
use frame_extrapolation::pipeline::{Extrapolator, PipelineConfig};
use frame_extrapolation::scene::{preset, SceneScript};

fn static_only(scene: &SceneScript) -> SceneScript {
    let mut s = scene.clone();
    s.objects.retain(|o| o.trajectory.is_static());
    s
}

fn no_aw() -> PipelineConfig {
    PipelineConfig {
        aw: false,
        ..config()
    }
}

#[test]
fn vacated_pixels_hold_the_occluded_plane() {
    let scene = preset("occluder-pan", 0).unwrap();
    let empty = static_only(&scene);
    let mut ex = Extrapolator::new(no_aw(), W, H).unwrap();
    let mut checked = 0;
    for k in 0..9 {
        let t = k as f64 * DT;
        let cur = frame_at(&scene, t, W, H);
        ex.run_rendered_step(cur.clone()).unwrap();
        if k < 6 {
            continue;
        }
        // pixels the box covers now and leaves one step later
        let next = frame_at(&scene, t + DT, W, H);
        let truth = frame_at(&empty, t, W, H);
        let level0 = &ex.pyramid().unwrap().levels[0];
        for i in 0..cur.dyn_gt.pixel_count() {
            if cur.dyn_gt.data()[i] != 0.0 && next.dyn_gt.data()[i] == 0.0 {
                assert!(level0.is_valid(i), "vacated pixel {i} missing at frame {k}");
                for c in 0..3 {
                    assert!((level0.color.at(i)[c] - truth.color.at(i)[c]).abs() < 1e-6);
                }
                assert!((level0.depth.data()[i] - truth.depth.data()[i]).abs() < 1e-4);
                checked += 1;
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}

#[test]
fn strafe_pushes_hidden_fragments_down_a_level() {
    let scene = preset("strafe-reveal", 0).unwrap();
    let mut ex = Extrapolator::new(no_aw(), W, H).unwrap();
    let mut case2 = 0;
    for k in 0..6 {
        ex.run_rendered_step(frame_at(&scene, k as f64 * DT, W, H))
            .unwrap();
        case2 += ex.pyramid().unwrap().stats.case2.iter().sum::<usize>();
    }
    assert!(case2 > 0);
    assert!(ex.pyramid().unwrap().levels[1].valid_count() > 0);
}

#[test]
fn pyramid_holds_only_static_geometry() {
    let scene = preset("occluder-pan", 0).unwrap();
    let empty = static_only(&scene);
    let mut ex = Extrapolator::new(no_aw(), W, H).unwrap();
    for k in 0..10 {
        let t = k as f64 * DT;
        ex.run_rendered_step(frame_at(&scene, t, W, H)).unwrap();
        // a texel from the moving slab would sit in front of every static surface
        let truth = frame_at(&empty, t, W, H);
        let level0 = &ex.pyramid().unwrap().levels[0];
        for i in 0..level0.depth.pixel_count() {
            if level0.is_valid(i) {
                let (z, floor) = (level0.depth.data()[i], truth.depth.data()[i]);
                assert!(
                    z >= floor * (1.0 - 1e-3),
                    "frame {k} texel {i}: depth {z} in front of static {floor}"
                );
            }
        }
    }
}
