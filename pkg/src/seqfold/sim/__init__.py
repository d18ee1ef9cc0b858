"""Particle cloth simulator, camera and renderer."""

from seqfold.sim.camera import Camera
from seqfold.sim.cloth import (
    ClothState,
    ClothTopology,
    assign_layers,
    init_cloth,
    pbd_solve,
    settle,
)
from seqfold.sim.metrics import mean_particle_distance, miou
from seqfold.sim.primitive import (
    Carry,
    PickPlaceResult,
    carry_plan,
    execute_pick_place,
    grasp_select,
    gripper_path,
)
from seqfold.sim.render import (
    render,
    render_depth,
    render_mask,
    splat_radius,
)

__all__ = [
    "Camera",
    "Carry",
    "ClothState",
    "ClothTopology",
    "PickPlaceResult",
    "assign_layers",
    "carry_plan",
    "execute_pick_place",
    "grasp_select",
    "gripper_path",
    "init_cloth",
    "mean_particle_distance",
    "miou",
    "pbd_solve",
    "render",
    "render_depth",
    "render_mask",
    "settle",
    "splat_radius",
]
