"""Control-oriented wind turbine simulator.

A generalized actuator disk is two-way coupled with a desk-scale flow grid,
a single-shaft drive-train, a tower fore-aft mode and a generator torque
controller.
"""
from .actuator_disk import ActuatorDisk, build_disk, momentum_oracle
from .blade_data import load_blade, load_nrel5mw_blade, lookup_cl_cd
from .config import SimConfig, load_config, validate_config
from .control import btc_step, compute_k, make_controller
from .flow_field import FlowField, SourceKernel, load_inflow_frames
from .simulation import Simulation, cp_sweep, run
from .structural import DriveTrain, TurbineState, build_tower, step_drivetrain, step_tower

__version__ = "0.1.0"

__all__ = [
    "ActuatorDisk", "DriveTrain", "FlowField", "SimConfig", "Simulation", "SourceKernel",
    "TurbineState", "btc_step", "build_disk", "build_tower", "compute_k", "cp_sweep",
    "load_blade", "load_config", "load_inflow_frames", "load_nrel5mw_blade", "lookup_cl_cd",
    "make_controller", "momentum_oracle", "run", "step_drivetrain", "step_tower",
    "validate_config",
]
