"""Free-vortex wake simulation of actuator-disc wind-turbine wakes with
discrete-adjoint gradients and receding-horizon power optimization."""

from .model import InflowScenario, ModelConfig, WakeState

__all__ = ["ModelConfig", "WakeState", "InflowScenario"]
__version__ = "0.1.0"
