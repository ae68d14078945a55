"""steerlab: structured neural steering controllers, benchmarks, a synthetic
telemetry simulator, gradient training, and the evaluation pipeline."""

__version__ = "0.1.0"
