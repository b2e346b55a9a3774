"""Wave/solar powered USV simulator, telemetry stack and ground station."""

__version__ = "0.1.0"
