"""IoT honeypots (busybox shell, IP camera) and attacker behaviour mining."""

__version__ = "0.1.0"
