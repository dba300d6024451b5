"""Full-duplex mmWave beam selection on synthetic or measured channels."""

__version__ = "0.1.0"
