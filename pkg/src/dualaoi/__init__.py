"""Age-of-Information metrics for dual-sensor status-update systems."""

from dualaoi.core import AoiPath, Delivery, RandomStream, ServiceModel, SimStats, SystemKind, SystemSpec

__all__ = ["AoiPath", "Delivery", "RandomStream", "ServiceModel", "SimStats", "SystemKind", "SystemSpec"]
__version__ = "0.1.0"
