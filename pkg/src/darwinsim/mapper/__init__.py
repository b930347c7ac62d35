"""Network descriptions, placement, quantization and core images."""

from .image import ImageError, load_images, save_images
from .mapping import CoreImage, FabricConfig, MappedNetwork, MappingError, PlacedSlice, map_network
from .metrics import report_metrics
from .netdesc import Conv2D, NetDescError, NetworkDescription, Population, Projection, load_netdesc, parse_netdesc
from .quantize import QuantizationReport, quantize_params, quantize_weights
from .reference import ReferenceSimulator, reference_spikes

__all__ = [
    "Conv2D",
    "CoreImage",
    "FabricConfig",
    "ImageError",
    "MappedNetwork",
    "MappingError",
    "NetDescError",
    "NetworkDescription",
    "PlacedSlice",
    "Population",
    "Projection",
    "QuantizationReport",
    "ReferenceSimulator",
    "load_images",
    "load_netdesc",
    "map_network",
    "parse_netdesc",
    "quantize_params",
    "quantize_weights",
    "reference_spikes",
    "report_metrics",
    "save_images",
]
