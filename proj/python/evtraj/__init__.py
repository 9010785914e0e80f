"""Event-camera trajectory prediction: simulate, track, sub-sample, predict.

Trajectories are (N, 3) float arrays of x, y, t_us; event streams are (N, 4)
int64 arrays of x, y, t_us, polarity.
"""

from ._core import (
    SENSOR_HEIGHT,
    SENSOR_WIDTH,
    FormatError,
    InvalidArgument,
    IoError,
    Model,
    NumericError,
    derive_seed,
    error_decompose,
    flip,
    load_model,
    load_track,
    mean_rate,
    save_track,
    simulate,
    subsample,
    track,
)

__all__ = [
    "SENSOR_HEIGHT",
    "SENSOR_WIDTH",
    "FormatError",
    "InvalidArgument",
    "IoError",
    "Model",
    "NumericError",
    "derive_seed",
    "error_decompose",
    "flip",
    "load_model",
    "load_track",
    "mean_rate",
    "save_track",
    "simulate",
    "subsample",
    "track",
]
