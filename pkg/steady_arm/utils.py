"""Utils for steady_arm."""

from typing import Generic, TypeVar

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel

T = TypeVar("T")

FloatArray = NDArray[np.float64]


class ResponseWithMessage(BaseModel, Generic[T]):  # noqa: UP046
    """Response with message."""

    message: str
    data: T


def as_vector(values: ArrayLike, size: int, name: str) -> FloatArray:
    """
    Convert ``values`` to a float vector of the expected length.

    Raises:
        ValueError: If the length does not match.

    """
    vector = np.asarray(values, dtype=float).reshape(-1)
    if vector.shape[0] != size:
        raise ValueError(f"{name} must have length {size}, got {vector.shape[0]}")
    return vector
