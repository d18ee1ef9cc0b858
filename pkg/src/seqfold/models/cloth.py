"""Cloth configuration and action models."""

from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field

Pixel = Tuple[int, int]


class ClothSpec(BaseModel):
    """A rectangular cloth: grid resolution, size and planar pose."""

    model_config = ConfigDict(frozen=True)

    rows: int = Field(default=25, ge=2)
    cols: int = Field(default=25, ge=2)
    width: float = Field(default=0.34375, gt=0)
    height: float = Field(default=0.34375, gt=0)
    rotation: float = 0.0  # radians about the vertical axis
    center: Tuple[float, float] = (0.0, 0.0)


class PickPlaceAction(BaseModel):
    """A pick pixel and a place pixel, each as (row, col)."""

    model_config = ConfigDict(frozen=True)

    pick: Pixel
    place: Pixel

    def as_json(self) -> dict:
        return {"pick": list(self.pick), "place": list(self.place)}
