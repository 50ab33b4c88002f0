"""
Dataset Schema
Ordered stack of same-sized real images with intensities in [0, 1].
"""
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class Dataset(BaseModel):
    """Images stored as an (N, H, W) float32 array plus provenance"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    images: np.ndarray = Field(..., description="(N, H, W) float32 intensities")
    generator: str = Field("unknown", description="Name of the producing generator")
    seed: int = 0

    @field_validator("images")
    @classmethod
    def check_images(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 3:
            raise ValueError(f"images must be (N, H, W), got shape {v.shape}")
        if v.shape[0] == 0 or v.shape[1] == 0 or v.shape[2] == 0:
            raise ValueError("dataset must be nonempty with positive dimensions")
        v = np.ascontiguousarray(v, dtype=np.float32)
        if not np.all(np.isfinite(v)):
            raise ValueError("dataset contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("dataset values must lie in [0, 1]")
        return v

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def height(self) -> int:
        return int(self.images.shape[1])

    @property
    def width(self) -> int:
        return int(self.images.shape[2])

    def subset(self, indices) -> "Dataset":
        """Dataset restricted to the given image indices, order preserved"""
        return Dataset(images=self.images[np.asarray(indices, dtype=np.int64)],
                       generator=self.generator, seed=self.seed)
