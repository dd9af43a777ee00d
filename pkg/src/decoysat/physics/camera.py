"""Payload camera.

Serves pre-rendered ground tiles: the frame returned is the tile whose tagged
coordinates sit closest (great circle) to the subsatellite point, rescaled to
the commanded size. Night side returns a dark frame. No optics model; the
point is believable downlink product, not imagery.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, replace

from PIL import Image

from .orbit import OrbitalState


class ImageLibraryEmpty(Exception):
    pass


@dataclass
class CameraState:
    width_px: int = 1024
    height_px: int = 1024
    images_taken: int = 0
    last_image_path: str = ""

    def to_dict(self) -> dict:
        return {"width_px": self.width_px, "height_px": self.height_px,
                "images_taken": self.images_taken,
                "last_image_path": self.last_image_path}


@dataclass
class Tile:
    path: str
    latitude_deg: float
    longitude_deg: float


class TileLibrary:
    """Directory of image tiles with an index file: `filename lat lon` lines."""

    def __init__(self, directory: str):
        self.directory = directory
        self.tiles: list[Tile] = []
        index = os.path.join(directory, "index.txt")
        if os.path.isfile(index):
            with open(index, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    name, lat, lon = line.split()
                    self.tiles.append(Tile(os.path.join(directory, name),
                                           float(lat), float(lon)))

    def nearest(self, latitude_deg: float, longitude_deg: float) -> Tile:
        if not self.tiles:
            raise ImageLibraryEmpty(f"no tiles under {self.directory}")
        lat1 = math.radians(latitude_deg)
        lon1 = math.radians(longitude_deg)

        def central_angle(tile: Tile) -> float:
            lat2 = math.radians(tile.latitude_deg)
            lon2 = math.radians(tile.longitude_deg)
            return math.acos(max(-1.0, min(1.0,
                math.sin(lat1) * math.sin(lat2)
                + math.cos(lat1) * math.cos(lat2) * math.cos(lon1 - lon2))))

        return min(self.tiles, key=central_angle)


def _night_side(orbital: OrbitalState) -> bool:
    px, py, pz = orbital.position_eci_km
    r = math.sqrt(px * px + py * py + pz * pz)
    sx, sy, sz = orbital.sun_vector_eci
    return (px * sx + py * sy + pz * sz) / r < 0.0


def capture_image(cam: CameraState, orbital: OrbitalState,
                  library: TileLibrary) -> tuple:
    """Returns (new CameraState, PNG bytes). Caller stores the bytes and the
    path it chose back into the state via `with_path`."""
    size = (cam.width_px, cam.height_px)
    if _night_side(orbital):
        img = Image.new("RGB", size, (3, 3, 6))
    else:
        tile = library.nearest(orbital.latitude_deg, orbital.longitude_deg)
        img = Image.open(tile.path).convert("RGB").resize(size, Image.BILINEAR)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    new = replace(cam, images_taken=cam.images_taken + 1)
    return new, buf.getvalue()


def with_path(cam: CameraState, path: str) -> CameraState:
    return replace(cam, last_image_path=path)
