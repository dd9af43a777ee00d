"""Regenerate the bundled ground-image tiles.

Procedural terrain-ish renders (value-noise octaves -> palette) so the repo
carries no third-party imagery. Deterministic per tile name. Run from the
repo root: python scripts/make_tiles.py
"""

import os
import random

from PIL import Image

SIZE = 128
OUT = os.path.join(os.path.dirname(__file__), "..", "src", "decoysat", "data", "tiles")

# name, lat, lon, palette (water, low, high)
TILES = [
    ("andes.png", -33.0, -70.0, ((24, 46, 84), (108, 96, 64), (226, 228, 232))),
    ("sahara.png", 23.0, 8.0, ((40, 52, 70), (196, 160, 96), (236, 212, 150))),
    ("alps.png", 46.4, 9.8, ((30, 50, 80), (78, 110, 60), (238, 240, 244))),
    ("amazon.png", -4.5, -62.0, ((26, 60, 74), (34, 92, 44), (96, 140, 62))),
    ("himalaya.png", 28.2, 85.6, ((32, 48, 76), (120, 104, 72), (244, 246, 250))),
    ("great_lakes.png", 45.0, -83.0, ((18, 44, 86), (60, 96, 52), (150, 160, 120))),
    ("outback.png", -25.0, 133.0, ((46, 54, 72), (172, 96, 58), (220, 168, 120))),
    ("nile_delta.png", 30.8, 31.2, ((28, 56, 96), (92, 120, 60), (210, 190, 140))),
    ("baltic.png", 56.5, 18.0, ((16, 40, 78), (52, 88, 50), (130, 150, 110))),
]


def value_noise(rng, n, octaves=4):
    field = [[0.0] * n for _ in range(n)]
    amp, cell = 1.0, n // 4
    for _ in range(octaves):
        grid = [[rng.random() for _ in range(n // cell + 2)]
                for _ in range(n // cell + 2)]
        for y in range(n):
            for x in range(n):
                gx, gy = x / cell, y / cell
                x0, y0 = int(gx), int(gy)
                fx, fy = gx - x0, gy - y0
                a = grid[y0][x0] * (1 - fx) + grid[y0][x0 + 1] * fx
                b = grid[y0 + 1][x0] * (1 - fx) + grid[y0 + 1][x0 + 1] * fx
                field[y][x] += amp * (a * (1 - fy) + b * fy)
        amp *= 0.5
        cell = max(2, cell // 2)
    flat = [v for row in field for v in row]
    lo, hi = min(flat), max(flat)
    return [[(v - lo) / (hi - lo) for v in row] for row in field]


def lerp(c0, c1, f):
    return tuple(int(c0[i] + (c1[i] - c0[i]) * f) for i in range(3))


def render(name, palette):
    rng = random.Random(name)
    noise = value_noise(rng, SIZE)
    water, low, high = palette
    img = Image.new("RGB", (SIZE, SIZE))
    px = img.load()
    sea_level = 0.35
    for y in range(SIZE):
        for x in range(SIZE):
            v = noise[y][x]
            if v < sea_level:
                px[x, y] = lerp(water, low, (v / sea_level) * 0.25)
            else:
                f = (v - sea_level) / (1 - sea_level)
                px[x, y] = lerp(low, high, f * f)
    return img


def main():
    os.makedirs(OUT, exist_ok=True)
    index_lines = ["# filename latitude_deg longitude_deg"]
    for name, lat, lon, palette in TILES:
        render(name, palette).save(os.path.join(OUT, name), optimize=True)
        index_lines.append(f"{name} {lat} {lon}")
    with open(os.path.join(OUT, "index.txt"), "w") as fh:
        fh.write("\n".join(index_lines) + "\n")
    print(f"wrote {len(TILES)} tiles to {OUT}")


if __name__ == "__main__":
    main()
