#!/usr/bin/env python3
"""Render the bundled example transforms: tile clouds and translate scenes.

Writes SVG files into an output directory (default ./figures).
"""

import argparse
import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from betatiling import betamap, tiling  # noqa: E402
from betatiling.svgout import render_point_layers  # noqa: E402

QUADRATIC = ["golden_greedy", "golden_minweight", "golden_symmetric", "golden_pm1"]
CUBIC = ["tribonacci_symmetric", "smallest_pisot_symmetric",
         "cubic_2m11_symmetric", "cubic_101_symmetric", "tribonacci_minweight"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="figures")
    ap.add_argument("--depth-quadratic", type=int, default=22)
    ap.add_argument("--depth-cubic", type=int, default=18)
    args = ap.parse_args()
    root = pathlib.Path(__file__).resolve().parents[1]
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in QUADRATIC + CUBIC:
        cfg = json.loads((root / "configs" / f"{name}.json").read_text())
        t = betamap.transform_from_config(cfg)
        depth = args.depth_quadratic if t.field.degree == 2 else args.depth_cubic
        vd = betamap.compute_v(t)
        g = tiling.gifs_build(t, vd)
        clouds, err = tiling.clouds_at_depth(g, depth)
        layers = [(f"tile-{i}", tuple(v.coords), clouds[i])
                  for i, v in enumerate(g.vertices)]
        path = outdir / f"{name}_tiles.svg"
        render_point_layers(layers, path)
        print(f"{name}: {sum(len(c) for c in clouds)} points, err {err:.2e} -> {path}")
        if t.field.degree == 2:
            scene = tiling.torus_translates(t, vd, g, depth)
            tl = [(f"translate-{k}", m, scene.scene_points + np.array(m, float))
                  for k, m in enumerate(scene.translates)]
            path2 = outdir / f"{name}_translates.svg"
            render_point_layers(tl, path2)
            print(f"{name}: coverage {scene.coverage} -> {path2}")


if __name__ == "__main__":
    main()
