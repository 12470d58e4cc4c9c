"""Pack the sphere gluings and render packings and limit-set clouds.

Writes SVG figures next to this script: the two gluings at a few levels and
a deeper limit-set point cloud of the quarter-turn gluing (the Kleinian
one).  Rendering is byte-deterministic.
"""

from pathlib import Path

from gasket_forge.fileio import format_cloud, format_packing
from gasket_forge.gallery import builtin
from gasket_forge.packing import pack_level
from gasket_forge.render import RenderSpec, cloud_elements, packing_elements, render_svg
from gasket_forge.subdivision import subdivision_tower
from gasket_forge.tiles import limit_set_cloud

out = Path(__file__).resolve().parent / "output"
out.mkdir(exist_ok=True)
cat = builtin()

for name, cx0 in (("g1", cat.g1), ("g2", cat.g2)):
    for level in (1, 3, 5):
        p = pack_level(cx0, cat.rule, level)
        print(f"{name} level {level}: {len(p.circles)} circles, "
              f"tangency residual {p.tangency_residual:.2e}")
        svg = render_svg(packing_elements(p), RenderSpec())
        (out / f"{name}_level{level}.svg").write_text(svg)
        (out / f"{name}_level{level}.pack").write_text(format_packing(p))

# limit-set cloud of the Kleinian gluing
level, depth = 5, 3
tower = subdivision_tower(cat.g2, cat.rule, level)
p = pack_level(cat.g2, cat.rule, level)
cloud = limit_set_cloud(p, tower[level], depth=depth, samples_per_circle=48)
print(f"cloud points: {len(cloud)}")
(out / "g2_cloud.svg").write_text(
    render_svg(cloud_elements(cloud), RenderSpec(point_size=0.003)))
(out / "g2_cloud.cloud").write_text(format_cloud(cloud, level, depth))
print("figures written to", out)
