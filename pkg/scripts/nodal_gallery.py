"""Export nodal sets of a few eigenfunctions as plain-text polylines, with
their nodal-graph statistics."""
import argparse
from pathlib import Path

from qnodal.geometry import make_surface
from qnodal.nodal import build_nodal_graph, euler_lower_bound, extract_nodal_set
from qnodal.spectra import EnsembleSpec, Parity, SphereMode, TorusMode, ensemble_eigenfunction, explicit_eigenfunction


def gallery():
    torus, sphere = make_surface("torus"), make_surface("sphere")
    yield "torus_cos_2_3", explicit_eigenfunction(torus, TorusMode(2, 3, "cos", "cos")), 512
    yield "sphere_Y32", explicit_eigenfunction(sphere, SphereMode(3, 2, "cos")), 512
    yield "sphere_zonal_5", explicit_eigenfunction(sphere, SphereMode(5, 0, "cos")), 512
    yield "torus_even_85_s0", ensemble_eigenfunction(EnsembleSpec("torus", 85, Parity.EVEN, 0)), 1024


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="runs/gallery")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'name':<18} {'V':>5} {'E':>5} {'F':>5} {'m':>3} {'N':>4} {'#Fix':>5} {'bound':>5} lines")
    for name, u, res in gallery():
        g = build_nodal_graph(u, resolution=res)
        bound, _ = euler_lower_bound(g)
        ns = extract_nodal_set(u, resolution=res // 2)
        (out / f"{name}.txt").write_text(ns.to_path_text())
        print(f"{name:<18} {g.n_vertices:5d} {g.n_edges:5d} {g.faces:5d} {g.components:3d} "
              f"{g.nodal_domains:4d} {g.fix_crossings:5d} {bound:5d} {len(ns)}")


if __name__ == "__main__":
    main()
