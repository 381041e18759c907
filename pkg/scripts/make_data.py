"""Regenerate the JSON inputs under data/."""

import json
from fractions import Fraction
from pathlib import Path

from bvhier.bracket import Metric
from bvhier.tft import PhaseSpaceData, PureGravity, Table, pure_gravity, tabulate, with_table
from bvhier.transfer.fixtures import KILLING_SL2, broken_heisenberg, dgla_to_json, heisenberg, massey, sl2, ternary_with_differential

DATA = Path(__file__).resolve().parent.parent / "data"
PERTURBED_KEY = ((0, 0), (0, 0), (0, 0), (1, 0))


class TwoPoint:
    """Two decoupled copies of pure gravity seen in the basis ``e1 + e2``, ``e1 - e2``."""

    def __init__(self):
        self.pg = PureGravity()

    def __call__(self, key):
        odd = sum(a for _, a in key) % 2
        return Fraction(0) if odd else 2 * self.pg(key)


def two_point(max_insertions=10, max_level=4) -> PhaseSpaceData:
    d = PhaseSpaceData(2, ["O0", "O1"], 0, Metric([[2, 0], [0, 2]]), TwoPoint())
    return with_table(d, tabulate(d, max_insertions, max_level))


def perturb(d: PhaseSpaceData, key, value) -> PhaseSpaceData:
    entries = dict(d.provider.entries)
    entries[key] = Fraction(value)
    return with_table(d, Table(entries))


def write(name, obj):
    text = json.dumps(obj, sort_keys=True)
    if len(text) < 4000:
        text = json.dumps(obj, indent=1, sort_keys=True)
    (DATA / name).write_text(text + "\n")


def main():
    DATA.mkdir(exist_ok=True)
    pg = pure_gravity()
    write("phase_kdv.json", pg.to_json_obj())
    table = with_table(pg, tabulate(pg, 11, 5))
    write("pure_gravity_table.json", table.to_json_obj())
    write("broken_table.json", perturb(table, PERTURBED_KEY, 2).to_json_obj())
    tp = two_point()
    write("phase_two_point.json", tp.to_json_obj())
    write("broken_two_point.json", perturb(tp, ((0, 1), (0, 1), (0, 1), (1, 0)), 1).to_json_obj())
    write("metric_1.json", {"metric": [["1"]]})

    write("transfer_heisenberg.json", {"kind": "dgla", "name": "heisenberg", "algebra": dgla_to_json(heisenberg())})
    write("transfer_broken_heisenberg.json",
          {"kind": "dgla", "name": "broken_heisenberg", "algebra": dgla_to_json(broken_heisenberg())})
    write("transfer_sl2.json", {"kind": "dgla", "name": "sl2", "algebra": dgla_to_json(sl2())})
    write("transfer_massey.json", {"kind": "dgla", "name": "massey", "algebra": dgla_to_json(massey())})
    write("transfer_acyclic_extension.json", {
        "kind": "dgla", "name": "heisenberg_acyclic_extension",
        "algebra": dgla_to_json(heisenberg()), "acyclic_extension": True,
    })
    write("transfer_ternary_partial.json", {
        "kind": "dgla", "name": "ternary_partial",
        "algebra": dgla_to_json(ternary_with_differential()), "collapse": [["c", "w"]],
    })
    write("transfer_chern_simons.json", {
        "kind": "chern_simons", "name": "chern_simons_torus",
        "algebra": dgla_to_json(sl2()), "kappa": [[str(x) for x in row] for row in KILLING_SL2],
    })


if __name__ == "__main__":
    main()
