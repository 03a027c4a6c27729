"""Print L_alpha, dL/dalpha and s_max on a coarse alpha grid for a reaction given as JSON."""
import sys

from monostab.reaction import Reaction
from monostab.shoot1d import alpha_grid, length_curve

if __name__ == "__main__":
    spec = sys.argv[1] if len(sys.argv) > 1 else '{"family": "Cubic", "params": {"m": 1.0, "c": 2.0}}'
    r = Reaction.from_json(spec)
    c = length_curve(r, alpha_grid(r, 6, 24))
    print(r.describe(), "non-injective" if c.nonmonotone else "injective")
    sys.stdout.write(c.to_csv())
