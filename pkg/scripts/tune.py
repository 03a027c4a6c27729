"""Search DoubleHump parameters for nonuniqueness on the unit interval and on the square pocket."""
import json

from monostab.pipelines.tuning import tune_double_hump_1d, tune_pocket

if __name__ == "__main__":
    c1 = tune_double_hump_1d()
    print("interval:", json.dumps(c1.reaction.to_dict()), f"s in [{c1.s_lo:.4f}, {c1.s_hi:.4f}]")
    c2 = tune_pocket()
    print("pocket:  ", json.dumps(c2.reaction.to_dict()), f"sup in [{c2.s_lo:.4f}, {c2.s_hi:.4f}]")
