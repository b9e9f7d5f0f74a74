"""Union length of deep cylinder levels for perturbations of a system with dimension above one."""
import argparse
import csv
from pathlib import Path

from cplifs import systems
from cplifs.continuity_lab import LEBESGUE_HEADER, PerturbationSpec, lebesgue_positivity_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--system", choices=sorted(systems.REFERENCE_SYSTEMS), default="thick_pair")
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--delta", type=float, default=1e-3)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/lebesgue.csv"))
    args = ap.parse_args()

    F = systems.REFERENCE_SYSTEMS[args.system]()
    spec = PerturbationSpec(args.delta, seed=args.seed, trials=args.trials)
    rows = lebesgue_positivity_experiment(F, spec, args.depth)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LEBESGUE_HEADER)
        for r in rows:
            for d, e in zip(r.depths, r.estimates):
                w.writerow((r.trial, f"{r.s_hat:.12g}", d, f"{float(e):.12g}", r.verdict))
    verdicts = [r.verdict for r in rows]
    print(f"{args.system}: {verdicts.count('plateau')}/{len(rows)} plateau, "
          f"s_hat range [{min(r.s_hat for r in rows):.4f}, {max(r.s_hat for r in rows):.4f}]")


if __name__ == "__main__":
    main()
