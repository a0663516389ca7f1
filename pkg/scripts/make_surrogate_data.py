"""Write the synthetic occupancy and GPS-spoofing CSVs used by configs/*.ini."""
import argparse
from pathlib import Path

from qnoise.surrogate import write_surrogates


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rows", type=int, default=2000)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, path in write_surrogates(out, seed=args.seed, n_rows=args.rows).items():
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
