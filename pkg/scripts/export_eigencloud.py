"""Export finite-section eigenvalue clouds for a batch of weighted composition operators.

Each entry of the batch file names a weight and a map in the command-line
shorthand; the eigenvalues of the N x N section are written as ``re,im`` CSV
files next to a JSON index of what was exported.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from cswco.hardy import weighted_composition_matrix  # noqa: E402
from cswco.reporting import write_csv, write_json  # noqa: E402
from cswco.shorthand import ShorthandError, parse_map, parse_weight  # noqa: E402
from cswco.spectra import eigenvalues  # noqa: E402

DEFAULT_BATCH = ROOT / "shared/eigencloud_batch.json"
DEFAULT_OUTPUT = ROOT / "out/eigencloud"

logger = logging.getLogger("cswco.export")


def load_batch(path: Path) -> list[dict]:
    entries = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise RuntimeError(f"{path} must hold a JSON list of {{name, psi, map}} objects")
    for entry in entries:
        missing = {"name", "map"} - set(entry)
        if missing:
            raise RuntimeError(f"batch entry {entry!r} is missing {sorted(missing)}")
    return entries


def export_batch(entries: list[dict], output: Path, N: int) -> list[dict]:
    index = []
    for entry in entries:
        name = entry["name"]
        try:
            psi = parse_weight(entry.get("psi", "1"))
            phi = parse_map(entry["map"])
            result = eigenvalues(weighted_composition_matrix(psi, phi, N))
        except (ShorthandError, ValueError) as exc:
            logger.warning("Skipping %s: %s", name, exc)
            index.append({"name": name, "error": str(exc)})
            continue
        target = output / f"{name}.csv"
        rows = write_csv(result.eigenvalues, target)
        index.append({"name": name, "csv": target.name, "rows": rows, "converged": result.converged})
    return index


def main() -> None:
    parser = argparse.ArgumentParser(description="Export eigenvalue clouds as CSV")
    parser.add_argument("--batch", default=str(DEFAULT_BATCH))
    parser.add_argument("--output", default=str(DEFAULT_OUTPUT))
    parser.add_argument("--N", type=int, default=96)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    output = Path(args.output)
    output.mkdir(parents=True, exist_ok=True)
    index = export_batch(load_batch(Path(args.batch)), output, args.N)
    write_json({"N": args.N, "entries": index}, output / "index.json")
    print(f"Wrote {sum(1 for item in index if 'csv' in item)} eigenvalue clouds to {output}")


if __name__ == "__main__":
    main()
