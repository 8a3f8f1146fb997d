#!/usr/bin/env python3
"""Regenerate every figure dataset from configs/.

Run: python scripts/reproduce_figures.py [--out results] [--only op_vs_snr]
"""
import argparse
import asyncio
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

from src.core.errors import FamaError  # noqa: E402
from src.services.validation import load_run_config  # noqa: E402
from src.tasks.sweep import RunOptions, SweepRunner  # noqa: E402

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

# config stem -> subcommand
FIGURES = {
    "emax_vs_ports": "emax",
    "op_vs_snr": "op",
    "dor_vs_snr": "dor",
    "dor_vs_rate": "dor",
    "dor_vs_bandwidth": "dor",
    "ec_vs_snr": "ec",
}


async def reproduce(out: Path, only: list[str]) -> int:
    logger = logging.getLogger("reproduce")
    failed = 0
    for stem, command in FIGURES.items():
        if only and stem not in only:
            continue
        path = CONFIG_DIR / f"{stem}.toml"
        try:
            cfg = load_run_config(path)
            runner = SweepRunner(cfg, command, RunOptions(out_dir=out / stem, config_path=path))
            files = await runner.run()
        except FamaError as e:
            logger.error(f"{stem}: {e.reason}: {e}")
            failed += 1
            continue
        logger.info(f"{stem}: {len(files)} files in {out / stem}")
    return 1 if failed else 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--only", nargs="*", default=[], choices=sorted(FIGURES))
    args = parser.parse_args()
    sys.exit(asyncio.run(reproduce(args.out, args.only)))
