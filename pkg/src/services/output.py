"""Dataset and manifest writer.

All files of a run go through one ``ResultWriter``; each file is written to a
temporary sibling and moved into place, so readers never see partial data.
"""

import asyncio
import csv
import io
import logging
import os
from pathlib import Path
from typing import Optional

import aiofiles

from src.config import settings
from src.schemas.run import CSV_COLUMNS, ResultRow, RunManifest

logger = logging.getLogger(__name__)


def render_csv(rows: list[ResultRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buffer.getvalue()


class ResultWriter:
    """Serialised atomic writes into one output directory."""

    def __init__(self, out_dir: Optional[Path] = None):
        self.out_dir = Path(out_dir or settings.output_dir)
        self._lock = asyncio.Lock()
        self.written: list[Path] = []

    async def _write_text(self, name: str, text: str) -> Path:
        async with self._lock:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            target = self.out_dir / name
            tmp = target.with_name(f".{target.name}.tmp")
            async with aiofiles.open(tmp, "w", encoding="utf-8", newline="") as f:
                await f.write(text)
            os.replace(tmp, target)
            self.written.append(target)
        logger.info(f"Wrote {target}")
        return target

    async def write_csv(self, name: str, rows: list[ResultRow]) -> Path:
        return await self._write_text(name, render_csv(rows))

    async def write_manifest(self, name: str, manifest: RunManifest) -> Path:
        return await self._write_text(name, manifest.model_dump_json(indent=2) + "\n")
