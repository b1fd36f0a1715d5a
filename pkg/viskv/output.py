import csv
import hashlib
from io import TextIOWrapper
import sys
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple
import numpy as np
from viskv.config import RunConfig


def format_value(val) -> str:
    """Shortest round-trip text for floats, true/false for flags"""
    if isinstance(val, (bool, np.bool_)):
        return 'true' if val else 'false'
    if isinstance(val, (float, np.floating)):
        return repr(float(val))
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    return str(val)


def config_hash(config: RunConfig) -> str:
    canonical = '\n'.join(f'{k} = {v}' for k, v in config.effective_items())
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


class CsvWriter:
    """
    Self-describing CSV: a commented provenance header, one header row, data
    rows and optional trailing `# summary` comments. Nothing in it depends on
    the clock or the host.
    """

    def __init__(self, output: TextIOWrapper, config: RunConfig, console: Optional[TextIO] = None):
        self.output = output
        self.config = config
        self.console = sys.stdout if console is None else console
        self.writer = csv.writer(output, lineterminator='\n')
        self.summary: List[Tuple[str, str]] = []

    def write_provenance(self):
        self.output.write(f'# scenario = {self.config.scenario.value}\n')
        for key, val in self.config.effective_items():
            if key == 'scenario':
                continue
            self.output.write(f'# {key} = {val}\n')
        for key, raw in self.config.file_assignments:
            self.output.write(f'# override (file) {key} = {raw}\n')
        for key, raw in self.config.overrides:
            self.output.write(f'# override {key} = {raw}\n')
        self.output.write(f'# config_hash = {config_hash(self.config)}\n')

    def write_header(self, columns: Sequence[str]):
        self.writer.writerow(columns)

    def write_rows(self, rows: Iterable[Sequence]):
        for row in rows:
            self.writer.writerow([format_value(v) for v in row])

    def add_summary(self, key: str, val):
        self.summary.append((key, format_value(val)))

    def close(self):
        for key, val in self.summary:
            self.output.write(f'# summary {key} = {val}\n')
