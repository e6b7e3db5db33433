import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")
    return path


@pytest.fixture
def jsonl_writer(tmp_path):
    def _write(records, name="corpus.jsonl"):
        return write_jsonl(tmp_path / name, records)

    return _write
