from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import pytest

from varest.cli import main

EXAMPLES_DIR = Path(__file__).parent / "examples"


@dataclass
class Example:
    folder_name: str
    command: str = "theory-table"
    n: Optional[int] = None
    estimators: Optional[str] = None
    rel: float = 1e-3
    extra_args: List[str] = field(default_factory=list)

    def argv(self) -> List[str]:
        input_dir = EXAMPLES_DIR / self.folder_name / "input_data"
        (input_file,) = input_dir.iterdir()
        source = "--params" if input_file.suffix == ".params" else "--data"
        argv = [self.command, source, str(input_file), "--format", "json"]
        if self.n is not None:
            argv += ["--n", str(self.n)]
        if self.estimators is not None:
            argv += ["--estimators", self.estimators]
        return argv + self.extra_args


@pytest.mark.parametrize(
    "example",
    [
        Example("apple_orchards"),
        Example("toy_population", n=2, estimators="unbiased,ratio,regression", rel=1e-4),
        Example("six_units", command="enumerate", n=3, estimators="unbiased,product", rel=1e-6),
    ],
    ids=lambda x: x.folder_name,
)
def test_examples(capsys, example: Example):
    """
    For each example, we
    1. Run the CLI on its input data and parse the JSON report.
    2. Check that the rows come out in the expected order and from the expected source.
    3. Check every expected value to the example's relative tolerance.
    """
    code = main(example.argv())
    captured = capsys.readouterr()
    assert code == 0, captured.err
    rows = json.loads(captured.out)

    with open(EXAMPLES_DIR / example.folder_name / "expected.json") as f:
        expected = json.load(f)

    assert [(r["estimator"], r["source"]) for r in rows] == [
        (e["estimator"], e["source"]) for e in expected
    ]
    for row, exp in zip(rows, expected):
        for key, value in exp.items():
            if isinstance(value, str):
                continue
            assert row[key] == pytest.approx(value, rel=example.rel, abs=1e-6), (
                f"{exp['estimator']} ({exp['source']}): {key}"
            )
