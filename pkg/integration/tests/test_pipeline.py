from pathlib import Path

import numpy as np
import pytest
from omegaconf import OmegaConf

from formalia.corpus.corpus import read_lines
from formalia.pipeline.cli import main
from formalia.pipeline.models import RerankStage, ScoreSeries
from formalia.pipeline.pipeline import (
    MANIFEST_FILENAME,
    TRAIL_FILENAME,
    best_window,
    config_hash,
    last_window,
    load_pipeline_config,
    load_series,
    run_pipeline,
)
from formalia.pipeline.synthetic import generate_dataset
from formalia.utils.exceptions import (
    ArgumentError,
    ConfigValidationError,
    DataError,
    EmptyPivotSeedsError,
    StageError,
)
from formalia.utils.settings import OracleSettings

from .conftest import write_file


@pytest.fixture
def dataset(tmp_path):
    return generate_dataset(
        tmp_path / "data", seed=13, size=600, in_domain_size=120, samples=20, k=10
    )


def artifacts(directory):
    return {
        str(path.relative_to(directory)): path.read_bytes()
        for path in sorted(directory.rglob("*"))
        if path.is_file()
    }


def test_best_window_examples():
    assert best_window([1.0, 2.0, 3.0, 4.0], 2) == (2, 3.5)
    assert best_window([0.2, 0.4, 0.6], 3) == (0, pytest.approx(0.4))
    assert best_window([0.5] * 12, 10) == (0, 0.5)
    assert best_window([0.3, 0.9, 0.1], 1) == (1, 0.9)


def test_best_window_matches_brute_force():
    rng = np.random.default_rng(5)

    for _ in range(1000):
        accuracies = rng.random(int(rng.integers(10, 201))).round(3).tolist()
        window = int(rng.integers(1, len(accuracies) + 1))

        means = [
            sum(accuracies[start : start + window]) / window
            for start in range(len(accuracies) - window + 1)
        ]
        best = max(means)

        start, mean = best_window(accuracies, window)
        assert mean == pytest.approx(best, abs=1e-9)
        assert means[start] == pytest.approx(best, abs=1e-9)
        assert start == next(
            index for index, value in enumerate(means) if abs(value - best) < 1e-9
        )


@pytest.mark.parametrize(
    "accuracies, window",
    [
        ([0.3, 0.2, 0.1, 0.3, 0.2], 3),
        ([0.1, 0.2, 0.3, 0.1, 0.2], 3),
        ([0.7] * 15, 10),
        ([0.1] * 7, 3),
    ],
)
def test_best_window_ties_go_to_the_first_start(accuracies, window):
    start, mean = best_window(accuracies, window)

    assert start == 0
    assert mean == pytest.approx(sum(accuracies[:window]) / window)


def test_window_bounds():
    with pytest.raises(ArgumentError):
        best_window([0.1, 0.2], 3)
    with pytest.raises(ArgumentError):
        best_window([0.1, 0.2], 0)
    with pytest.raises(ArgumentError):
        last_window([0.1], 2)


def test_last_window():
    assert last_window([0.1, 0.2, 0.3, 0.5], 2) == (2, pytest.approx(0.4))


def test_load_series(tmp_path):
    series = load_series(
        write_file(
            tmp_path / "series.tsv",
            ["checkpoint\taccuracy", "ckpt1\t0.5", "ckpt2\t0.75"],
        )
    )

    assert series.checkpoints == ("ckpt1", "ckpt2")
    assert best_window(series, 1) == (1, 0.75)

    with pytest.raises(DataError):
        load_series(
            write_file(tmp_path / "bad.tsv", ["checkpoint\taccuracy", "a\t1.5"])
        )
    with pytest.raises(ValueError):
        ScoreSeries(checkpoints=("a", "a"), accuracies=np.array([0.1, 0.2]))


def test_missing_input_fails_before_any_output(tmp_path, dataset):
    (dataset.parent / "indomain.F.de").unlink()
    config = load_pipeline_config(dataset)

    with pytest.raises(ConfigValidationError, match="FormalInDomain"):
        run_pipeline(config, output_dir=tmp_path / "out")

    assert not (tmp_path / "out").exists()


def test_missing_configuration(tmp_path):
    with pytest.raises(ConfigValidationError):
        load_pipeline_config(tmp_path / "absent.yaml")


def test_config_hash_ignores_location(tmp_path, dataset):
    config = load_pipeline_config(dataset)
    moved = load_pipeline_config(dataset)
    moved.OutputDir = str(tmp_path / "elsewhere")
    moved.BaseDir = str(tmp_path)

    assert config_hash(config) == config_hash(moved)

    moved.Seed += 1
    assert config_hash(config) != config_hash(moved)


def test_run_is_independent_of_workers(tmp_path, dataset):
    config = load_pipeline_config(dataset)

    outputs = {}
    for workers in (1, 4, 8):
        directory = tmp_path / f"run{workers}"
        assert run_pipeline(config, output_dir=directory, workers=workers) == 0
        outputs[workers] = artifacts(directory)

    files = outputs[1]
    for name in (
        TRAIL_FILENAME,
        MANIFEST_FILENAME,
        "en-de/mine/labeled.tsv",
        "en-fr/lm/formal.ranking.tsv",
        "en-es/pivot/stats.tsv",
        "en-es/mine/report.txt",
        "en-es/oracle/oracle.tsv",
        "en-de/score/reranked.txt",
    ):
        assert name in files

    assert outputs[4] == files
    assert outputs[8] == files


def test_empty_pivot_seeds(tmp_path, dataset):
    source = dataset.parent / "train.en-fr.en"
    write_file(source, [f"zz {line}" for line in read_lines(source)])

    with pytest.raises(StageError) as error:
        run_pipeline(load_pipeline_config(dataset), output_dir=tmp_path / "out")

    assert error.value.stage == "en-es/pivot"
    assert isinstance(error.value.cause, EmptyPivotSeedsError)
    assert (tmp_path / "out" / "en-es" / "pivot" / "stats.tsv").is_file()
    assert (tmp_path / "out" / "en-de" / "mine" / "labeled.tsv").is_file()
    assert "CRITICAL" in (tmp_path / "out" / TRAIL_FILENAME).read_text()


def test_cli_usage_error():
    with pytest.raises(SystemExit) as error:
        main(["mine"])

    assert error.value.code == 1


def test_cli_best_window(tmp_path, capsys):
    series = write_file(
        tmp_path / "series.tsv",
        ["checkpoint\taccuracy"]
        + [f"c{n}\t{value}" for n, value in enumerate([0.1, 0.2, 0.9, 0.8, 0.1])],
    )

    assert main(["best-window", "--series", str(series), "--window", "2"]) == 0

    lines = capsys.readouterr().out.splitlines()
    assert lines[:3] == ["start=2", "first=c2", "last=c3"]
    assert "last_window_start=3" in lines


def test_cli_score_misaligned(tmp_path):
    hypotheses = write_file(tmp_path / "hyp", ["Sie kommen", "du kommst"])
    formal = write_file(tmp_path / "formal", ["[F]Sie[/F] kommen"] * 3)
    informal = write_file(tmp_path / "informal", ["[I]du[/I] kommst"] * 3)

    code = main(
        [
            "score",
            "--hyp",
            str(hypotheses),
            "--ref-formal",
            str(formal),
            "--ref-informal",
            str(informal),
            "--context",
            "F",
        ]
    )

    assert code == 2


def test_cli_score(tmp_path, capsys):
    hypotheses = write_file(tmp_path / "hyp", ["Sie kommen", "du kommst"])
    formal = write_file(tmp_path / "formal", ["[F]Sie[/F] kommen"] * 2)
    informal = write_file(tmp_path / "informal", ["[I]du[/I] kommst"] * 2)

    code = main(
        [
            "score",
            "--hyp",
            str(hypotheses),
            "--ref-formal",
            str(formal),
            "--ref-informal",
            str(informal),
            "--context",
            "F",
        ]
    )

    assert code == 0
    assert "accuracy=0.5000" in capsys.readouterr().out.splitlines()


def test_cli_missing_input(tmp_path):
    formal = write_file(tmp_path / "formal", ["[F]Sie[/F] kommen"])
    informal = write_file(tmp_path / "informal", ["[I]du[/I] kommst"])

    code = main(
        [
            "score",
            "--hyp",
            str(tmp_path / "absent"),
            "--ref-formal",
            str(formal),
            "--ref-informal",
            str(informal),
            "--context",
            "F",
        ]
    )

    assert code == 2


def test_oracle_sizes_match_shipped_config():
    shipped = OmegaConf.load(Path(__file__).parents[2] / "config.yaml")

    assert list(shipped.Oracle.Ks) == OracleSettings().Ks == RerankStage().Ks
