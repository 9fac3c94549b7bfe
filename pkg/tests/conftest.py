import os
from pathlib import Path

import pytest

from pcrnn import cli, metrics


def cache_root() -> Path:
    root = Path(os.environ.get("PCRNN_ACCEPTANCE_CACHE",
                               Path(__file__).resolve().parent.parent
                               / ".acceptance_cache"))
    root.mkdir(parents=True, exist_ok=True)
    return root


def _ensure_run(out_dir: Path, argv) -> Path:
    if not (out_dir / "final.ckpt").exists():
        code = cli.main(argv)
        assert code == 0, f"training run failed with exit code {code}"
    return out_dir


@pytest.fixture(scope="session")
def target_run():
    """Full-scale parallel-clones run: N=499, lr=1, 100 iterations, seed 0.

    Cached under .acceptance_cache; the first execution takes on the order of
    ten minutes.
    """
    out = cache_root() / "target_s0"
    _ensure_run(out, ["train", "--mode", "target", "--preset", "full",
                      "--seed", "0", "--threads", "4",
                      "--checkpoint-every", "10", "--out", str(out)])
    return out


@pytest.fixture(scope="session")
def regular_run():
    """Full-scale online-GD baseline with non-active measurement clones."""
    out = cache_root() / "run_s0"
    _ensure_run(out / "regular",
                ["train", "--mode", "regular", "--preset", "full",
                 "--seed", "0", "--threads", "1",
                 "--checkpoint-every", "10", "--out", str(out)])
    return out / "regular"


@pytest.fixture(scope="session")
def target_surface(target_run):
    return metrics.read_surface_csv(target_run / "loss_surface.csv")


@pytest.fixture(scope="session")
def regular_surface(regular_run):
    return metrics.read_surface_csv(regular_run / "loss_surface.csv")
