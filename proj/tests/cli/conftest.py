import json
import pathlib
import subprocess

import pytest


def pytest_addoption(parser):
    parser.addoption("--spkr", required=True, help="path to the spkr executable")
    parser.addoption("--schemas", required=True, help="directory holding the report schemas")


class Spkr:
    def __init__(self, exe, schemas):
        self.exe = exe
        self.schemas = pathlib.Path(schemas)

    def run(self, *args, check=None):
        proc = subprocess.run([self.exe, *map(str, args)], capture_output=True, text=True)
        if check is not None:
            assert proc.returncode == check, f"exit {proc.returncode}, stderr: {proc.stderr}"
        return proc

    def report(self, *args):
        """Runs a subcommand that must succeed and returns its parsed JSON report."""
        proc = self.run(*args, check=0)
        return json.loads(proc.stdout)

    def schema(self, command):
        return json.loads((self.schemas / f"{command}.schema.json").read_text())


@pytest.fixture(scope="session")
def spkr(pytestconfig):
    return Spkr(pytestconfig.getoption("--spkr"), pytestconfig.getoption("--schemas"))


def write_spec(path, **overrides):
    spec = {
        "model": {"kind": "plda", "dim": 16, "between": 1.0, "within": 0.1},
        "n_speakers": 40,
        "count": [6, 12],
        "seed": 7,
        "protocols": [
            {"n_enroll": 1, "n_test": 1, "n_trials": 400},
            {"n_enroll": 3, "n_test": 1, "n_trials": 400},
        ],
    }
    spec.update(overrides)
    path.write_text(json.dumps(spec))
    return path


@pytest.fixture(scope="session")
def corpus(spkr, tmp_path_factory):
    """Synthetic corpus, a trained spherical PLDA model and a cosine model."""
    d = tmp_path_factory.mktemp("corpus")
    spec = write_spec(d / "spec.json")
    spkr.run("synth", "--spec", spec, "--out-embeddings", d / "emb.bin", "--out-labels", d / "labels.txt",
             "--out-trials", d / "t", "--out-order", d / "order.txt", check=0)
    spkr.run("train", "--embeddings", d / "emb.bin", "--labels", d / "labels.txt", "--backend", "sph-plda",
             "--out", d / "plda.json", check=0)
    spkr.run("train", "--embeddings", d / "emb.bin", "--labels", d / "labels.txt", "--backend", "cosine",
             "--out", d / "cos.json", check=0)
    return d
