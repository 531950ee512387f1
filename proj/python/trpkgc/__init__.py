"""Knowledge graph completion with a recurrent triple encoder and a Tucker decoder."""

import json
import os

from . import _core
from ._core import (
    CheckpointError,
    ConfigError,
    Dataset,
    Model,
    NumericalError,
    ParseError,
    SaturationError,
    ShapeError,
    UnknownSymbolError,
    Vocab,
    add_reciprocals,
    classification_accuracy,
    complex_score_all,
    distmult_score_all,
    filtered_rank,
    load_dataset,
    softmax_cross_entropy,
    summarize_ranks,
    token_shift,
    transe_score_all,
    tucker_score_all,
    tune_thresholds,
    wkv_direct,
)

__all__ = [
    "CheckpointError", "CommandError", "ConfigError", "Dataset", "Model", "NumericalError", "ParseError",
    "SaturationError", "ShapeError", "UnknownSymbolError", "Vocab", "add_reciprocals", "classification_accuracy",
    "classify", "complex_score_all", "corrupt", "distmult_score_all", "evaluate", "export_embeddings",
    "filtered_rank", "load_dataset", "load_model", "model_config", "preprocess", "softmax_cross_entropy",
    "subsample", "summarize_ranks", "token_shift", "train", "transe_score_all", "tucker_score_all",
    "tune_thresholds", "wkv_direct",
]


class CommandError(RuntimeError):
    """A pipeline command exited with a nonzero code."""

    def __init__(self, command, code, stderr):
        super().__init__(f"{command} failed with exit code {code}: {stderr.strip()}")
        self.code = code
        self.stderr = stderr


def _check(command, result):
    code, out, err = result
    if code != 0:
        raise CommandError(command, code, err)
    return out


def _path(p):
    return None if p is None else os.fspath(p)


def load_model(path):
    """Loads a checkpoint written by `train`."""
    return Model.load(os.fspath(path))


def model_config(model):
    """Effective run configuration stored in a checkpoint, as a dict."""
    return json.loads(model.config_json)


def preprocess(dataset_dir, output_dir=""):
    return _check("preprocess", _core.cmd_preprocess(os.fspath(dataset_dir), os.fspath(output_dir)))


def train(config_file=None, **overrides):
    """Trains a model. Keyword names follow the config keys with '-' written as '_'
    (dataset_dir, output_dir, dim, blocks, dropout, lr, ...). Returns the training log text."""
    flags = {key.replace("_", "-"): (os.fspath(v) if isinstance(v, os.PathLike) else v) for key, v in overrides.items()}
    return _check("train", _core.cmd_train(json.dumps(flags), _path(config_file)))


def evaluate(checkpoint, split="test", dataset_dir=None, filter_scope=None, out=None, workers=1):
    """Runs filtered link prediction and returns the metrics as a dict."""
    text = _check("eval", _core.cmd_eval(os.fspath(checkpoint), split, _path(dataset_dir), filter_scope,
                                         _path(out), workers))
    metrics = {}
    for line in text.splitlines():
        key, _, value = line.partition("\t")
        if value:
            metrics[key] = int(value) if key == "num_queries" else float(value)
    return metrics


def classify(checkpoint, valid, test, out=None):
    return _check("classify", _core.cmd_classify(os.fspath(checkpoint), os.fspath(valid), os.fspath(test),
                                                 _path(out)))


def export_embeddings(checkpoint, out_dir, probe_entity=None):
    return _check("export-embeddings",
                  _core.cmd_export_embeddings(os.fspath(checkpoint), os.fspath(out_dir), probe_entity))


def corrupt(dataset_dir, out, split="test", seed=7):
    return _check("corrupt", _core.cmd_corrupt(os.fspath(dataset_dir), split, seed, os.fspath(out)))


def subsample(dataset_dir, out_dir, fraction=0.01, seed=7):
    return _check("subsample", _core.cmd_subsample(os.fspath(dataset_dir), fraction, seed, os.fspath(out_dir)))
