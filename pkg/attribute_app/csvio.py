"""
CSV (and JSON) files read and written by the commands.

Every float is written with 17 significant digits and read back with
round-trip precision, so a file reproduces the arrays bit for bit.
Validation errors name the 1-based line of the offending row (the header is
line 1).
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import sparse

from .exceptions import InputError
from .numcore import FeatureDataset, FeatureSequence
from .pursuit import Dictionary, SparseCodeTable

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
FEATURE_KEYS = ('seq', 'frame', 'label')


def _read_table(path, what):
    path = Path(path)
    if not path.exists():
        raise InputError(f"{what} file {path} does not exist")
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False,
                           skipinitialspace=True)
    except pd.errors.EmptyDataError as exc:
        raise InputError(f"{path}: empty {what} file") from exc
    except pd.errors.ParserError as exc:
        raise InputError(f"{path}: malformed {what} file: {exc}") from exc


def _write_table(frame: pd.DataFrame, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT,
                 lineterminator='\n')
    logger.debug("wrote %d rows to %s", len(frame), path)
    return path


def _first_bad(mask, path, message):
    bad = np.flatnonzero(np.asarray(mask))
    if bad.size:
        raise InputError(f"{path}:{int(bad[0]) + 2}: {message}")


def _feature_columns(table, path, prefix='f', first=0):
    columns = [c for c in table.columns if c.startswith(prefix)
               and c[len(prefix):].isdigit()]
    expected = [f"{prefix}{i}" for i in range(first, first + len(columns))]
    if not columns or columns != expected:
        raise InputError(
            f"{path}:1: expected columns {prefix}{first}, {prefix}{first + 1}, "
            "... in order")
    return columns


def _numbers(table, columns, path):
    try:
        values = table[columns].astype(float).to_numpy()
    except ValueError:
        values = table[columns].apply(
            pd.to_numeric, errors='coerce').to_numpy(dtype=float)
    _first_bad(~np.isfinite(values).all(axis=1), path,
               "features must be finite numbers")
    return values


def read_features(path) -> FeatureDataset:
    """
    Feature table ``seq,frame,label[,group],f0,...,f{n-1}``. Sequences keep
    the order of their first row; an empty ``label`` means unlabeled.
    """
    table = _read_table(path, 'feature')
    missing = [key for key in FEATURE_KEYS if key not in table.columns]
    if missing:
        raise InputError(f"{path}:1: missing columns {', '.join(missing)}")
    features = _feature_columns(table, path)
    has_group = 'group' in table.columns
    if table.empty:
        return FeatureDataset(())

    table = table.fillna('')
    _first_bad(table['seq'].str.strip() == '', path, "empty sequence id")
    frame = pd.to_numeric(table['frame'], errors='coerce')
    _first_bad(frame.isna() | (frame < 0) | (frame % 1 != 0), path,
               "frame must be a non-negative integer")
    label_text = table['label'].str.strip()
    label = pd.to_numeric(label_text.where(label_text != ''), errors='coerce')
    _first_bad((label_text != '') & (label.isna() | (label < 1)
                                     | (label % 1 != 0)), path,
               "label must be an integer >= 1 or empty")
    values = _numbers(table, features, path)

    order = list(dict.fromkeys(table['seq']))
    rows_of = table.groupby('seq', sort=False).indices
    sequences = []
    for sequence_id in order:
        rows = np.sort(rows_of[sequence_id])
        ids = frame.to_numpy()[rows].astype(int)
        steps = np.flatnonzero(np.diff(ids) <= 0)
        if steps.size:
            raise InputError(
                f"{path}:{int(rows[steps[0] + 1]) + 2}: frame ids of "
                f"{sequence_id!r} must be strictly increasing")
        labels = set(label_text.to_numpy()[rows])
        if len(labels) > 1:
            raise InputError(
                f"{path}:{int(rows[0]) + 2}: sequence {sequence_id!r} has "
                "more than one label")
        seq_label = label.to_numpy()[rows[0]]
        group = None
        if has_group:
            groups = set(table['group'].to_numpy()[rows])
            if len(groups) > 1:
                raise InputError(
                    f"{path}:{int(rows[0]) + 2}: sequence {sequence_id!r} has "
                    "more than one group")
            group = groups.pop() or None
        sequences.append(FeatureSequence(
            sequence_id=sequence_id, frames=values[rows],
            label=None if np.isnan(seq_label) else int(seq_label),
            group=group, frame_ids=tuple(ids)))
    dataset = FeatureDataset(tuple(sequences))
    logger.info("read %d sequences (%d frames, n=%d) from %s",
                len(dataset), dataset.n_frames, dataset.n, path)
    return dataset


def write_features(dataset: FeatureDataset, path):
    with_group = any(seq.group is not None for seq in dataset)
    records = []
    for seq in dataset:
        for frame_id, vector in zip(seq.frame_ids, seq.frames):
            row = {'seq': seq.sequence_id, 'frame': frame_id,
                   'label': '' if seq.label is None else seq.label}
            if with_group:
                row['group'] = seq.group or ''
            row.update({f"f{i}": v for i, v in enumerate(vector)})
            records.append(row)
    columns = list(FEATURE_KEYS) + (['group'] if with_group else []) + \
        [f"f{i}" for i in range(dataset.n)]
    return _write_table(pd.DataFrame.from_records(records, columns=columns),
                        path)


def sidecar(path, name: str) -> Path:
    """``dict.csv`` -> ``dict.<name>.csv`` (or ``.json``)."""
    path = Path(path)
    suffix = '.json' if name == 'config' else '.csv'
    return path.with_name(f"{path.stem}.{name}{suffix}")


def write_dictionary(dictionary: Dictionary, path):
    frame = pd.DataFrame(dictionary.atoms.T,
                         columns=[f"f{i}" for i in range(dictionary.n)])
    frame.insert(0, 'atom', np.arange(dictionary.K))
    written = [_write_table(frame, path)]
    if dictionary.class_dist is not None:
        dist = pd.DataFrame(
            dictionary.class_dist,
            columns=[f"p{c + 1}" for c in range(dictionary.class_dist.shape[1])])
        dist.insert(0, 'atom', np.arange(dictionary.K))
        written.append(_write_table(dist, sidecar(path, 'classdist')))
    if dictionary.atom_prior is not None:
        written.append(_write_table(
            pd.DataFrame({'atom': np.arange(dictionary.K),
                          'prior': dictionary.atom_prior}),
            sidecar(path, 'prior')))
    return written


def _read_numeric(path, what):
    path = Path(path)
    if not path.exists():
        raise InputError(f"{what} file {path} does not exist")
    try:
        return pd.read_csv(path, float_precision='round_trip')
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise InputError(f"{path}: malformed {what} file: {exc}") from exc


def _check_atom_column(table, path, K=None):
    if 'atom' not in table.columns:
        raise InputError(f"{path}:1: missing column atom")
    atoms = table['atom'].to_numpy()
    expected = np.arange(len(table) if K is None else K)
    if atoms.shape != expected.shape or np.any(atoms != expected):
        raise InputError(f"{path}: atom column must be 0..{expected.size - 1}")


def read_dictionary(path, *, with_sidecars: bool = True) -> Dictionary:
    table = _read_numeric(path, 'dictionary')
    _check_atom_column(table, path)
    columns = _feature_columns(table, path)
    atoms = _numbers(table, columns, path).T
    class_dist = atom_prior = None
    if with_sidecars:
        dist_path = sidecar(path, 'classdist')
        if dist_path.exists():
            dist = _read_numeric(dist_path, 'class distribution')
            _check_atom_column(dist, dist_path, atoms.shape[1])
            columns = _feature_columns(dist, dist_path, 'p', 1)
            class_dist = _numbers(dist, columns, dist_path)
        prior_path = sidecar(path, 'prior')
        if prior_path.exists():
            prior = _read_numeric(prior_path, 'atom prior')
            _check_atom_column(prior, prior_path, atoms.shape[1])
            atom_prior = _numbers(prior, ['prior'], prior_path).ravel()
    return Dictionary(atoms, class_dist, atom_prior)


def write_codes(codes: SparseCodeTable, frame_index, dataset, path):
    """Triplets ``seq,frame,atom,value``; ``frame`` is the file's frame id."""
    if len(frame_index) != codes.N:
        raise InputError("frame index does not match the code table")
    coo = codes.matrix.tocoo()
    order = np.lexsort((coo.row, coo.col))
    frame_ids = {seq.sequence_id: seq.frame_ids for seq in dataset}
    records = []
    for k in order:
        sequence_id, pos = frame_index[coo.col[k]]
        records.append((sequence_id, frame_ids[sequence_id][pos],
                        int(coo.row[k]), float(coo.data[k])))
    return _write_table(pd.DataFrame.from_records(
        records, columns=['seq', 'frame', 'atom', 'value']), path)


def read_codes(path, dataset: FeatureDataset, K: int,
               sparsity=None) -> SparseCodeTable:
    """Codes aligned with the signal columns of ``flatten(dataset)``."""
    table = _read_table(path, 'code')
    missing = [c for c in ('seq', 'frame', 'atom', 'value')
               if c not in table.columns]
    if missing:
        raise InputError(f"{path}:1: missing columns {', '.join(missing)}")
    column = {}
    start = 0
    for seq in dataset:
        for pos, frame_id in enumerate(seq.frame_ids):
            column[(seq.sequence_id, frame_id)] = start + pos
        start += seq.n_frames
    frame = pd.to_numeric(table['frame'], errors='coerce')
    atom = pd.to_numeric(table['atom'], errors='coerce')
    try:
        value = table['value'].astype(float)
    except ValueError:
        value = pd.to_numeric(table['value'], errors='coerce')
    _first_bad(frame.isna() | atom.isna() | ~np.isfinite(value.to_numpy()),
               path, "frame, atom and value must be numbers")
    _first_bad((atom < 0) | (atom >= K) | (atom % 1 != 0), path,
               f"atom must be an integer in [0, {K})")
    keys = list(zip(table['seq'], frame.astype(int)))
    _first_bad([key not in column for key in keys], path,
               "code refers to a frame missing from the feature file")
    cols = np.array([column[key] for key in keys], dtype=int)
    rows = atom.to_numpy(dtype=int)
    duplicate = pd.Series(list(zip(rows, cols))).duplicated().to_numpy()
    _first_bad(duplicate, path, "duplicate atom within one frame")
    matrix = sparse.csc_matrix(
        (value.to_numpy(dtype=float), (rows, cols)), shape=(K, start))
    if sparsity is None:
        sizes = np.diff(matrix.indptr)
        sparsity = max(int(sizes.max()) if sizes.size else 1, 1)
    return SparseCodeTable(matrix, sparsity)


def write_history(history, path):
    return _write_table(pd.DataFrame({
        'iteration': np.arange(1, len(history) + 1),
        'rmse': np.asarray(history, dtype=float)}), path)


def write_trace(trace, path):
    frame = pd.DataFrame({
        'step': np.arange(1, len(trace.atoms) + 1),
        'atom': np.asarray(trace.atoms, dtype=int),
        'objective': np.asarray(trace.objectives, dtype=float),
        'seconds': np.asarray(trace.seconds, dtype=float),
    })
    return _write_table(frame, path)


def read_trace(path) -> pd.DataFrame:
    return _read_numeric(path, 'trace')


def write_merges(merges, path):
    return _write_table(pd.DataFrame.from_records(
        [(m.step, m.kept, m.removed, m.loss) for m in merges],
        columns=['step', 'kept', 'removed', 'loss']), path)


def write_predictions(predictions, path):
    return _write_table(pd.DataFrame.from_records(
        [(p.sequence_id, '' if p.true_label is None else p.true_label,
          p.predicted_label, p.distance) for p in predictions],
        columns=['seq', 'true_label', 'predicted_label', 'distance']), path)


def write_confusion(matrix, path):
    M = matrix.shape[0]
    frame = pd.DataFrame(matrix, columns=[f"pred{c + 1}" for c in range(M)])
    frame.insert(0, 'label', np.arange(1, M + 1))
    return _write_table(frame, path)


def write_histogram(edges, frequency, path):
    return _write_table(pd.DataFrame({
        'bin_low': edges[:-1], 'bin_high': edges[1:],
        'frequency': frequency}), path)


def read_histogram(path) -> pd.DataFrame:
    return _read_numeric(path, 'histogram')


def _step_term(values, r):
    return values[r] if r < len(values) else np.nan


def write_summaries(summaries, dataset, path):
    """Chosen frames per sequence; baselines without a term leave it blank."""
    records = []
    for summary in summaries:
        frame_ids = dataset.get(summary.sequence_id).frame_ids
        rank = {frame: r for r, frame in enumerate(summary.order)}
        for frame in summary.frames:
            r = rank[frame]
            records.append((summary.sequence_id, r + 1, frame_ids[frame],
                            _step_term(summary.diversity, r),
                            _step_term(summary.coverage, r)))
    return _write_table(pd.DataFrame.from_records(
        records, columns=['seq', 'rank', 'frame', 'diversity_term',
                          'coverage_term']), path)


def write_reconstruction(rows, path):
    return _write_table(pd.DataFrame.from_records(
        [(seq, '' if label is None else label, rmse)
         for seq, label, rmse in rows],
        columns=['seq', 'label', 'rmse']), path)


def write_kernel(kern, path):
    """Supported entries ``i,j,value`` of a kernel, row-major."""
    coo = kern.support.tocoo()
    order = np.lexsort((coo.col, coo.row))
    rows, cols = coo.row[order], coo.col[order]
    return _write_table(pd.DataFrame({
        'i': rows, 'j': cols, 'value': kern.values[rows, cols]}), path)


def write_config(config: dict, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config, sort_keys=True, indent=2) + '\n')
    return path


def read_config(path) -> dict:
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise InputError(f"config file {path} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}:{exc.lineno}: malformed config: {exc.msg}") from exc
    if not isinstance(config, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return config
