"""
LOAD INSTANCES from file.

Formats:
    G-set text : first line "n m", then m lines "i j [w]" with 1-based vertices;
                 tokens separated by arbitrary whitespace, w defaults to 1.
    JSON       : {"n": .., "label": .., "edges": [[i, j, w], ...]} with 0-based
                 vertices and an optional "kind" ("ising" -> w is J_ij for i < j,
                 "maxcut" -> w is a MAX-CUT weight). Missing "kind" means "ising".
"""

# pylint: disable=C0301,C0103

##
import json
import os
from typing import Union

import numpy as np

from lib.ising import CutGraph, IsingInstance, edge_error, gen_random_dense, maxcut_to_ising


class GsetFormatError(ValueError):
    """ G-set parse failure at a given (1-based) line. """
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


##
def _text_lines(text: Union[bytes, str]):
    if not isinstance(text, bytes):
        return text.splitlines()
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        try:
            lines.append(raw.decode('utf-8'))
        except UnicodeDecodeError as err:
            raise GsetFormatError(no, f"invalid UTF-8 at byte {err.start} of the line") from None
    return lines


def parse_gset(text: Union[bytes, str], label: str = None) -> CutGraph:
    """ Parse a G-set MAX-CUT file.

    Args:
        text (bytes | str): file contents.
        label (str): optional instance name.

    Raises:
        GsetFormatError: malformed line or bytes, index out of range, self-loop, duplicate edge, edge count mismatch.

    Returns:
        CutGraph: graph with 0-based vertices.
    """
    lines = [(no, line.split()) for no, line in enumerate(_text_lines(text), start=1)]
    lines = [(no, tokens) for no, tokens in lines if tokens]
    if not lines:
        raise GsetFormatError(1, "empty file, expected header 'n m'")

    header_no, header = lines[0]
    if len(header) != 2:
        raise GsetFormatError(header_no, f"expected header 'n m', got {' '.join(header)!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise GsetFormatError(header_no, f"non-integer header {' '.join(header)!r}") from None
    if n < 1 or m < 0:
        raise GsetFormatError(header_no, f"invalid sizes n={n}, m={m}")

    body = lines[1:]
    if len(body) != m:
        no = body[m][0] if len(body) > m else (body[-1][0] if body else header_no)
        raise GsetFormatError(no, f"header announces {m} edges, file has {len(body)}")

    edges, seen = [], set()
    for no, tokens in body:
        if len(tokens) not in (2, 3):
            raise GsetFormatError(no, f"expected 'i j [w]', got {' '.join(tokens)!r}")
        try:
            i, j = int(tokens[0]), int(tokens[1])
            w = int(tokens[2]) if len(tokens) == 3 else 1
        except ValueError:
            raise GsetFormatError(no, f"non-integer field in {' '.join(tokens)!r}") from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise GsetFormatError(no, f"vertex index out of range 1..{n}: ({i}, {j})")
        if i == j:
            raise GsetFormatError(no, f"self-loop on vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GsetFormatError(no, f"duplicate edge ({key[0]}, {key[1]})")
        seen.add(key)
        edges.append((i - 1, j - 1, w))
    return CutGraph(n, tuple(edges), label=label)


def serialize_gset(graph: CutGraph) -> str:
    """ G-set text for a graph (1-based, weight column always written). """
    out = [f"{graph.n} {len(graph.edges)}"]
    out += [f"{i + 1} {j + 1} {w}" for i, j, w in graph.edges]
    return "\n".join(out) + "\n"


##
def instance_to_json(obj: Union[IsingInstance, CutGraph]) -> dict:
    """ JSON document for an instance or a graph. """
    if isinstance(obj, CutGraph):
        return {'n': obj.n, 'label': obj.label, 'kind': 'maxcut',
                'edges': [[i, j, w] for i, j, w in obj.edges]}
    if obj.graph is not None:
        return instance_to_json(obj.graph)
    J = obj.couplings
    iu, ju = np.nonzero(np.triu(J, k=1))
    cast = int if obj.is_integral else float
    edges = [[i, j, cast(J[i, j])] for i, j in zip(iu.tolist(), ju.tolist())]
    return {'n': obj.n, 'label': obj.label, 'kind': 'ising', 'edges': edges}


def instance_from_json(doc: dict) -> IsingInstance:
    """ Instance from a JSON document (see module docstring). """
    try:
        n, edges = int(doc['n']), doc['edges']
    except (KeyError, TypeError, ValueError) as err:
        raise ValueError(f"instance document needs integer 'n' and list 'edges': {err}") from None
    kind = doc.get('kind', 'ising')
    label = doc.get('label')
    if kind == 'maxcut':
        return maxcut_to_ising(CutGraph(n, tuple(tuple(e) for e in edges), label=label))
    if kind != 'ising':
        raise ValueError(f"unknown instance kind {kind!r}")
    triples = [(int(i), int(j), w) for i, j, w in edges]
    bad = edge_error(n, triples)
    if bad is not None:
        raise ValueError(f"edge {bad[0]}: {bad[1]}")
    J = np.zeros((n, n), dtype=np.float64)
    for i, j, w in triples:
        J[i, j] = J[j, i] = float(w)
    return IsingInstance(J, label=label)


def write_instance(obj: Union[IsingInstance, CutGraph], path: str):
    """ Write an instance as JSON (``.json``) or G-set text (any other suffix). """
    if path.endswith('.json'):
        with open(path, 'w') as file:
            json.dump(instance_to_json(obj), file)
        return
    graph = obj if isinstance(obj, CutGraph) else obj.graph
    if graph is None:
        raise ValueError("G-set output needs a MAX-CUT graph, write Ising instances as .json")
    with open(path, 'w') as file:
        file.write(serialize_gset(graph))


def read_instance(path: str, fmt: str = None) -> IsingInstance:
    """ Read a JSON or G-set file into an Ising instance.

    Args:
        path (str): file path.
        fmt (str): "json" or "gset"; inferred from the suffix when None.

    Raises:
        FileNotFoundError: missing path.
        ValueError: parse failure.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"instance file not found: {path}")
    label = os.path.splitext(os.path.basename(path))[0]
    if fmt is None:
        fmt = 'json' if path.endswith('.json') else 'gset'
    if fmt == 'json':
        with open(path, 'r') as file:
            try:
                doc = json.load(file)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}: invalid JSON ({err})") from None
        doc.setdefault('label', label)
        return instance_from_json(doc)
    with open(path, 'rb') as file:
        try:
            graph = parse_gset(file.read(), label=label)
        except GsetFormatError as err:
            err.args = (f"{path}: {err}",)
            raise
    return maxcut_to_ising(graph)


def parse_random_spec(spec: str):
    """ 'N:SEED' -> (N, SEED). """
    try:
        n, seed = (int(v) for v in spec.split(':'))
    except ValueError:
        raise ValueError(f"random instance spec must be 'N:SEED', got {spec!r}") from None
    return n, seed


def load_instance(opt) -> IsingInstance:
    """ Load the instance named by the options.

    Args:
        opt ([argparse.Namespace]): options with ``gset``, ``instance`` and ``random``.

    Raises:
        ValueError: no instance or more than one instance source given.

    Returns:
        IsingInstance: the instance.
    """
    sources = [s for s in (getattr(opt, 'gset', None), getattr(opt, 'instance', None), getattr(opt, 'random', None)) if s]
    if len(sources) != 1:
        raise ValueError("give exactly one of: instance path, --gset FILE, --random N:SEED")
    if getattr(opt, 'random', None):
        return gen_random_dense(*parse_random_spec(opt.random))
    if getattr(opt, 'gset', None):
        return read_instance(opt.gset, fmt='gset')
    return read_instance(opt.instance)
