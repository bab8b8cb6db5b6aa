"""Bibliographic metadata for arbitrary web URIs.

Records are plain dicts in the same shape the service stores on disk.
"""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    FetchError,
    GreyharvestError,
    MalformedUri,
    MissingTitle,
    bibtex_key,
    normalize_uri,
    purl_id,
)

__version__ = _core.__version__

FORMATS = ("json", "bibtex", "ris", "rdf", "wiki")


def resolve_html(uri, html, attachments=None, rules_dir=None):
    """Resolves an already-downloaded page. Returns (record, warnings).

    `html` may be str or bytes; bytes are decoded by the page's declared
    charset.

    `attachments` maps URIs to bodies served to secondary fetches (feeds,
    author pages); anything else is treated as unreachable.
    """
    record, warnings = _core.resolve_html(uri, html, dict(attachments or {}), rules_dir)
    return _json.loads(record), list(warnings)


def resolve(uri, rules_dir=None):
    """Fetches and resolves a live URI."""
    record, _ = _core.resolve(uri, rules_dir)
    return _json.loads(record)


def serialize(record, fmt):
    """Renders a record dict in one of FORMATS."""
    return _core.serialize(_json.dumps(record), fmt)


def classify(record):
    """Completeness class: TCDAI, TCDA, PARTIAL or NONE."""
    return _core.classify(_json.dumps(record))


def embed(record, formats="scholar,ogp,coins"):
    """Returns (head_html, body_html) markup describing the record."""
    return tuple(_core.embed(_json.dumps(record), formats))


__all__ = [
    "ConfigError",
    "FORMATS",
    "FetchError",
    "GreyharvestError",
    "MalformedUri",
    "MissingTitle",
    "bibtex_key",
    "classify",
    "embed",
    "normalize_uri",
    "purl_id",
    "resolve",
    "resolve_html",
    "serialize",
]
